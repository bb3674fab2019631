//! Dataset ingestion, min-max scaling, stratified splitting and synthetic
//! overlapping blobs.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::nn::Matrix;
use crate::{seeded_rng, Error, Result};

/// Which CSV column carries the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// Header name; requires a header row.
    Name(String),
    /// Zero-based column index.
    Index(usize),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Plain integers are indices, anything else a column name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

/// Per-feature min/max of a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    /// Dense ids into `class_names`.
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub norm_stats: Option<NormStats>,
}

/// Raw CSV contents: numeric features plus the label column as text.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub feature_names: Option<Vec<String>>,
    pub features: Matrix,
    pub labels: Option<Vec<String>>,
}

/// Read a CSV of numeric features. When `label` is given that column is
/// split off as text labels; it must exist.
pub fn read_csv(path: &Path, label: Option<&LabelColumn>, header: bool) -> Result<CsvTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let csv_err = |line: u64, message: String| Error::Csv {
        path: path.to_path_buf(),
        line,
        message,
    };

    let header_row: Option<Vec<String>> = if header {
        let h = reader
            .headers()
            .map_err(|e| csv_err(1, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        Some(h)
    } else {
        None
    };

    let label_idx = match (label, &header_row) {
        (None, _) => None,
        (Some(LabelColumn::Index(i)), Some(h)) if *i >= h.len() => {
            return Err(Error::invalid(format!(
                "{}: label column index {i} is out of range ({} columns)",
                path.display(),
                h.len()
            )))
        }
        (Some(LabelColumn::Index(i)), _) => Some(*i),
        (Some(LabelColumn::Name(name)), Some(h)) => {
            Some(h.iter().position(|c| c == name).ok_or_else(|| {
                Error::invalid(format!(
                    "{}: label column `{name}` not found in header",
                    path.display()
                ))
            })?)
        }
        (Some(LabelColumn::Name(name)), None) => {
            return Err(Error::invalid(format!(
                "label column `{name}` given by name but the file has no header"
            )))
        }
    };

    let mut width = header_row.as_ref().map(Vec::len);
    let mut data = Vec::new();
    let mut labels = label_idx.map(|_| Vec::new());
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            csv_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(csv_err(
                line,
                format!("expected {expected} fields, found {}", record.len()),
            ));
        }
        if let Some(li) = label_idx {
            if li >= record.len() {
                return Err(csv_err(line, format!("label column {li} missing")));
            }
        }
        for (col, field) in record.iter().enumerate() {
            if Some(col) == label_idx {
                labels.as_mut().unwrap().push(field.to_string());
                continue;
            }
            let value: f64 = field.parse().map_err(|_| {
                let name = header_row
                    .as_ref()
                    .map(|h| format!("`{}`", h[col]))
                    .unwrap_or_else(|| format!("{col}"));
                csv_err(
                    line,
                    format!("non-numeric value `{field}` in column {name}"),
                )
            })?;
            if !value.is_finite() {
                return Err(csv_err(
                    line,
                    format!("non-finite value `{field}` in column {col}"),
                ));
            }
            data.push(value);
        }
        rows += 1;
    }

    let n_features = width
        .map(|w| w - usize::from(label_idx.is_some()))
        .unwrap_or(0);
    let features = Matrix::from_vec(rows, n_features, data)?;
    let feature_names = header_row.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_idx)
            .map(|(_, n)| n)
            .collect()
    });
    Ok(CsvTable {
        feature_names,
        features,
        labels,
    })
}

/// Load a labeled CSV. Labels are interned to ids in first-appearance order.
pub fn load_csv(path: &Path, label: &LabelColumn, header: bool) -> Result<Dataset> {
    let table = read_csv(path, Some(label), header)?;
    Dataset::from_text_labels(table.features, &table.labels.unwrap_or_default(), &[])
}

/// Load a labeled CSV, reusing the ids of an existing class catalogue.
/// Unseen labels are appended to the catalogue.
pub fn load_csv_with_catalogue(
    path: &Path,
    label: &LabelColumn,
    header: bool,
    catalogue: &[String],
) -> Result<Dataset> {
    let table = read_csv(path, Some(label), header)?;
    Dataset::from_text_labels(table.features, &table.labels.unwrap_or_default(), catalogue)
}

impl Dataset {
    pub fn new(x: Matrix, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if labels.len() != x.rows() {
            return Err(Error::shape("Dataset::new labels", x.rows(), labels.len()));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::invalid(format!(
                "label id {bad} outside the {}-class catalogue",
                class_names.len()
            )));
        }
        Ok(Self {
            x,
            labels,
            class_names,
            norm_stats: None,
        })
    }

    /// Intern text labels, starting from `catalogue`.
    pub fn from_text_labels(x: Matrix, labels: &[String], catalogue: &[String]) -> Result<Self> {
        let mut names: Vec<String> = catalogue.to_vec();
        let mut index: HashMap<String, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let ids = labels
            .iter()
            .map(|l| {
                *index.entry(l.clone()).or_insert_with(|| {
                    names.push(l.clone());
                    names.len() - 1
                })
            })
            .collect();
        Self::new(x, ids, names)
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn class_id(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|n| n == name)
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            norm_stats: self.norm_stats.clone(),
        }
    }

    /// Same labels, different features (e.g. a learned representation).
    pub fn with_features(&self, x: Matrix) -> Result<Dataset> {
        if x.rows() != self.len() {
            return Err(Error::shape("Dataset::with_features", self.len(), x.rows()));
        }
        Ok(Dataset {
            x,
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
            norm_stats: None,
        })
    }

    /// Write features plus a trailing `label` column.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_write_err(path, e))?;
        let mut header: Vec<String> = (0..self.n_features()).map(|i| format!("f{i}")).collect();
        header.push("label".into());
        w.write_record(&header)
            .map_err(|e| csv_write_err(path, e))?;
        for (row, &label) in self.x.row_iter().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(self.class_names[label].clone());
            w.write_record(&rec).map_err(|e| csv_write_err(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn csv_write_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

/// Per-feature min and max over the rows of `x`.
pub fn minmax_fit(x: &Matrix) -> Result<NormStats> {
    if x.rows() == 0 {
        return Err(Error::invalid(
            "cannot fit min-max statistics on an empty set",
        ));
    }
    let mut min = x.row(0).to_vec();
    let mut max = min.clone();
    for row in x.row_iter().skip(1) {
        for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(row) {
            *lo = lo.min(v);
            *hi = hi.max(v);
        }
    }
    Ok(NormStats { min, max })
}

impl NormStats {
    /// `(x - min) / (max - min)` per feature. Constant features map to 0;
    /// values outside the fitted range are not clipped.
    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.min.len() {
            return Err(Error::shape("NormStats::apply", self.min.len(), row.len()));
        }
        Ok(row
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| {
                let span = hi - lo;
                if span > 0.0 {
                    (v - lo) / span
                } else {
                    0.0
                }
            })
            .collect())
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.rows() == 0 {
            return Ok(Matrix::zeros(0, self.min.len()));
        }
        let rows = x
            .row_iter()
            .map(|r| self.apply_row(r))
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(&rows)
    }
}

/// Fit min-max statistics on `train` and return the scaled copy.
pub fn minmax_fit_apply(train: &Dataset) -> Result<Dataset> {
    let stats = minmax_fit(&train.x)?;
    minmax_apply(&stats, train)
}

pub fn minmax_apply(stats: &NormStats, data: &Dataset) -> Result<Dataset> {
    Ok(Dataset {
        x: stats.apply(&data.x)?,
        labels: data.labels.clone(),
        class_names: data.class_names.clone(),
        norm_stats: Some(stats.clone()),
    })
}

/// Stratified partition of row indices. Each class with at least two
/// samples contributes `round(fraction * n_c)` rows (at least one, and
/// leaving at least one) to the second part; singleton classes stay in the
/// first part. Both index lists are ascending.
pub fn stratified_split_indices<R: Rng + ?Sized>(
    labels: &[usize],
    n_classes: usize,
    fraction: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!(
            "split fraction must be in (0, 1), got {fraction}"
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= n_classes {
            return Err(Error::invalid(format!(
                "label id {l} outside {n_classes} classes"
            )));
        }
        by_class[l].push(i);
    }
    let mut a = Vec::with_capacity(labels.len());
    let mut b = Vec::new();
    for (class, mut idx) in by_class.into_iter().enumerate() {
        match idx.len() {
            0 => {}
            1 => {
                log::warn!("class {class} has a single sample; it is kept in the first split part");
                a.extend(idx);
            }
            n => {
                idx.shuffle(rng);
                let take = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
                b.extend_from_slice(&idx[..take]);
                a.extend_from_slice(&idx[take..]);
            }
        }
    }
    a.sort_unstable();
    b.sort_unstable();
    Ok((a, b))
}

/// Split `data` into `(1 - fraction, fraction)` stratified parts.
pub fn stratified_split(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut rng = seeded_rng(seed);
    let (a, b) = stratified_split_indices(&data.labels, data.n_classes(), fraction, &mut rng)?;
    Ok((data.subset(&a), data.subset(&b)))
}

/// Parameters of [`synth_blobs`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlobConfig {
    pub classes: usize,
    pub per_class: usize,
    pub dim: usize,
    /// Distance of every class mean from the origin.
    pub radius: f64,
    /// Per-coordinate standard deviation.
    pub spread: f64,
    pub seed: u64,
}

impl BlobConfig {
    /// Means of every class: the cross-polytope vertices `+r e_0, -r e_0,
    /// +r e_1, -r e_1, ...`, then random directions once those run out.
    pub fn class_means(&self) -> Vec<Vec<f64>> {
        let mut rng = seeded_rng(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        (0..self.classes)
            .map(|c| {
                let mut m = vec![0.0; self.dim];
                if c < 2 * self.dim {
                    m[c / 2] = if c % 2 == 0 {
                        self.radius
                    } else {
                        -self.radius
                    };
                } else {
                    let dir: Vec<f64> = (0..self.dim).map(|_| normal.sample(&mut rng)).collect();
                    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                    m = dir.into_iter().map(|v| self.radius * v / norm).collect();
                }
                m
            })
            .collect()
    }
}

/// Gaussian blobs around [`BlobConfig::class_means`]. Class 0 is named
/// `normal`, the others `attack1`, `attack2`, ...
pub fn synth_blobs(cfg: &BlobConfig) -> Result<Dataset> {
    if cfg.classes < 2 {
        return Err(Error::invalid("synthetic blobs need at least 2 classes"));
    }
    if cfg.dim == 0 || cfg.per_class == 0 {
        return Err(Error::invalid(
            "synthetic blobs need dim >= 1 and per_class >= 1",
        ));
    }
    if !cfg.spread.is_finite() || cfg.spread <= 0.0 {
        return Err(Error::invalid(format!(
            "spread must be positive, got {}",
            cfg.spread
        )));
    }
    let means = cfg.class_means();
    let mut rng = seeded_rng(cfg.seed);
    let noise = Normal::new(0.0, cfg.spread).map_err(|e| Error::invalid(e.to_string()))?;
    let mut data = Vec::with_capacity(cfg.classes * cfg.per_class * cfg.dim);
    let mut labels = Vec::with_capacity(cfg.classes * cfg.per_class);
    for (c, mean) in means.iter().enumerate() {
        for _ in 0..cfg.per_class {
            data.extend(mean.iter().map(|m| m + noise.sample(&mut rng)));
            labels.push(c);
        }
    }
    let names = (0..cfg.classes)
        .map(|c| {
            if c == 0 {
                "normal".to_string()
            } else {
                format!("attack{c}")
            }
        })
        .collect();
    Dataset::new(
        Matrix::from_vec(labels.len(), cfg.dim, data)?,
        labels,
        names,
    )
}
