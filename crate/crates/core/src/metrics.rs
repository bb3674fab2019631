//! Detection metrics over a confusion matrix, and the between/within
//! class-distance ratio used to score representations.

use serde::{Deserialize, Serialize};

use crate::nn::Matrix;
use crate::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        Self {
            n_classes,
            counts: vec![0; n_classes * n_classes],
        }
    }

    pub fn from_counts(rows: &[Vec<u64>]) -> Result<Self> {
        let n = rows.len();
        let mut counts = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::shape("ConfusionMatrix::from_counts", n, r.len()));
            }
            counts.extend_from_slice(r);
        }
        Ok(Self {
            n_classes: n,
            counts,
        })
    }

    pub fn from_predictions(
        truth: &[usize],
        predicted: &[usize],
        n_classes: usize,
    ) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::shape(
                "ConfusionMatrix::from_predictions",
                truth.len(),
                predicted.len(),
            ));
        }
        let mut cm = Self::new(n_classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= n_classes || p >= n_classes {
                return Err(Error::invalid(format!(
                    "class id outside {n_classes} classes"
                )));
            }
            cm.counts[t * n_classes + p] += 1;
        }
        Ok(cm)
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    #[inline]
    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.n_classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts
            .chunks(self.n_classes.max(1))
            .map(<[u64]>::to_vec)
            .collect()
    }

    fn row_sum(&self, c: usize) -> u64 {
        (0..self.n_classes).map(|p| self.get(c, p)).sum()
    }

    fn col_sum(&self, c: usize) -> u64 {
        (0..self.n_classes).map(|t| self.get(t, c)).sum()
    }

    fn check_class(&self, c: usize) -> Result<()> {
        if c >= self.n_classes {
            return Err(Error::invalid(format!(
                "class {c} outside {} classes",
                self.n_classes
            )));
        }
        Ok(())
    }

    fn non_empty(&self) -> Result<u64> {
        match self.total() {
            0 => Err(Error::invalid("confusion matrix is empty")),
            t => Ok(t),
        }
    }
}

/// Fraction of correct predictions (trace over total).
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.non_empty()?;
    let correct: u64 = (0..cm.n_classes).map(|c| cm.get(c, c)).sum();
    Ok(correct as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Unweighted mean of per-class F1.
    Macro,
    /// F1 of one designated positive class.
    Binary { positive: usize },
}

/// F1 of class `c` treated one-vs-rest; zero when precision or recall is
/// undefined.
pub fn class_f1(cm: &ConfusionMatrix, c: usize) -> Result<f64> {
    cm.check_class(c)?;
    let tp = cm.get(c, c) as f64;
    let predicted = cm.col_sum(c) as f64;
    let actual = cm.row_sum(c) as f64;
    if predicted == 0.0 || actual == 0.0 || tp == 0.0 {
        return Ok(0.0);
    }
    let p = tp / predicted;
    let r = tp / actual;
    Ok(2.0 * p * r / (p + r))
}

pub fn f_score(cm: &ConfusionMatrix, averaging: Averaging) -> Result<f64> {
    cm.non_empty()?;
    match averaging {
        Averaging::Binary { positive } => class_f1(cm, positive),
        Averaging::Macro => {
            let mut sum = 0.0;
            for c in 0..cm.n_classes {
                sum += class_f1(cm, c)?;
            }
            Ok(sum / cm.n_classes as f64)
        }
    }
}

/// How multi-class FAR and MDR are reduced to binary rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateMode {
    /// `normal` is the negative class; any other prediction for an attack
    /// sample counts as a detection.
    NormalVsAttack { normal: usize },
    /// Mean of the per-class one-vs-rest rates.
    MacroOneVsRest,
}

/// Miss detection rate `FN / (FN + TP)`.
pub fn mdr(cm: &ConfusionMatrix, mode: RateMode) -> Result<f64> {
    match mode {
        RateMode::NormalVsAttack { normal } => {
            cm.check_class(normal)?;
            let (mut missed, mut positives) = (0u64, 0u64);
            for t in (0..cm.n_classes).filter(|&t| t != normal) {
                missed += cm.get(t, normal);
                positives += cm.row_sum(t);
            }
            if positives == 0 {
                return Err(Error::invalid("MDR needs at least one attack sample"));
            }
            Ok(missed as f64 / positives as f64)
        }
        RateMode::MacroOneVsRest => macro_rate(cm, |cm, c| {
            let actual = cm.row_sum(c);
            (actual > 0).then(|| (actual - cm.get(c, c)) as f64 / actual as f64)
        }),
    }
}

/// False alarm rate `FP / (FP + TN)`.
pub fn far(cm: &ConfusionMatrix, mode: RateMode) -> Result<f64> {
    match mode {
        RateMode::NormalVsAttack { normal } => {
            cm.check_class(normal)?;
            let negatives = cm.row_sum(normal);
            if negatives == 0 {
                return Err(Error::invalid("FAR needs at least one normal sample"));
            }
            let kept = cm.get(normal, normal);
            Ok((negatives - kept) as f64 / negatives as f64)
        }
        RateMode::MacroOneVsRest => macro_rate(cm, |cm, c| {
            let negatives = cm.total() - cm.row_sum(c);
            (negatives > 0).then(|| (cm.col_sum(c) - cm.get(c, c)) as f64 / negatives as f64)
        }),
    }
}

fn macro_rate(
    cm: &ConfusionMatrix,
    rate: impl Fn(&ConfusionMatrix, usize) -> Option<f64>,
) -> Result<f64> {
    cm.non_empty()?;
    let rates: Vec<f64> = (0..cm.n_classes).filter_map(|c| rate(cm, c)).collect();
    if rates.is_empty() {
        return Err(Error::invalid("no class has a defined rate"));
    }
    Ok(rates.iter().sum::<f64>() / rates.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// Mean distance over unordered pairs of class means.
    pub d_between: f64,
    /// Mean distance of a sample to its own class mean.
    pub d_within: f64,
    /// `d_between / d_within`; infinite when `d_within` is zero.
    pub quality: f64,
    pub within_is_zero: bool,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Between/within class-distance ratio of a representation. Classes
/// without samples are skipped; at least two must remain.
pub fn representation_quality(x: &Matrix, labels: &[usize]) -> Result<QualityReport> {
    if labels.len() != x.rows() {
        return Err(Error::shape(
            "representation_quality labels",
            x.rows(),
            labels.len(),
        ));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let d = x.cols();
    let mut sums = vec![vec![0.0; d]; n_classes];
    let mut counts = vec![0usize; n_classes];
    for (row, &l) in x.row_iter().zip(labels) {
        counts[l] += 1;
        sums[l].iter_mut().zip(row).for_each(|(s, v)| *s += v);
    }
    let means: Vec<Option<Vec<f64>>> = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &n)| (n > 0).then(|| s.into_iter().map(|v| v / n as f64).collect()))
        .collect();
    let present: Vec<&Vec<f64>> = means.iter().flatten().collect();
    if present.len() < 2 {
        return Err(Error::invalid(
            "representation quality needs at least two non-empty classes",
        ));
    }

    let mut between = 0.0;
    let mut pairs = 0usize;
    for i in 0..present.len() {
        for j in i + 1..present.len() {
            between += dist(present[i], present[j]);
            pairs += 1;
        }
    }
    let d_between = between / pairs as f64;

    let within: f64 = x
        .row_iter()
        .zip(labels)
        .map(|(row, &l)| dist(row, means[l].as_ref().expect("class has samples")))
        .sum();
    let d_within = within / x.rows() as f64;

    let within_is_zero = d_within == 0.0;
    let quality = if !within_is_zero {
        d_between / d_within
    } else if d_between > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(QualityReport {
        d_between,
        d_within,
        quality,
        within_is_zero,
    })
}
