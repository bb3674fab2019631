//! Experiment orchestration behind the command-line verbs: train, eval,
//! transform, sweep and synth.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ae::train_ae;
use crate::data::{self, minmax_fit, BlobConfig, Dataset, LabelColumn};
use crate::metrics::{
    self, accuracy, f_score, representation_quality, Averaging, ConfusionMatrix, QualityReport,
    RateMode,
};
use crate::model_file::{AnyModel, ModelKind, SavedModel};
use crate::nn::{Activation, Matrix};
use crate::tae::train_tae;
use crate::trainer::{EpochRecord, StopReason, TrainConfig};
use crate::transform::CenterRule;
use crate::tree::{fit_tree, DecisionTree, TreeParams};
use crate::{seeded_rng, Error, Result};

pub const REPORT_SCHEMA: &str = "tae-eval-report";
pub const SWEEP_SCHEMA: &str = "tae-sweep-report";
pub const SCHEMA_VERSION: u32 = 1;

/// Feature set handed to the downstream classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    Raw,
    AeLatent,
    TaeLatent,
    TaeReconstruction,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Raw => "raw",
            Representation::AeLatent => "ae-latent",
            Representation::TaeLatent => "tae-latent",
            Representation::TaeReconstruction => "tae-reconstruction",
        }
    }

    /// Model kind that produces this representation.
    pub fn model_kind(self) -> Option<ModelKind> {
        match self {
            Representation::Raw => None,
            Representation::AeLatent => Some(ModelKind::Ae),
            Representation::TaeLatent | Representation::TaeReconstruction => Some(ModelKind::Tae),
        }
    }

    /// The natural representation of a trained model.
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Tae => Representation::TaeReconstruction,
            ModelKind::Ae => Representation::AeLatent,
        }
    }
}

impl std::str::FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Representation::Raw),
            "ae-latent" => Ok(Representation::AeLatent),
            "tae-latent" => Ok(Representation::TaeLatent),
            "tae-reconstruction" => Ok(Representation::TaeReconstruction),
            other => Err(Error::invalid(format!(
                "unknown representation `{other}` (expected raw, ae-latent, tae-latent or tae-reconstruction)"
            ))),
        }
    }
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Map already-normalized rows to the chosen representation.
pub fn represent(model: Option<&SavedModel>, repr: Representation, x: &Matrix) -> Result<Matrix> {
    let need = |kind: ModelKind| -> Result<&AnyModel> {
        let m = model.ok_or_else(|| {
            Error::invalid(format!("representation `{repr}` needs a trained model"))
        })?;
        if m.model.kind() != kind {
            return Err(Error::invalid(format!(
                "representation `{repr}` needs a {kind:?} model, got {:?}",
                m.model.kind()
            )));
        }
        if x.cols() != m.model.input_dim() && x.rows() > 0 {
            return Err(Error::invalid(format!(
                "data has {} features but the model expects {}",
                x.cols(),
                m.model.input_dim()
            )));
        }
        Ok(&m.model)
    };
    match repr {
        Representation::Raw => Ok(x.clone()),
        Representation::AeLatent => match need(ModelKind::Ae)? {
            AnyModel::Ae(m) => m.encode_rows(x),
            AnyModel::Tae(_) => unreachable!(),
        },
        Representation::TaeLatent => match need(ModelKind::Tae)? {
            AnyModel::Tae(m) => m.latent_rows(x),
            AnyModel::Ae(_) => unreachable!(),
        },
        Representation::TaeReconstruction => match need(ModelKind::Tae)? {
            AnyModel::Tae(m) => m.infer_rows(x),
            AnyModel::Ae(_) => unreachable!(),
        },
    }
}

/// Min-max normalize `train`, train a model of `kind` and bundle it with
/// the statistics.
pub fn fit_model(
    kind: ModelKind,
    train: &Dataset,
    config: &TrainConfig,
) -> Result<(SavedModel, Vec<EpochRecord>, usize, StopReason)> {
    let stats = minmax_fit(&train.x)?;
    let scaled = data::minmax_apply(&stats, train)?;
    let (model, history, best, stop) = match kind {
        ModelKind::Tae => {
            let t = train_tae(&scaled, config)?;
            (AnyModel::Tae(t.model), t.history, t.best_epoch, t.stop)
        }
        ModelKind::Ae => {
            let t = train_ae(&scaled, config)?;
            (AnyModel::Ae(t.model), t.history, t.best_epoch, t.stop)
        }
    };
    Ok((
        SavedModel {
            model,
            class_names: train.class_names.clone(),
            normalization: Some(stats),
        },
        history,
        best,
        stop,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthScore {
    pub max_depth: usize,
    pub validation_accuracy: f64,
}

/// Fit one tree per depth on `train`, keep the best on `val` (ties go to
/// the earlier grid entry).
pub fn select_tree(
    train_x: &Matrix,
    train_labels: &[usize],
    val_x: &Matrix,
    val_labels: &[usize],
    n_classes: usize,
    depths: &[usize],
) -> Result<(DecisionTree, usize, Vec<DepthScore>)> {
    if depths.is_empty() {
        return Err(Error::invalid("the max_depth grid is empty"));
    }
    let mut best: Option<(f64, usize, DecisionTree)> = None;
    let mut scores = Vec::with_capacity(depths.len());
    for &depth in depths {
        let tree = fit_tree(
            train_x,
            train_labels,
            n_classes,
            TreeParams {
                max_depth: depth,
                min_leaf: 1,
            },
        )?;
        let acc = if val_x.rows() == 0 {
            0.0
        } else {
            let pred = tree.predict_rows(val_x)?;
            accuracy(&ConfusionMatrix::from_predictions(
                val_labels, &pred, n_classes,
            )?)?
        };
        scores.push(DepthScore {
            max_depth: depth,
            validation_accuracy: acc,
        });
        if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
            best = Some((acc, depth, tree));
        }
    }
    let (_, depth, tree) = best.expect("non-empty grid");
    Ok((tree, depth, scores))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSettings {
    pub max_depths: Vec<usize>,
    pub validation_fraction: f64,
    pub seed: u64,
    /// Negative class for FAR and MDR.
    pub normal_class: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: String,
    pub schema_version: u32,
    pub representation: Representation,
    pub class_names: Vec<String>,
    pub normal_class: String,
    pub n_train: usize,
    pub n_test: usize,
    pub depth_scores: Vec<DepthScore>,
    pub max_depth: usize,
    pub accuracy: f64,
    pub f_score_macro: f64,
    /// `None` when the test set lacks normal samples.
    pub far: Option<f64>,
    /// `None` when the test set lacks attack samples.
    pub mdr: Option<f64>,
    pub confusion: Vec<Vec<u64>>,
    pub quality_raw: QualityReport,
    pub quality_representation: QualityReport,
}

/// Fit the decision-tree grid on the representation of `train` and score
/// it on `test`. Both sets are raw; they are normalized with the model's
/// statistics, or with statistics fitted on `train` when there is no model.
pub fn evaluate(
    model: Option<&SavedModel>,
    repr: Representation,
    train: &Dataset,
    test: &Dataset,
    settings: &EvalSettings,
) -> Result<EvalReport> {
    if train.n_features() != test.n_features() && !test.is_empty() {
        return Err(Error::invalid(format!(
            "train has {} features, test has {}",
            train.n_features(),
            test.n_features()
        )));
    }
    if test.is_empty() {
        return Err(Error::invalid("the test set is empty"));
    }
    let stats = match model.and_then(|m| m.normalization.clone()) {
        Some(s) => s,
        None => minmax_fit(&train.x)?,
    };
    let train_n = stats.apply(&train.x)?;
    let test_n = stats.apply(&test.x)?;
    let train_r = represent(model, repr, &train_n)?;
    let test_r = represent(model, repr, &test_n)?;

    let n_classes = train.n_classes().max(test.n_classes());
    let mut rng = seeded_rng(settings.seed);
    let (fit_idx, val_idx) = data::stratified_split_indices(
        &train.labels,
        n_classes,
        settings.validation_fraction,
        &mut rng,
    )?;
    let pick = |idx: &[usize]| -> (Matrix, Vec<usize>) {
        (
            train_r.select_rows(idx),
            idx.iter().map(|&i| train.labels[i]).collect(),
        )
    };
    let (fx, fy) = pick(&fit_idx);
    let (vx, vy) = pick(&val_idx);
    let (tree, max_depth, depth_scores) =
        select_tree(&fx, &fy, &vx, &vy, n_classes, &settings.max_depths)?;

    let pred = tree.predict_rows(&test_r)?;
    let cm = ConfusionMatrix::from_predictions(&test.labels, &pred, n_classes)?;
    let mode = RateMode::NormalVsAttack {
        normal: settings.normal_class,
    };
    let mut class_names = train.class_names.clone();
    if test.class_names.len() > class_names.len() {
        class_names = test.class_names.clone();
    }
    Ok(EvalReport {
        schema: REPORT_SCHEMA.into(),
        schema_version: SCHEMA_VERSION,
        representation: repr,
        normal_class: class_names
            .get(settings.normal_class)
            .cloned()
            .unwrap_or_default(),
        class_names,
        n_train: train.len(),
        n_test: test.len(),
        depth_scores,
        max_depth,
        accuracy: accuracy(&cm)?,
        f_score_macro: f_score(&cm, Averaging::Macro)?,
        far: metrics::far(&cm, mode).ok(),
        mdr: metrics::mdr(&cm, mode).ok(),
        confusion: cm.rows(),
        quality_raw: representation_quality(&test_n, &test.labels)?,
        quality_representation: representation_quality(&test_r, &test.labels)?,
    })
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
        let mut s = String::new();
        let _ = writeln!(s, "representation      {}", self.representation);
        let _ = writeln!(s, "train / test rows   {} / {}", self.n_train, self.n_test);
        let _ = writeln!(s, "tree max_depth      {}", self.max_depth);
        let _ = writeln!(s, "accuracy            {:.4}", self.accuracy);
        let _ = writeln!(s, "f-score (macro)     {:.4}", self.f_score_macro);
        let _ = writeln!(s, "FAR (normal={})  {}", self.normal_class, opt(self.far));
        let _ = writeln!(s, "MDR                 {}", opt(self.mdr));
        let _ = writeln!(
            s,
            "quality raw         {:.4} (between {:.4}, within {:.4})",
            self.quality_raw.quality, self.quality_raw.d_between, self.quality_raw.d_within
        );
        let _ = writeln!(
            s,
            "quality repr        {:.4} (between {:.4}, within {:.4})",
            self.quality_representation.quality,
            self.quality_representation.d_between,
            self.quality_representation.d_within
        );
        let _ = writeln!(s, "\nconfusion (rows = true, cols = predicted)");
        let width = self
            .class_names
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(4)
            .max(6);
        let _ = write!(s, "{:>width$}", "");
        for name in &self.class_names {
            let _ = write!(s, " {name:>width$}");
        }
        let _ = writeln!(s);
        for (name, row) in self.class_names.iter().zip(&self.confusion) {
            let _ = write!(s, "{name:>width$}");
            for c in row {
                let _ = write!(s, " {c:>width$}");
            }
            let _ = writeln!(s);
        }
        s
    }
}

/// Flat key-value run configuration (TOML syntax).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// Column name, or a zero-based index when it parses as an integer.
    pub label_column: String,
    pub header: bool,
    /// Name of the negative class for FAR/MDR; defaults to the first class.
    pub normal_class: Option<String>,
    /// Held out from `train` when no `test` file is given.
    pub test_fraction: f64,
    pub representation: Representation,
    pub out: PathBuf,
    pub seed: u64,

    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub early_stop_window: usize,
    pub early_stop_threshold: f64,
    pub validation_fraction: f64,
    pub scale: f64,
    pub latent_dim: usize,
    pub hidden: Option<usize>,
    pub activation: Activation,
    pub center_rule: CenterRule,

    pub max_depth: Vec<usize>,
    pub scale_grid: Vec<f64>,
    pub latent_grid: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            train: None,
            test: None,
            label_column: "label".into(),
            header: true,
            normal_class: None,
            test_fraction: 0.3,
            representation: Representation::TaeReconstruction,
            out: PathBuf::from("out"),
            seed: t.seed,
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            batch_size: t.batch_size,
            early_stop_window: t.early_stop_window,
            early_stop_threshold: t.early_stop_threshold,
            validation_fraction: t.validation_fraction,
            scale: t.scale,
            latent_dim: t.latent_dim,
            hidden: t.hidden,
            activation: t.activation,
            center_rule: t.center_rule,
            max_depth: vec![5, 10, 20, 50, 100],
            scale_grid: vec![
                0.0001, 0.01, 0.1, 0.2, 0.5, 1.0, 5.0, 10.0, 20.0, 40.0, 80.0,
            ],
            latent_grid: vec![1, 2, 5, 10, 15, 20, 30, 40],
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            early_stop_window: self.early_stop_window,
            early_stop_threshold: self.early_stop_threshold,
            validation_fraction: self.validation_fraction,
            scale: self.scale,
            latent_dim: self.latent_dim,
            hidden: self.hidden,
            activation: self.activation,
            center_rule: self.center_rule,
            seed: self.seed,
        }
    }

    pub fn label(&self) -> LabelColumn {
        self.label_column.parse().expect("infallible")
    }

    pub fn validate(&self) -> Result<()> {
        self.train_config().validate()?;
        if self.max_depth.is_empty() {
            return Err(Error::Config("max_depth grid must not be empty".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test_fraction must be in (0, 1), got {}",
                self.test_fraction
            )));
        }
        Ok(())
    }

    /// Train and test sets. Without a `test` file a stratified
    /// `test_fraction` of `train` is held out.
    pub fn load_data(&self) -> Result<(Dataset, Dataset)> {
        let train_path = self
            .train
            .as_ref()
            .ok_or_else(|| Error::Config("no training file given (`train`)".into()))?;
        let label = self.label();
        let full = data::load_csv(train_path, &label, self.header)?;
        match &self.test {
            Some(test_path) => {
                let test = data::load_csv_with_catalogue(
                    test_path,
                    &label,
                    self.header,
                    &full.class_names,
                )?;
                Ok((full, test))
            }
            None => {
                let mut rng = seeded_rng(self.seed ^ 0x7465_7374);
                let (a, b) = data::stratified_split_indices(
                    &full.labels,
                    full.n_classes(),
                    self.test_fraction,
                    &mut rng,
                )?;
                Ok((full.subset(&a), full.subset(&b)))
            }
        }
    }

    pub fn eval_settings(&self, class_names: &[String]) -> Result<EvalSettings> {
        let normal_class = match &self.normal_class {
            None => 0,
            Some(name) => class_names.iter().position(|c| c == name).ok_or_else(|| {
                Error::Config(format!("normal_class `{name}` is not a known class"))
            })?,
        };
        Ok(EvalSettings {
            max_depths: self.max_depth.clone(),
            validation_fraction: self.validation_fraction,
            seed: self.seed,
            normal_class,
        })
    }

    pub fn model_kind(&self) -> ModelKind {
        self.representation.model_kind().unwrap_or(ModelKind::Tae)
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut s = String::from(
        "epoch,train_recon_x,train_recon_z_from_xhat,train_recon_z_from_x,train_shrink,train_total,\
val_recon_x,val_recon_z_from_xhat,val_recon_z_from_x,val_shrink,val_total\n",
    );
    for r in history {
        let _ = write!(s, "{}", r.epoch);
        for b in [&r.train, &r.validation] {
            for v in b.components().iter().chain(std::iter::once(&b.total)) {
                let _ = write!(s, ",{v}");
            }
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub model_path: PathBuf,
    pub history_path: PathBuf,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub stop: StopReason,
}

/// `train`: writes `model.json` and `history.csv` into `config.out`.
pub fn cmd_train(config: &RunConfig) -> Result<TrainSummary> {
    config.validate()?;
    let (train, _test) = config.load_data()?;
    let (model, history, best_epoch, stop) =
        fit_model(config.model_kind(), &train, &config.train_config())?;
    create_dir(&config.out)?;
    let model_path = config.out.join("model.json");
    let history_path = config.out.join("history.csv");
    model.save(&model_path)?;
    write_file(&history_path, &history_csv(&history))?;
    Ok(TrainSummary {
        model_path,
        history_path,
        epochs_run: history.len(),
        best_epoch,
        stop,
    })
}

/// `eval`: writes `report.json` and `report.txt` into `config.out`.
pub fn cmd_eval(config: &RunConfig, model_path: Option<&Path>) -> Result<EvalReport> {
    config.validate()?;
    let (train, test) = config.load_data()?;
    let model = match model_path {
        Some(p) => Some(SavedModel::load(p)?),
        None => None,
    };
    if let Some(m) = &model {
        if m.model.input_dim() != train.n_features() {
            return Err(Error::invalid(format!(
                "model expects {} features, data has {}",
                m.model.input_dim(),
                train.n_features()
            )));
        }
    }
    let settings = config.eval_settings(&train.class_names)?;
    let report = evaluate(
        model.as_ref(),
        config.representation,
        &train,
        &test,
        &settings,
    )?;
    create_dir(&config.out)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?;
    write_file(&config.out.join("report.json"), &(json + "\n"))?;
    write_file(&config.out.join("report.txt"), &report.to_text())?;
    Ok(report)
}

/// `transform`: one output row of representation values per input row.
/// Returns the number of rows written.
pub fn cmd_transform(
    model_path: &Path,
    input: &Path,
    output: &Path,
    label: Option<&LabelColumn>,
    header: bool,
    repr: Option<Representation>,
) -> Result<usize> {
    let model = SavedModel::load(model_path)?;
    let repr = repr.unwrap_or_else(|| Representation::default_for(model.model.kind()));
    let table = data::read_csv(input, label, header)?;
    let width = match repr {
        Representation::Raw => model.model.input_dim(),
        _ => model.model.latent_dim(),
    };
    let rows = table.features.rows();
    let out = if rows == 0 {
        Matrix::zeros(0, width)
    } else {
        if table.features.cols() != model.model.input_dim() {
            return Err(Error::invalid(format!(
                "{}: {} feature columns, model expects {}",
                input.display(),
                table.features.cols(),
                model.model.input_dim()
            )));
        }
        represent(Some(&model), repr, &model.normalize(&table.features)?)?
    };
    let mut s = (0..width)
        .map(|i| format!("z{i}"))
        .collect::<Vec<_>>()
        .join(",");
    s.push('\n');
    for row in out.row_iter() {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    write_file(output, &s)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scale: f64,
    pub latent_dim: usize,
    pub accuracy: Option<f64>,
    pub f_score_macro: Option<f64>,
    pub error: Option<String>,
}

/// Train and evaluate one TAE per `(scale, latent_dim)` cell. Failing cells
/// are recorded, not fatal. Rows come back sorted by `(scale, latent_dim)`.
pub fn sweep(
    train: &Dataset,
    test: &Dataset,
    base: &TrainConfig,
    repr: Representation,
    settings: &EvalSettings,
    scales: &[f64],
    latents: &[usize],
) -> Result<Vec<SweepRow>> {
    if repr.model_kind() != Some(ModelKind::Tae) {
        return Err(Error::invalid(format!(
            "sweeps need a TAE representation, got `{repr}`"
        )));
    }
    if scales.is_empty() || latents.is_empty() {
        return Err(Error::invalid("sweep grids must not be empty"));
    }
    let cells: Vec<(f64, usize)> = scales
        .iter()
        .flat_map(|&s| latents.iter().map(move |&d| (s, d)))
        .collect();
    let mut rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(scale, latent_dim)| {
            let cfg = TrainConfig {
                scale,
                latent_dim,
                ..base.clone()
            };
            let outcome = fit_model(ModelKind::Tae, train, &cfg)
                .and_then(|(model, ..)| evaluate(Some(&model), repr, train, test, settings));
            match outcome {
                Ok(r) => SweepRow {
                    scale,
                    latent_dim,
                    accuracy: Some(r.accuracy),
                    f_score_macro: Some(r.f_score_macro),
                    error: None,
                },
                Err(e) => {
                    log::warn!("sweep cell S={scale}, D_z={latent_dim} failed: {e}");
                    SweepRow {
                        scale,
                        latent_dim,
                        accuracy: None,
                        f_score_macro: None,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.scale
            .total_cmp(&b.scale)
            .then(a.latent_dim.cmp(&b.latent_dim))
    });
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema: String,
    pub schema_version: u32,
    pub representation: Representation,
    pub rows: Vec<SweepRow>,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("scale,latent_dim,accuracy,f_score_macro,error\n");
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        let err = r.error.as_deref().unwrap_or("").replace('"', "'");
        let _ = writeln!(
            s,
            "{},{},{},{},\"{}\"",
            r.scale,
            r.latent_dim,
            opt(r.accuracy),
            opt(r.f_score_macro),
            err
        );
    }
    s
}

/// `sweep`: writes `sweep.csv` and `sweep.json` into `config.out`.
pub fn cmd_sweep(config: &RunConfig) -> Result<SweepReport> {
    config.validate()?;
    let (train, test) = config.load_data()?;
    let settings = config.eval_settings(&train.class_names)?;
    let rows = sweep(
        &train,
        &test,
        &config.train_config(),
        config.representation,
        &settings,
        &config.scale_grid,
        &config.latent_grid,
    )?;
    let report = SweepReport {
        schema: SWEEP_SCHEMA.into(),
        schema_version: SCHEMA_VERSION,
        representation: config.representation,
        rows,
    };
    create_dir(&config.out)?;
    write_file(&config.out.join("sweep.csv"), &sweep_csv(&report.rows))?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?;
    write_file(&config.out.join("sweep.json"), &(json + "\n"))?;
    Ok(report)
}

/// `synth`: write overlapping Gaussian blobs as a labeled CSV.
pub fn cmd_synth(cfg: &BlobConfig, path: &Path) -> Result<Dataset> {
    let data = data::synth_blobs(cfg)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    data.write_csv(path)?;
    Ok(data)
}
