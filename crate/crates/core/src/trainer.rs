//! Mini-batch Adam training loop with validation-based early stopping,
//! shared by the twin and plain auto-encoders.

use serde::{Deserialize, Serialize};

use crate::data::stratified_split_indices;
use crate::nn::{minibatches, AdamState, Matrix};
use crate::{Error, Result, Rng};

/// Hyper-parameters for both auto-encoder flavours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub early_stop_window: usize,
    /// Training stops once the validation loss changed by less than this
    /// over the last `early_stop_window` epochs. `0` disables the check.
    pub early_stop_threshold: f64,
    pub validation_fraction: f64,
    /// Base scale `S` of the separation operator.
    pub scale: f64,
    pub latent_dim: usize,
    /// Hidden width of every subnetwork; `None` picks
    /// [`default_hidden_width`].
    pub hidden: Option<usize>,
    pub activation: crate::nn::Activation,
    pub center_rule: crate::transform::CenterRule,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            epochs: 5000,
            batch_size: 100,
            early_stop_window: 10,
            early_stop_threshold: 1.0,
            validation_fraction: 0.30,
            scale: 0.5,
            latent_dim: 2,
            hidden: None,
            activation: crate::nn::Activation::Relu,
            center_rule: crate::transform::CenterRule::MeanOfClassMeans,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad(format!(
                "validation_fraction must be in (0, 1), got {}",
                self.validation_fraction
            ));
        }
        if self.batch_size == 0 || self.early_stop_window == 0 || self.latent_dim == 0 {
            return bad("batch_size, early_stop_window and latent_dim must be at least 1".into());
        }
        if self.hidden == Some(0) {
            return bad("hidden width must be at least 1".into());
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if self.early_stop_threshold.is_nan() || self.early_stop_threshold < 0.0 {
            return bad(format!(
                "early_stop_threshold must be >= 0, got {}",
                self.early_stop_threshold
            ));
        }
        if !self.scale.is_finite() || self.scale <= 0.0 {
            return bad(format!("scale S must be positive, got {}", self.scale));
        }
        Ok(())
    }

    pub fn hidden_width(&self, input_dim: usize) -> usize {
        self.hidden
            .unwrap_or_else(|| default_hidden_width(input_dim, self.latent_dim))
    }
}

/// `round(sqrt(2 * d_x * d_z))`, at least `d_z + 1`. Gives 15 for
/// `(24, 5)`, 20 for `(32, 6)` and 48 for `(115, 10)`.
pub fn default_hidden_width(input_dim: usize, latent_dim: usize) -> usize {
    let h = ((2 * input_dim * latent_dim) as f64).sqrt().round() as usize;
    h.max(latent_dim + 1)
}

/// Mean per-sample squared errors of every loss component.
///
/// For the plain auto-encoder only `recon_x` is populated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub recon_x: f64,
    pub recon_z_from_xhat: f64,
    pub recon_z_from_x: f64,
    pub shrink: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn from_components(
        recon_x: f64,
        recon_z_from_xhat: f64,
        recon_z_from_x: f64,
        shrink: f64,
    ) -> Self {
        Self {
            recon_x,
            recon_z_from_xhat,
            recon_z_from_x,
            shrink,
            total: recon_x + recon_z_from_xhat + recon_z_from_x + shrink,
        }
    }

    pub(crate) fn add_assign(&mut self, o: &LossBreakdown) {
        self.recon_x += o.recon_x;
        self.recon_z_from_xhat += o.recon_z_from_xhat;
        self.recon_z_from_x += o.recon_z_from_x;
        self.shrink += o.shrink;
        self.total += o.total;
    }

    pub(crate) fn scaled(mut self, k: f64) -> Self {
        self.recon_x *= k;
        self.recon_z_from_xhat *= k;
        self.recon_z_from_x *= k;
        self.shrink *= k;
        self.total *= k;
        self
    }

    pub fn is_finite(&self) -> bool {
        [
            self.recon_x,
            self.recon_z_from_xhat,
            self.recon_z_from_x,
            self.shrink,
            self.total,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    pub fn components(&self) -> [f64; 4] {
        [
            self.recon_x,
            self.recon_z_from_xhat,
            self.recon_z_from_x,
            self.shrink,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train: LossBreakdown,
    pub validation: LossBreakdown,
}

/// Why training ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    EpochLimit,
    EarlyStop,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<M> {
    /// Snapshot with the lowest validation loss (the initial model counts).
    pub model: M,
    pub history: Vec<EpochRecord>,
    /// Epoch of the returned snapshot; 0 means the untrained model.
    pub best_epoch: usize,
    pub stop: StopReason,
}

/// A model the trainer can optimize.
pub trait Trainable: Clone {
    fn param_sizes(&self) -> Vec<usize>;

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]>;

    /// Mean loss and its gradient over the rows `idx`, gradient buffers in
    /// [`Trainable::param_slices_mut`] order.
    fn batch_gradients(
        &self,
        x: &Matrix,
        labels: &[usize],
        idx: &[usize],
    ) -> Result<(Vec<Vec<f64>>, LossBreakdown)>;

    /// Mean loss over all rows.
    fn evaluate(&self, x: &Matrix, labels: &[usize]) -> Result<LossBreakdown>;
}

/// Row indices `(train, validation)` used by [`fit`].
pub fn validation_split(
    labels: &[usize],
    n_classes: usize,
    config: &TrainConfig,
    rng: &mut Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    stratified_split_indices(labels, n_classes, config.validation_fraction, rng)
}

fn check_finite(epoch: usize, split: &str, loss: &LossBreakdown) -> Result<()> {
    if loss.is_finite() {
        return Ok(());
    }
    Err(Error::Training(format!(
        "non-finite {split} loss at epoch {epoch}: recon_x={}, recon_z_from_xhat={}, recon_z_from_x={}, shrink={}",
        loss.recon_x, loss.recon_z_from_xhat, loss.recon_z_from_x, loss.shrink
    )))
}

/// Run mini-batch Adam on `model` over the `train` rows, monitoring the
/// `val` rows. `rng` drives batch shuffling only.
pub fn fit<M: Trainable>(
    mut model: M,
    x: &Matrix,
    labels: &[usize],
    train: &[usize],
    val: &[usize],
    config: &TrainConfig,
    rng: &mut Rng,
) -> Result<TrainOutcome<M>> {
    let history_len = config.epochs.min(1 << 16);
    let mut history = Vec::with_capacity(history_len);
    if config.epochs == 0 {
        return Ok(TrainOutcome {
            model,
            history,
            best_epoch: 0,
            stop: StopReason::EpochLimit,
        });
    }
    if train.is_empty() {
        return Err(Error::invalid(
            "no training rows left after the validation split",
        ));
    }
    let val_x = x.select_rows(val);
    let val_labels: Vec<usize> = val.iter().map(|&i| labels[i]).collect();
    let train_x = x.select_rows(train);
    let train_labels: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
    // An empty validation split falls back to the training rows.
    let (mon_x, mon_labels) = if val.is_empty() {
        (&train_x, &train_labels)
    } else {
        (&val_x, &val_labels)
    };

    let initial = model.evaluate(mon_x, mon_labels)?;
    check_finite(0, "validation", &initial)?;
    let mut val_totals = vec![initial.total];
    let mut best = (initial.total, 0usize, model.clone());

    let mut adam = AdamState::new(config.learning_rate, &model.param_sizes());
    let mut stop = StopReason::EpochLimit;
    for epoch in 1..=config.epochs {
        for batch in minibatches(train_x.rows(), config.batch_size, rng)? {
            let (grads, loss) = model.batch_gradients(&train_x, &train_labels, &batch)?;
            check_finite(epoch, "batch", &loss)?;
            let grad_refs: Vec<&[f64]> = grads.iter().map(Vec::as_slice).collect();
            adam.step(model.param_slices_mut(), grad_refs)
                .map_err(|e| Error::Training(format!("epoch {epoch}: {e}")))?;
        }
        let train_loss = model.evaluate(&train_x, &train_labels)?;
        let val_loss = model.evaluate(mon_x, mon_labels)?;
        check_finite(epoch, "training", &train_loss)?;
        check_finite(epoch, "validation", &val_loss)?;
        history.push(EpochRecord {
            epoch,
            train: train_loss,
            validation: val_loss,
        });
        log::debug!(
            "epoch {epoch}: train {:.6} val {:.6}",
            train_loss.total,
            val_loss.total
        );

        if val_loss.total < best.0 {
            best = (val_loss.total, epoch, model.clone());
        }
        val_totals.push(val_loss.total);
        if epoch >= config.early_stop_window {
            let delta = (val_totals[epoch] - val_totals[epoch - config.early_stop_window]).abs();
            if delta < config.early_stop_threshold {
                log::info!(
                    "early stop at epoch {epoch}: validation loss moved {delta:.6} in {} epochs",
                    config.early_stop_window
                );
                stop = StopReason::EarlyStop;
                break;
            }
        }
    }
    Ok(TrainOutcome {
        model: best.2,
        history,
        best_epoch: best.1,
        stop,
    })
}
