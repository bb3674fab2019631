//! Twin auto-encoder: encoder `x -> e`, separation `z = e + v[class]`,
//! hermaphrodite `z -> x_hat`, decoder `x_hat -> z_hat` (and `x -> z_hat`).
//!
//! Training minimizes, per sample,
//!
//! ```text
//! |x - x_hat|^2 + |z - dec(x_hat)|^2 + |z - dec(x)|^2 + |e - mu[class]|^2
//! ```
//!
//! averaged over the batch. At inference the decoder is applied to the raw
//! sample; no label is needed.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::nn::{Activation, Forward, Matrix, Mlp, MlpGrads};
use crate::pca::fit_pca;
use crate::trainer::{self, EpochRecord, LossBreakdown, TrainConfig, TrainOutcome, Trainable};
use crate::transform::{CenterRule, TransformPlan};
use crate::{seeded_rng, Error, Result, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaeModel {
    pub encoder: Mlp,
    pub hermaphrodite: Mlp,
    pub decoder: Mlp,
    pub plan: Option<TransformPlan>,
    pub input_dim: usize,
    pub latent_dim: usize,
}

/// Cached activations of one sample through all three subnetworks.
#[derive(Debug, Clone)]
pub struct TaeForward {
    pub encoder: Forward,
    pub z: Vec<f64>,
    pub hermaphrodite: Forward,
    pub decoder_from_xhat: Forward,
    pub decoder_from_x: Forward,
    pub class_id: usize,
}

impl TaeForward {
    pub fn x(&self) -> &[f64] {
        self.encoder.input()
    }
    pub fn e(&self) -> &[f64] {
        self.encoder.output()
    }
    pub fn x_hat(&self) -> &[f64] {
        self.hermaphrodite.output()
    }
    pub fn z_hat_from_xhat(&self) -> &[f64] {
        self.decoder_from_xhat.output()
    }
    pub fn z_hat_from_x(&self) -> &[f64] {
        self.decoder_from_x.output()
    }
}

#[derive(Debug, Clone)]
pub struct TaeGrads {
    pub encoder: MlpGrads,
    pub hermaphrodite: MlpGrads,
    pub decoder: MlpGrads,
}

impl TaeGrads {
    pub fn zeros_like(model: &TaeModel) -> Self {
        Self {
            encoder: MlpGrads::zeros_like(&model.encoder),
            hermaphrodite: MlpGrads::zeros_like(&model.hermaphrodite),
            decoder: MlpGrads::zeros_like(&model.decoder),
        }
    }

    /// Flat buffers in [`TaeModel`] parameter order.
    pub fn into_buffers(self) -> Vec<Vec<f64>> {
        [self.encoder, self.hermaphrodite, self.decoder]
            .into_iter()
            .flat_map(|g| g.layers.into_iter().flat_map(|l| [l.weights, l.bias]))
            .collect()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `k * (a - b)` element-wise.
fn scaled_diff(a: &[f64], b: &[f64], k: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| k * (x - y)).collect()
}

/// Construct an untrained model with one hidden layer per subnetwork.
pub fn build_tae(input_dim: usize, config: &TrainConfig, rng: &mut Rng) -> Result<TaeModel> {
    let dz = config.latent_dim;
    if input_dim == 0 || dz == 0 {
        return Err(Error::invalid(
            "input and latent dimensions must be at least 1",
        ));
    }
    if dz > input_dim {
        return Err(Error::invalid(format!(
            "latent dimension {dz} cannot exceed the input dimension {input_dim} (PCA limit)"
        )));
    }
    let h = config.hidden_width(input_dim);
    let act = config.activation;
    let encoder = Mlp::glorot(&[input_dim, h, dz], act, Activation::Identity, rng)?;
    let hermaphrodite = Mlp::glorot(&[dz, h, input_dim], act, Activation::Identity, rng)?;
    let decoder = Mlp::glorot(&[input_dim, h, dz], act, Activation::Identity, rng)?;
    Ok(TaeModel {
        encoder,
        hermaphrodite,
        decoder,
        plan: None,
        input_dim,
        latent_dim: dz,
    })
}

/// Mean of the per-sample loss components over `forwards`.
pub fn tae_loss(plan: &TransformPlan, forwards: &[TaeForward]) -> Result<LossBreakdown> {
    if forwards.is_empty() {
        return Err(Error::invalid("loss of an empty batch"));
    }
    let mut acc = LossBreakdown::default();
    for f in forwards {
        acc.add_assign(&sample_loss(plan, f)?);
    }
    Ok(acc.scaled(1.0 / forwards.len() as f64))
}

fn sample_loss(plan: &TransformPlan, f: &TaeForward) -> Result<LossBreakdown> {
    let mu = plan.class_mean(f.class_id)?;
    Ok(LossBreakdown::from_components(
        sq_dist(f.x(), f.x_hat()),
        sq_dist(&f.z, f.z_hat_from_xhat()),
        sq_dist(&f.z, f.z_hat_from_x()),
        sq_dist(f.e(), mu),
    ))
}

impl TaeModel {
    pub fn plan(&self) -> Result<&TransformPlan> {
        self.plan
            .as_ref()
            .ok_or_else(|| Error::Contract("transform plan not fitted".into()))
    }

    pub fn hidden_widths(&self) -> [usize; 3] {
        [
            self.encoder.widths()[1],
            self.hermaphrodite.widths()[1],
            self.decoder.widths()[1],
        ]
    }

    /// Fit PCA with `latent_dim` components on `x` and derive the frozen
    /// separation plan from the projected class means.
    pub fn fit_plan(
        &mut self,
        x: &Matrix,
        labels: &[usize],
        class_ids: &[usize],
        scale: f64,
        rule: CenterRule,
    ) -> Result<&TransformPlan> {
        if x.cols() != self.input_dim {
            return Err(Error::shape("TaeModel::fit_plan", self.input_dim, x.cols()));
        }
        let pca = fit_pca(x, self.latent_dim)?;
        let xr = pca.project_rows(x)?;
        self.plan = Some(TransformPlan::fit(&xr, labels, class_ids, scale, rule)?);
        self.plan()
    }

    pub fn forward(&self, x: &[f64], class_id: usize) -> Result<TaeForward> {
        let plan = self.plan()?;
        let encoder = self.encoder.forward(x)?;
        let z = plan.apply(encoder.output(), class_id)?;
        let hermaphrodite = self.hermaphrodite.forward(&z)?;
        let decoder_from_xhat = self.decoder.forward(hermaphrodite.output())?;
        let decoder_from_x = self.decoder.forward(x)?;
        Ok(TaeForward {
            encoder,
            z,
            hermaphrodite,
            decoder_from_xhat,
            decoder_from_x,
            class_id,
        })
    }

    /// Add `weight * dL/dθ` of one sample's loss into `grads`.
    pub fn accumulate_gradients(
        &self,
        f: &TaeForward,
        weight: f64,
        grads: &mut TaeGrads,
    ) -> Result<LossBreakdown> {
        let plan = self.plan()?;
        let mu = plan.class_mean(f.class_id)?;
        let two_w = 2.0 * weight;

        let g_zh_xhat = scaled_diff(f.z_hat_from_xhat(), &f.z, two_w);
        let g_zh_x = scaled_diff(f.z_hat_from_x(), &f.z, two_w);

        self.decoder
            .backward(&f.decoder_from_x, &g_zh_x, &mut grads.decoder)?;
        let g_xhat_dec =
            self.decoder
                .backward(&f.decoder_from_xhat, &g_zh_xhat, &mut grads.decoder)?;

        let mut g_xhat = scaled_diff(f.x_hat(), f.x(), two_w);
        g_xhat
            .iter_mut()
            .zip(&g_xhat_dec)
            .for_each(|(a, b)| *a += b);
        let g_z_herm =
            self.hermaphrodite
                .backward(&f.hermaphrodite, &g_xhat, &mut grads.hermaphrodite)?;

        // z = e + v, so dL/de collects every path through z plus the shrink term.
        let g_e: Vec<f64> = (0..self.latent_dim)
            .map(|i| g_z_herm[i] - g_zh_xhat[i] - g_zh_x[i] + two_w * (f.e()[i] - mu[i]))
            .collect();
        self.encoder
            .backward(&f.encoder, &g_e, &mut grads.encoder)?;
        sample_loss(plan, f)
    }

    /// Decoder output for a raw sample: the representation handed to
    /// downstream classifiers. Never touches the transform plan.
    pub fn infer_representation(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.decoder.predict(x)
    }

    /// Encoder output `e`.
    pub fn latent(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.encoder.predict(x)
    }

    pub fn infer_rows(&self, x: &Matrix) -> Result<Matrix> {
        map_rows(x, self.latent_dim, |r| self.infer_representation(r))
    }

    pub fn latent_rows(&self, x: &Matrix) -> Result<Matrix> {
        map_rows(x, self.latent_dim, |r| self.latent(r))
    }
}

pub(crate) fn map_rows(
    x: &Matrix,
    out_dim: usize,
    f: impl Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<Matrix> {
    let mut data = Vec::with_capacity(x.rows() * out_dim);
    for row in x.row_iter() {
        data.extend(f(row)?);
    }
    Matrix::from_vec(x.rows(), out_dim, data)
}

impl Trainable for TaeModel {
    fn param_sizes(&self) -> Vec<usize> {
        let mut s = self.encoder.param_sizes();
        s.extend(self.hermaphrodite.param_sizes());
        s.extend(self.decoder.param_sizes());
        s
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let TaeModel {
            encoder,
            hermaphrodite,
            decoder,
            ..
        } = self;
        let mut p = encoder.param_slices_mut();
        p.extend(hermaphrodite.param_slices_mut());
        p.extend(decoder.param_slices_mut());
        p
    }

    fn batch_gradients(
        &self,
        x: &Matrix,
        labels: &[usize],
        idx: &[usize],
    ) -> Result<(Vec<Vec<f64>>, LossBreakdown)> {
        if idx.is_empty() {
            return Err(Error::invalid("gradient of an empty batch"));
        }
        let w = 1.0 / idx.len() as f64;
        let mut grads = TaeGrads::zeros_like(self);
        let mut loss = LossBreakdown::default();
        for &i in idx {
            let f = self.forward(x.row(i), labels[i])?;
            loss.add_assign(&self.accumulate_gradients(&f, w, &mut grads)?);
        }
        Ok((grads.into_buffers(), loss.scaled(w)))
    }

    fn evaluate(&self, x: &Matrix, labels: &[usize]) -> Result<LossBreakdown> {
        let plan = self.plan()?;
        if x.rows() == 0 {
            return Err(Error::invalid("loss of an empty set"));
        }
        let mut acc = LossBreakdown::default();
        for (row, &l) in x.row_iter().zip(labels) {
            acc.add_assign(&sample_loss(plan, &self.forward(row, l)?)?);
        }
        Ok(acc.scaled(1.0 / x.rows() as f64))
    }
}

/// Result of [`train_tae`].
#[derive(Debug, Clone)]
pub struct TaeTraining {
    pub model: TaeModel,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stop: trainer::StopReason,
}

/// Split off a stratified validation part, fit the separation plan on the
/// rest, and train all three subnetworks jointly.
pub fn train_tae(data: &Dataset, config: &TrainConfig) -> Result<TaeTraining> {
    config.validate()?;
    let counts = data.class_counts();
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::invalid(format!(
            "class `{}` has no samples",
            data.class_names[c]
        )));
    }
    let mut rng = seeded_rng(config.seed);
    let (train_idx, val_idx) =
        trainer::validation_split(&data.labels, data.n_classes(), config, &mut rng)?;

    let mut model = build_tae(data.n_features(), config, &mut rng)?;
    let train_x = data.x.select_rows(&train_idx);
    let train_labels: Vec<usize> = train_idx.iter().map(|&i| data.labels[i]).collect();
    let class_ids: Vec<usize> = (0..data.n_classes()).collect();
    model.fit_plan(
        &train_x,
        &train_labels,
        &class_ids,
        config.scale,
        config.center_rule,
    )?;

    let TrainOutcome {
        model,
        history,
        best_epoch,
        stop,
    } = trainer::fit(
        model,
        &data.x,
        &data.labels,
        &train_idx,
        &val_idx,
        config,
        &mut rng,
    )?;
    Ok(TaeTraining {
        model,
        history,
        best_epoch,
        stop,
    })
}
