//! Plain auto-encoder baseline trained on reconstruction error only.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::nn::{Activation, Matrix, Mlp, MlpGrads};
use crate::tae::map_rows;
use crate::trainer::{self, EpochRecord, LossBreakdown, StopReason, TrainConfig, Trainable};
use crate::{seeded_rng, Error, Result, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeModel {
    pub encoder: Mlp,
    pub decoder: Mlp,
    pub input_dim: usize,
    pub latent_dim: usize,
}

pub fn build_ae(input_dim: usize, config: &TrainConfig, rng: &mut Rng) -> Result<AeModel> {
    let dz = config.latent_dim;
    if input_dim == 0 || dz == 0 {
        return Err(Error::invalid(
            "input and latent dimensions must be at least 1",
        ));
    }
    let h = config.hidden_width(input_dim);
    let encoder = Mlp::glorot(
        &[input_dim, h, dz],
        config.activation,
        Activation::Identity,
        rng,
    )?;
    let decoder = Mlp::glorot(
        &[dz, h, input_dim],
        config.activation,
        Activation::Identity,
        rng,
    )?;
    Ok(AeModel {
        encoder,
        decoder,
        input_dim,
        latent_dim: dz,
    })
}

impl AeModel {
    /// Latent vector `f(x)`.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.encoder.predict(x)
    }

    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.decoder.predict(&self.encoder.predict(x)?)
    }

    pub fn encode_rows(&self, x: &Matrix) -> Result<Matrix> {
        map_rows(x, self.latent_dim, |r| self.encode(r))
    }

    fn sample_loss(&self, x: &[f64]) -> Result<f64> {
        let xh = self.reconstruct(x)?;
        Ok(x.iter().zip(&xh).map(|(a, b)| (a - b) * (a - b)).sum())
    }
}

impl Trainable for AeModel {
    fn param_sizes(&self) -> Vec<usize> {
        let mut s = self.encoder.param_sizes();
        s.extend(self.decoder.param_sizes());
        s
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let AeModel {
            encoder, decoder, ..
        } = self;
        let mut p = encoder.param_slices_mut();
        p.extend(decoder.param_slices_mut());
        p
    }

    fn batch_gradients(
        &self,
        x: &Matrix,
        _labels: &[usize],
        idx: &[usize],
    ) -> Result<(Vec<Vec<f64>>, LossBreakdown)> {
        if idx.is_empty() {
            return Err(Error::invalid("gradient of an empty batch"));
        }
        let w = 1.0 / idx.len() as f64;
        let mut ge = MlpGrads::zeros_like(&self.encoder);
        let mut gd = MlpGrads::zeros_like(&self.decoder);
        let mut total = 0.0;
        for &i in idx {
            let xi = x.row(i);
            let enc = self.encoder.forward(xi)?;
            let dec = self.decoder.forward(enc.output())?;
            let g: Vec<f64> = dec
                .output()
                .iter()
                .zip(xi)
                .map(|(a, b)| 2.0 * w * (a - b))
                .collect();
            total += dec
                .output()
                .iter()
                .zip(xi)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            let g_latent = self.decoder.backward(&dec, &g, &mut gd)?;
            self.encoder.backward(&enc, &g_latent, &mut ge)?;
        }
        let buffers = [ge, gd]
            .into_iter()
            .flat_map(|g| g.layers.into_iter().flat_map(|l| [l.weights, l.bias]))
            .collect();
        Ok((
            buffers,
            LossBreakdown::from_components(total * w, 0.0, 0.0, 0.0),
        ))
    }

    fn evaluate(&self, x: &Matrix, _labels: &[usize]) -> Result<LossBreakdown> {
        if x.rows() == 0 {
            return Err(Error::invalid("loss of an empty set"));
        }
        let mut total = 0.0;
        for row in x.row_iter() {
            total += self.sample_loss(row)?;
        }
        Ok(LossBreakdown::from_components(
            total / x.rows() as f64,
            0.0,
            0.0,
            0.0,
        ))
    }
}

#[derive(Debug, Clone)]
pub struct AeTraining {
    pub model: AeModel,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stop: StopReason,
}

/// Train on reconstruction error with the same split, optimizer and
/// stopping rule as the twin auto-encoder. Labels only stratify the split.
pub fn train_ae(data: &Dataset, config: &TrainConfig) -> Result<AeTraining> {
    config.validate()?;
    let mut rng = seeded_rng(config.seed);
    let (train_idx, val_idx) =
        trainer::validation_split(&data.labels, data.n_classes(), config, &mut rng)?;
    let model = build_ae(data.n_features(), config, &mut rng)?;
    let out = trainer::fit(
        model,
        &data.x,
        &data.labels,
        &train_idx,
        &val_idx,
        config,
        &mut rng,
    )?;
    Ok(AeTraining {
        model: out.model,
        history: out.history,
        best_epoch: out.best_epoch,
        stop: out.stop,
    })
}
