//! On-disk model document (JSON).
//!
//! ```text
//! {
//!   "format": "tae-model",
//!   "format_version": 1,
//!   "kind": "tae" | "ae",
//!   "input_dim": d_x,
//!   "latent_dim": D_z,
//!   "activation": "relu" | "tanh" | "identity",
//!   "class_names": [..],
//!   "normalization": {"min": [..], "max": [..]} | null,
//!   "networks": {"encoder": MLP, "hermaphrodite": MLP, "decoder": MLP},   // tae
//!   "networks": {"encoder": MLP, "decoder": MLP},                         // ae
//!   "plan": {class_ids, mu, mu_bar, t, scale_base, scale, mu_hat, v}      // tae only
//! }
//! MLP   = {"layers": [{"weights": {"rows", "cols", "data": [..]}, "bias": [..], "activation"}]}
//! ```
//!
//! Reals are written in shortest round-trip decimal form, so a save/load
//! cycle is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ae::AeModel;
use crate::data::NormStats;
use crate::nn::{Activation, Matrix, Mlp};
use crate::tae::TaeModel;
use crate::transform::TransformPlan;
use crate::{Error, Result};

pub const FORMAT: &str = "tae-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Tae(TaeModel),
    Ae(AeModel),
}

/// A trained model plus what is needed to apply it to raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub model: AnyModel,
    pub class_names: Vec<String>,
    pub normalization: Option<NormStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tae,
    Ae,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    format_version: u32,
    kind: ModelKind,
    input_dim: usize,
    latent_dim: usize,
    activation: Activation,
    class_names: Vec<String>,
    normalization: Option<NormStats>,
    networks: Networks,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    plan: Option<TransformPlan>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Networks {
    encoder: Mlp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hermaphrodite: Option<Mlp>,
    decoder: Mlp,
}

impl AnyModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            AnyModel::Tae(_) => ModelKind::Tae,
            AnyModel::Ae(_) => ModelKind::Ae,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            AnyModel::Tae(m) => m.input_dim,
            AnyModel::Ae(m) => m.input_dim,
        }
    }

    pub fn latent_dim(&self) -> usize {
        match self {
            AnyModel::Tae(m) => m.latent_dim,
            AnyModel::Ae(m) => m.latent_dim,
        }
    }
}

fn hidden_activation(net: &Mlp) -> Activation {
    net.layers()[0].activation()
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::ModelFormat(msg()))
    }
}

impl SavedModel {
    pub fn to_json(&self) -> Result<String> {
        let doc = match &self.model {
            AnyModel::Tae(m) => Document {
                format: FORMAT.into(),
                format_version: FORMAT_VERSION,
                kind: ModelKind::Tae,
                input_dim: m.input_dim,
                latent_dim: m.latent_dim,
                activation: hidden_activation(&m.encoder),
                class_names: self.class_names.clone(),
                normalization: self.normalization.clone(),
                networks: Networks {
                    encoder: m.encoder.clone(),
                    hermaphrodite: Some(m.hermaphrodite.clone()),
                    decoder: m.decoder.clone(),
                },
                plan: m.plan.clone(),
            },
            AnyModel::Ae(m) => Document {
                format: FORMAT.into(),
                format_version: FORMAT_VERSION,
                kind: ModelKind::Ae,
                input_dim: m.input_dim,
                latent_dim: m.latent_dim,
                activation: hidden_activation(&m.encoder),
                class_names: self.class_names.clone(),
                normalization: self.normalization.clone(),
                networks: Networks {
                    encoder: m.encoder.clone(),
                    hermaphrodite: None,
                    decoder: m.decoder.clone(),
                },
                plan: None,
            },
        };
        let mut s =
            serde_json::to_string_pretty(&doc).map_err(|e| Error::ModelFormat(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document =
            serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        check(doc.format == FORMAT, || {
            format!("unexpected format tag `{}`", doc.format)
        })?;
        check(doc.format_version == FORMAT_VERSION, || {
            format!("unsupported format_version {}", doc.format_version)
        })?;
        let (dx, dz) = (doc.input_dim, doc.latent_dim);
        let Networks {
            encoder,
            hermaphrodite,
            decoder,
        } = doc.networks;
        check(
            encoder.input_dim() == dx && encoder.output_dim() == dz,
            || {
                format!(
                    "encoder must map {dx} -> {dz}, found {:?}",
                    encoder.widths()
                )
            },
        )?;
        if let Some(stats) = &doc.normalization {
            check(stats.min.len() == dx && stats.max.len() == dx, || {
                "normalization statistics do not match input_dim".into()
            })?;
        }
        let model = match doc.kind {
            ModelKind::Tae => {
                let herm = hermaphrodite
                    .ok_or_else(|| Error::ModelFormat("tae model without hermaphrodite".into()))?;
                check(herm.input_dim() == dz && herm.output_dim() == dx, || {
                    format!(
                        "hermaphrodite must map {dz} -> {dx}, found {:?}",
                        herm.widths()
                    )
                })?;
                check(
                    decoder.input_dim() == dx && decoder.output_dim() == dz,
                    || {
                        format!(
                            "decoder must map {dx} -> {dz}, found {:?}",
                            decoder.widths()
                        )
                    },
                )?;
                if let Some(plan) = &doc.plan {
                    validate_plan(plan, dz)?;
                }
                AnyModel::Tae(TaeModel {
                    encoder,
                    hermaphrodite: herm,
                    decoder,
                    plan: doc.plan,
                    input_dim: dx,
                    latent_dim: dz,
                })
            }
            ModelKind::Ae => {
                check(hermaphrodite.is_none() && doc.plan.is_none(), || {
                    "ae model must not carry a hermaphrodite or plan".into()
                })?;
                check(
                    decoder.input_dim() == dz && decoder.output_dim() == dx,
                    || {
                        format!(
                            "ae decoder must map {dz} -> {dx}, found {:?}",
                            decoder.widths()
                        )
                    },
                )?;
                AnyModel::Ae(AeModel {
                    encoder,
                    decoder,
                    input_dim: dx,
                    latent_dim: dz,
                })
            }
        };
        Ok(SavedModel {
            model,
            class_names: doc.class_names,
            normalization: doc.normalization,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::ModelFormat(m) => Error::ModelFormat(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Scale raw rows with the stored min-max statistics (identity when none).
    pub fn normalize(&self, x: &Matrix) -> Result<Matrix> {
        match &self.normalization {
            Some(stats) => stats.apply(x),
            None => Ok(x.clone()),
        }
    }
}

fn validate_plan(plan: &TransformPlan, dz: usize) -> Result<()> {
    let k = plan.class_ids.len();
    check(plan.class_ids.windows(2).all(|w| w[0] < w[1]), || {
        "plan class_ids must be ascending".into()
    })?;
    check(plan.mu_bar.len() == dz, || {
        "plan mu_bar has the wrong length".into()
    })?;
    check(plan.scale.len() == k, || {
        "plan scale has the wrong length".into()
    })?;
    for field in [&plan.mu, &plan.t, &plan.mu_hat, &plan.v] {
        check(
            field.len() == k && field.iter().all(|v| v.len() == dz),
            || format!("plan vectors must be {k} x {dz}"),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use crate::trainer::TrainConfig;

    fn cfg() -> TrainConfig {
        TrainConfig {
            latent_dim: 2,
            hidden: Some(4),
            ..TrainConfig::default()
        }
    }

    fn tae() -> SavedModel {
        let mut m = crate::tae::build_tae(3, &cfg(), &mut seeded_rng(1)).unwrap();
        let x = Matrix::from_rows(&[
            [0.1, 0.2, 0.3],
            [0.9, 0.1, 0.4],
            [0.5, 0.5, 0.5],
            [0.3, 0.8, 0.1],
        ])
        .unwrap();
        m.fit_plan(&x, &[0, 0, 1, 1], &[0, 1], 0.5, Default::default())
            .unwrap();
        SavedModel {
            model: AnyModel::Tae(m),
            class_names: vec!["normal".into(), "attack".into()],
            normalization: Some(NormStats {
                min: vec![0.0, 0.1, 0.2],
                max: vec![1.0, 1.0 / 3.0, 7.25],
            }),
        }
    }

    #[test]
    fn tae_round_trip_is_exact() {
        let m = tae();
        let back = SavedModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ae_round_trip_is_exact() {
        let m = SavedModel {
            model: AnyModel::Ae(crate::ae::build_ae(3, &cfg(), &mut seeded_rng(2)).unwrap()),
            class_names: vec![],
            normalization: None,
        };
        let json = m.to_json().unwrap();
        assert!(json.contains("\"kind\": \"ae\""));
        assert!(!json.contains("hermaphrodite"));
        assert_eq!(SavedModel::from_json(&json).unwrap(), m);
    }

    #[test]
    fn rejects_tampered_documents() {
        let json = tae().to_json().unwrap();
        assert!(SavedModel::from_json(&json.replace("\"tae-model\"", "\"other\"")).is_err());
        assert!(
            SavedModel::from_json(&json.replace("\"input_dim\": 3", "\"input_dim\": 4")).is_err()
        );
        assert!(SavedModel::from_json(
            &json.replace("\"format_version\": 1", "\"format_version\": 9")
        )
        .is_err());
        assert!(SavedModel::from_json("{").is_err());
    }

    #[test]
    fn rejects_inconsistent_matrix() {
        let json = tae().to_json().unwrap();
        let broken = json.replacen("\"rows\": 4", "\"rows\": 5", 1);
        assert_ne!(broken, json);
        assert!(SavedModel::from_json(&broken).is_err());
    }
}
