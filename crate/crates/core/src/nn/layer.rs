use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output `y`.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "identity" | "linear" => Ok(Activation::Identity),
            other => Err(Error::invalid(format!("unknown activation `{other}`"))),
        }
    }
}

/// Glorot/Xavier uniform initialization: entries drawn from
/// `U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out)))`.
///
/// Returns a `fan_out x fan_in` matrix, the layout a [`DenseLayer`] expects.
pub fn glorot_init<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Result<Matrix> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::invalid(format!(
            "glorot_init needs non-zero fan sizes, got {fan_in}x{fan_out}"
        )));
    }
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out)
        .map(|_| rng.random_range(-bound..=bound))
        .collect();
    Matrix::from_vec(fan_out, fan_in, data)
}

/// Affine map followed by an element-wise activation: `y = act(W x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLayer")]
pub struct DenseLayer {
    /// `out x in`.
    pub(crate) weights: Matrix,
    pub(crate) bias: Vec<f64>,
    pub(crate) activation: Activation,
}

#[derive(Deserialize)]
struct RawLayer {
    weights: Matrix,
    bias: Vec<f64>,
    activation: Activation,
}

impl TryFrom<RawLayer> for DenseLayer {
    type Error = Error;

    fn try_from(raw: RawLayer) -> Result<Self> {
        DenseLayer::new(raw.weights, raw.bias, raw.activation)
    }
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::shape(
                "DenseLayer::new bias",
                weights.rows(),
                bias.len(),
            ));
        }
        if bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("bias entries must be finite"));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    /// Glorot-initialized weights with zero bias.
    pub fn glorot<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let weights = glorot_init(in_dim, out_dim, rng)?;
        Self::new(weights, vec![0.0; out_dim], activation)
    }

    #[inline]
    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    #[inline]
    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.weights.matvec(x)?;
        for (v, b) in y.iter_mut().zip(&self.bias) {
            *v = self.activation.apply(*v + b);
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    #[test]
    fn glorot_respects_bound() {
        let mut rng = seeded_rng(7);
        let w = glorot_init(2, 3, &mut rng).unwrap();
        let bound = (6.0f64 / 5.0).sqrt();
        assert!((bound - 1.0954).abs() < 1e-4);
        assert_eq!((w.rows(), w.cols()), (3, 2));
        assert!(w.as_slice().iter().all(|v| v.abs() <= bound));

        let mut rng = seeded_rng(0);
        let w = glorot_init(1, 1, &mut rng).unwrap();
        assert!(w.get(0, 0).abs() <= 3f64.sqrt());
    }

    #[test]
    fn glorot_is_deterministic() {
        let a = glorot_init(4, 5, &mut seeded_rng(11)).unwrap();
        let b = glorot_init(4, 5, &mut seeded_rng(11)).unwrap();
        assert_eq!(a, b);
        let c = glorot_init(4, 5, &mut seeded_rng(12)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn glorot_rejects_zero_dims() {
        assert!(matches!(
            glorot_init(0, 3, &mut seeded_rng(0)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(glorot_init(3, 0, &mut seeded_rng(0)).is_err());
    }

    #[test]
    fn activation_parse() {
        assert_eq!("ReLU".parse::<Activation>().unwrap(), Activation::Relu);
        assert_eq!("tanh".parse::<Activation>().unwrap(), Activation::Tanh);
        assert!("sigmoid".parse::<Activation>().is_err());
    }
}
