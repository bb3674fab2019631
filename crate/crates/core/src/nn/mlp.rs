use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Activation, DenseLayer};
use crate::{Error, Result};

/// A stack of dense layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMlp")]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

#[derive(Deserialize)]
struct RawMlp {
    layers: Vec<DenseLayer>,
}

impl TryFrom<RawMlp> for Mlp {
    type Error = Error;

    fn try_from(raw: RawMlp) -> Result<Self> {
        Mlp::new(raw.layers)
    }
}

/// Activations cached by [`Mlp::forward`]: `values[0]` is the input and
/// `values[i + 1]` the output of layer `i`.
#[derive(Debug, Clone)]
pub struct Forward {
    values: Vec<Vec<f64>>,
}

impl Forward {
    pub fn output(&self) -> &[f64] {
        self.values
            .last()
            .expect("forward cache always holds the input")
    }

    pub fn input(&self) -> &[f64] {
        &self.values[0]
    }

    /// All cached activations, input first.
    pub fn layer_values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn into_output(mut self) -> Vec<f64> {
        self.values
            .pop()
            .expect("forward cache always holds the input")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    /// Row-major, same shape as the layer weights.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Parameter gradients for one [`Mlp`], accumulated in place.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub layers: Vec<LayerGrads>,
}

impl MlpGrads {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrads {
                    weights: vec![0.0; l.weights.rows() * l.weights.cols()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    pub fn scale(&mut self, k: f64) {
        for l in &mut self.layers {
            l.weights
                .iter_mut()
                .chain(l.bias.iter_mut())
                .for_each(|g| *g *= k);
        }
    }

    pub fn fill_zero(&mut self) {
        for l in &mut self.layers {
            l.weights.fill(0.0);
            l.bias.fill(0.0);
        }
    }

    /// Flat views in the order used by [`Mlp::param_slices_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }
}

impl Mlp {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("an MLP needs at least one layer"));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::shape(
                    "Mlp::new",
                    pair[0].out_dim(),
                    pair[1].in_dim(),
                ));
            }
        }
        Ok(Self { layers })
    }

    /// Glorot-initialized network with the given widths (`widths[0]` is the
    /// input). Hidden layers use `hidden`, the last layer uses `output`.
    pub fn glorot<R: Rng + ?Sized>(
        widths: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::invalid("an MLP needs an input and an output width"));
        }
        let n = widths.len() - 1;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i + 1 == n { output } else { hidden };
                DenseLayer::glorot(w[0], w[1], act, rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Layer widths, input first.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(DenseLayer::out_dim))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.rows() * l.weights.cols() + l.bias.len())
            .sum()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        if x.len() != self.input_dim() {
            return Err(Error::shape("Mlp::forward", self.input_dim(), x.len()));
        }
        let mut values = Vec::with_capacity(self.layers.len() + 1);
        values.push(x.to_vec());
        for layer in &self.layers {
            let next = layer.forward(values.last().unwrap())?;
            values.push(next);
        }
        Ok(Forward { values })
    }

    /// Forward pass without keeping intermediate activations.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::shape("Mlp::predict", self.input_dim(), x.len()));
        }
        let mut cur = x.to_vec();
        for layer in &self.layers {
            cur = layer.forward(&cur)?;
        }
        Ok(cur)
    }

    /// Reverse-mode pass. `grad_output` is dL/d(output); parameter gradients
    /// are added into `grads` and dL/d(input) is returned.
    pub fn backward(
        &self,
        cache: &Forward,
        grad_output: &[f64],
        grads: &mut MlpGrads,
    ) -> Result<Vec<f64>> {
        if cache.values.len() != self.layers.len() + 1 {
            return Err(Error::Contract(format!(
                "forward cache holds {} activations, network needs {}",
                cache.values.len(),
                self.layers.len() + 1
            )));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if cache.values[i].len() != layer.in_dim()
                || cache.values[i + 1].len() != layer.out_dim()
            {
                return Err(Error::Contract(format!(
                    "forward cache does not match layer {i}"
                )));
            }
        }
        if grads.layers.len() != self.layers.len() {
            return Err(Error::shape(
                "Mlp::backward grads",
                self.layers.len(),
                grads.layers.len(),
            ));
        }
        if grad_output.len() != self.output_dim() {
            return Err(Error::shape(
                "Mlp::backward",
                self.output_dim(),
                grad_output.len(),
            ));
        }

        let mut delta = grad_output.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.values[i];
            let output = &cache.values[i + 1];
            // dL/d(pre-activation)
            for (d, &y) in delta.iter_mut().zip(output) {
                *d *= layer.activation.derivative_from_output(y);
            }
            let g = &mut grads.layers[i];
            let in_dim = layer.in_dim();
            for (r, &d) in delta.iter().enumerate() {
                g.bias[r] += d;
                if d == 0.0 {
                    continue;
                }
                let row = &mut g.weights[r * in_dim..(r + 1) * in_dim];
                for (w, &xv) in row.iter_mut().zip(input) {
                    *w += d * xv;
                }
            }
            let mut next = vec![0.0; in_dim];
            for (r, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (n, &w) in next.iter_mut().zip(layer.weights.row(r)) {
                    *n += d * w;
                }
            }
            delta = next;
        }
        Ok(delta)
    }

    /// Mutable flat parameter buffers: weights then bias, layer by layer.
    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    pub fn param_sizes(&self) -> Vec<usize> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.rows() * l.weights.cols(), l.bias.len()])
            .collect()
    }
}
