//! Dense neural-network substrate: matrices, affine layers, reverse-mode
//! gradients for a fixed MLP topology, Adam and mini-batching.

mod adam;
mod batch;
mod layer;
mod matrix;
mod mlp;

pub use adam::AdamState;
pub use batch::minibatches;
pub use layer::{glorot_init, Activation, DenseLayer};
pub use matrix::Matrix;
pub use mlp::{Forward, LayerGrads, Mlp, MlpGrads};
