//! Twin auto-encoder (TAE) representation learning.
//!
//! The pipeline is:
//!
//! 1. [`data`]: load a CSV, min-max normalize, stratified split.
//! 2. [`transform`]: project the training set with [`pca`] and build a
//!    per-class translation plan that pushes class means apart.
//! 3. [`tae`]: train encoder, hermaphrodite and decoder networks so that the
//!    decoder, fed a raw sample, reproduces the separated latent vector.
//! 4. [`tree`] and [`metrics`]: fit a decision tree on the decoder output and
//!    score it (accuracy, F-score, FAR, MDR, representation quality).
//!
//! A plain auto-encoder ([`ae`]) shares the trainer and serves as baseline.
//! [`model_file`] holds the on-disk format and [`pipeline`] the orchestration
//! used by the command-line front end.

pub mod ae;
pub mod data;
pub mod error;
pub mod metrics;
pub mod model_file;
pub mod nn;
pub mod pca;
pub mod pipeline;
pub mod tae;
pub mod trainer;
pub mod transform;
pub mod tree;

pub use error::{Error, Result};

use rand::SeedableRng;

/// The seeded random source used by every stochastic operation.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Build the crate's random source from a seed.
pub fn seeded_rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
