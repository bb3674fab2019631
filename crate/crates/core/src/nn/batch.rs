use rand::seq::SliceRandom;
use rand::Rng;

use crate::{Error, Result};

/// One epoch of shuffled mini-batches over `0..n`. Every index appears
/// exactly once; the last batch may be short.
pub fn minibatches<R: Rng + ?Sized>(
    n: usize,
    batch_size: usize,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 {
        return Err(Error::invalid("batch_size must be at least 1"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    Ok(idx.chunks(batch_size).map(<[usize]>::to_vec).collect())
}
