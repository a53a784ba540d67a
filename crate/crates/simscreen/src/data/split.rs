//! Deterministic splitting and subsampling.

use crate::data::schema::TabularDataset;
use crate::error::{Error, Result};
use crate::rng::{permutation, RngStream};

/// Split into (train, validation, test) with rounded-share sizes. The
/// partition is a shuffled disjoint cover of all rows, byte-identical
/// for equal `(seed, stream)`.
pub fn split(
    ds: &TabularDataset,
    fractions: (f64, f64, f64),
    rng: RngStream,
) -> Result<(TabularDataset, TabularDataset, TabularDataset)> {
    let (a, b, c) = fractions;
    let arr = [a, b, c];
    if arr.iter().any(|&f| f <= 0.0) || (a + b + c - 1.0).abs() > 1e-9 {
        return Err(Error::BadFractions(arr));
    }
    let n = ds.len();
    let order = permutation(n, rng);
    let cut1 = (a * n as f64).round() as usize;
    let cut2 = ((a + b) * n as f64).round() as usize;
    let cut1 = cut1.min(n);
    let cut2 = cut2.clamp(cut1, n);
    Ok((
        ds.select(&order[..cut1]),
        ds.select(&order[cut1..cut2]),
        ds.select(&order[cut2..]),
    ))
}

/// Draw `n` rows without replacement, deterministic for the stream.
pub fn subsample(ds: &TabularDataset, n: usize, rng: RngStream) -> Result<TabularDataset> {
    if n > ds.len() {
        return Err(Error::TooLarge {
            requested: n,
            available: ds.len(),
        });
    }
    let order = permutation(ds.len(), rng);
    Ok(ds.select(&order[..n]))
}
