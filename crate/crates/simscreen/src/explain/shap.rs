//! Interventional Shapley values over raw-feature groups.
//!
//! A coalition's value is the mean model output over background rows
//! with the coalition's encoded columns taken from the explained point.
//! [`shap_exact`] enumerates all `2^g` coalitions; [`shap_sampled`]
//! averages marginal contributions over antithetic permutations, which
//! keeps the efficiency identity exact by telescoping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Exact enumeration becomes unreasonable past this many groups.
pub const EXACT_GROUP_BOUND: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyExplanation {
    /// One value per raw-feature group, in group order.
    pub values: Vec<f64>,
    /// Mean model output over the background rows.
    pub base_value: f64,
}

fn compose(
    out: &mut [f64],
    x: &[f64],
    background_row: &[f64],
    groups: &[(usize, usize)],
    mask: u64,
) {
    out.copy_from_slice(background_row);
    for (g, &(s, e)) in groups.iter().enumerate() {
        if mask & (1 << g) != 0 {
            out[s..e].copy_from_slice(&x[s..e]);
        }
    }
}

/// Exact interventional Shapley values by subset enumeration.
pub fn shap_exact(
    model: &(dyn Fn(&[f64]) -> f64 + Sync),
    x: &[f64],
    background: &[Vec<f64>],
    groups: &[(usize, usize)],
) -> Result<ShapleyExplanation> {
    let g = groups.len();
    if g > EXACT_GROUP_BOUND {
        return Err(Error::TooManyGroups {
            groups: g,
            bound: EXACT_GROUP_BOUND,
        });
    }
    assert!(!background.is_empty(), "background must hold >= 1 row");

    // Coalition values v(T) for all subsets.
    let mut v = vec![0.0f64; 1 << g];
    let mut row = vec![0.0; x.len()];
    for (mask, slot) in v.iter_mut().enumerate() {
        let mut acc = 0.0;
        for b in background {
            compose(&mut row, x, b, groups, mask as u64);
            acc += model(&row);
        }
        *slot = acc / background.len() as f64;
    }

    // Shapley weights by coalition size: |T|! (g-|T|-1)! / g!
    let mut factorial = vec![1.0f64; g + 1];
    for i in 1..=g {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    let mut values = vec![0.0; g];
    for (j, value) in values.iter_mut().enumerate() {
        let bit = 1u64 << j;
        for mask in 0..(1u64 << g) {
            if mask & bit != 0 {
                continue;
            }
            let t = mask.count_ones() as usize;
            let w = factorial[t] * factorial[g - t - 1] / factorial[g];
            *value += w * (v[(mask | bit) as usize] - v[mask as usize]);
        }
    }
    Ok(ShapleyExplanation {
        values,
        base_value: v[0],
    })
}

/// Exact enumeration up to 10 groups, antithetic permutation sampling
/// beyond that.
pub fn shap_auto(
    model: &(dyn Fn(&[f64]) -> f64 + Sync),
    x: &[f64],
    background: &[Vec<f64>],
    groups: &[(usize, usize)],
    n_perms: usize,
    rng: RngStream,
) -> Result<ShapleyExplanation> {
    if groups.len() <= 10 {
        shap_exact(model, x, background, groups)
    } else {
        shap_sampled(model, x, background, groups, n_perms, rng)
    }
}

/// Permutation-sampling estimate with antithetic pairs: every odd
/// permutation is the reverse of the one before it.
pub fn shap_sampled(
    model: &(dyn Fn(&[f64]) -> f64 + Sync),
    x: &[f64],
    background: &[Vec<f64>],
    groups: &[(usize, usize)],
    n_perms: usize,
    rng: RngStream,
) -> Result<ShapleyExplanation> {
    assert!(n_perms >= 1);
    assert!(!background.is_empty(), "background must hold >= 1 row");
    let g = groups.len();
    let k = background.len();

    let mut base = 0.0;
    for b in background {
        base += model(b);
    }
    base /= k as f64;

    let mut values = vec![0.0; g];
    let mut perm: Vec<usize> = (0..g).collect();
    let mut row = vec![0.0; x.len()];
    for p in 0..n_perms {
        if p % 2 == 0 {
            perm = crate::rng::permutation(g, rng.child(p as u64));
        } else {
            perm.reverse();
        }
        for b in background {
            row.copy_from_slice(b);
            let mut prev = model(&row);
            for &j in &perm {
                let (s, e) = groups[j];
                row[s..e].copy_from_slice(&x[s..e]);
                let cur = model(&row);
                values[j] += cur - prev;
                prev = cur;
            }
        }
    }
    let scale = 1.0 / (n_perms as f64 * k as f64);
    for v in &mut values {
        *v *= scale;
    }
    Ok(ShapleyExplanation {
        values,
        base_value: base,
    })
}
