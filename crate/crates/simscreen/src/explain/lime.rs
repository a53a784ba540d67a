//! Local surrogate explanations: weighted ridge regression on Gaussian
//! perturbations around the explained point.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeConfig {
    pub n_samples: usize,
    /// Kernel width in per-column standard-deviation units. `None` uses
    /// `0.75 * sqrt(d)`.
    pub kernel_width: Option<f64>,
    pub ridge_strength: f64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        LimeConfig {
            n_samples: 1000,
            kernel_width: None,
            ridge_strength: 1e-3,
        }
    }
}

/// Fitted local surrogate. `weight_sum` and `local_pred` are the exact
/// identities over the returned fields: `weight_sum = sum(weights)` and
/// `local_pred = intercept + weights . x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateExplanation {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub weight_sum: f64,
    pub local_pred: f64,
}

/// Fit a ridge-regularized weighted linear surrogate of `model` around
/// `x`. Perturbations are `x + sigma_c * eps` per column with `eps`
/// standard normal and `sigma_c` the empirical training std of that
/// column; sample weights are `exp(-dist^2 / kw^2)` with distances taken
/// in std units (constant columns contribute nothing).
pub fn lime_explain(
    model: &(dyn Fn(&[f64]) -> f64 + Sync),
    x: &[f64],
    col_std: &[f64],
    cfg: &LimeConfig,
    rng: RngStream,
) -> Result<SurrogateExplanation> {
    let d = x.len();
    assert_eq!(col_std.len(), d);
    let kw = cfg.kernel_width.unwrap_or(0.75 * (d as f64).sqrt());
    let mut rng = rng.rng();

    // Accumulate the weighted normal equations directly: A = [1 X].
    let mut ata = DMatrix::<f64>::zeros(d + 1, d + 1);
    let mut aty = DVector::<f64>::zeros(d + 1);
    let mut sample = vec![0.0; d];
    let mut design_row = vec![0.0; d + 1];
    for _ in 0..cfg.n_samples {
        let mut dist2 = 0.0;
        for c in 0..d {
            let eps: f64 = StandardNormal.sample(&mut rng);
            if col_std[c] > 0.0 {
                sample[c] = x[c] + col_std[c] * eps;
                dist2 += eps * eps;
            } else {
                sample[c] = x[c];
            }
        }
        let w = (-dist2 / (kw * kw)).exp();
        let y = model(&sample);
        design_row[0] = 1.0;
        design_row[1..].copy_from_slice(&sample);
        for i in 0..=d {
            let wi = w * design_row[i];
            aty[i] += wi * y;
            for j in i..=d {
                ata[(i, j)] += wi * design_row[j];
            }
        }
    }
    for i in 0..=d {
        for j in 0..i {
            ata[(i, j)] = ata[(j, i)];
        }
    }
    // Penalize weights, never the intercept.
    for i in 1..=d {
        ata[(i, i)] += cfg.ridge_strength;
    }

    let beta = Cholesky::new(ata)
        .map(|ch| ch.solve(&aty))
        .ok_or(Error::SingularFit)?;
    let intercept = beta[0];
    let weights: Vec<f64> = beta.as_slice()[1..].to_vec();
    let weight_sum = weights.iter().sum();
    let local_pred = intercept + weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
    Ok(SurrogateExplanation {
        weights,
        intercept,
        weight_sum,
        local_pred,
    })
}
