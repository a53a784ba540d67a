//! Saddle-point synthetic regression family with analytic counterfactual
//! labels.
//!
//! Each function in the family has critical points drawn uniformly from
//! [10, 15] and a Bernoulli(0.5) sign flip. Targets are noise-free, so
//! whether the output increases in the second feature is known exactly
//! everywhere off the critical line.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::schema::{FeatureKind, FeatureSchema, TabularDataset, TargetKind};
use crate::rng::RngStream;

pub const STAR_RANGE: (f64, f64) = (10.0, 15.0);
pub const SAMPLE_HALF_WIDTH: f64 = 5.0;
/// Observation points for the agent come from this narrower range, so
/// half the time the critical point lies outside it.
pub const OBSERVATION_RANGE: (f64, f64) = (11.25, 13.75);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleSpec {
    pub x1_star: f64,
    pub x2_star: f64,
    pub z: bool,
}

pub fn sample_saddle_spec(rng: RngStream) -> SaddleSpec {
    let mut rng = rng.rng();
    let span = STAR_RANGE.1 - STAR_RANGE.0;
    let x1_star = STAR_RANGE.0 + span * rng.gen::<f64>();
    let x2_star = STAR_RANGE.0 + span * rng.gen::<f64>();
    let z = rng.gen_bool(0.5);
    SaddleSpec { x1_star, x2_star, z }
}

/// The saddle surface itself.
pub fn saddle_g(spec: &SaddleSpec, x1: f64, x2: f64) -> f64 {
    (x1 - spec.x1_star).powi(2) - (x2 - spec.x2_star).powi(2)
}

/// Target value: `g + 30` under the positive orientation, `-g + 30`
/// under the flipped one.
pub fn saddle_y(spec: &SaddleSpec, x1: f64, x2: f64) -> f64 {
    let g = saddle_g(spec, x1, x2);
    if spec.z {
        g + 30.0
    } else {
        -g + 30.0
    }
}

/// Whether the target increases in the second feature at `x`:
/// `x2 <= x2*` under the positive orientation, `x2 > x2*` otherwise.
pub fn saddle_label(spec: &SaddleSpec, x: &[f64; 2]) -> bool {
    if spec.z {
        x[1] <= spec.x2_star
    } else {
        x[1] > spec.x2_star
    }
}

pub fn saddle_schema() -> FeatureSchema {
    FeatureSchema::new(
        vec![
            ("x1".into(), FeatureKind::Continuous),
            ("x2".into(), FeatureKind::Continuous),
        ],
        TargetKind::Regression,
    )
}

/// Draw `n` noise-free rows with both components uniform in
/// `[star - 5, star + 5]`.
pub fn saddle_sample(spec: &SaddleSpec, n: usize, rng: RngStream) -> TabularDataset {
    let mut rng = rng.rng();
    let mut rows = Array2::zeros((n, 2));
    let mut targets = Vec::with_capacity(n);
    for i in 0..n {
        let x1 = spec.x1_star - SAMPLE_HALF_WIDTH + 2.0 * SAMPLE_HALF_WIDTH * rng.gen::<f64>();
        let x2 = spec.x2_star - SAMPLE_HALF_WIDTH + 2.0 * SAMPLE_HALF_WIDTH * rng.gen::<f64>();
        rows[[i, 0]] = x1;
        rows[[i, 1]] = x2;
        targets.push(saddle_y(spec, x1, x2));
    }
    TabularDataset::new(saddle_schema(), rows, targets).expect("valid saddle dataset")
}

/// Uniform draw from the observation square.
pub fn sample_observation_point(rng: RngStream) -> [f64; 2] {
    let mut rng = rng.rng();
    let span = OBSERVATION_RANGE.1 - OBSERVATION_RANGE.0;
    [
        OBSERVATION_RANGE.0 + span * rng.gen::<f64>(),
        OBSERVATION_RANGE.0 + span * rng.gen::<f64>(),
    ]
}

/// Fraction of a `grid x grid` lattice of cell centers over the
/// observation square where the sign of the central difference of the
/// model along the second feature agrees with the analytic label. A zero
/// difference counts as "not increasing", so a constant model agrees
/// with roughly the label-0 share.
pub fn verify_saddle_fidelity(
    predict: &(dyn Fn(&[f64]) -> f64 + Sync),
    spec: &SaddleSpec,
    grid: usize,
    h: f64,
) -> f64 {
    assert!(h > 0.0);
    let span = OBSERVATION_RANGE.1 - OBSERVATION_RANGE.0;
    let step = span / grid as f64;
    let mut agree = 0usize;
    for i in 0..grid {
        for j in 0..grid {
            let x1 = OBSERVATION_RANGE.0 + (i as f64 + 0.5) * step;
            let x2 = OBSERVATION_RANGE.0 + (j as f64 + 0.5) * step;
            let up = predict(&[x1, x2 + h]);
            let down = predict(&[x1, x2 - h]);
            let increasing = up - down > 0.0;
            if increasing == saddle_label(spec, &[x1, x2]) {
                agree += 1;
            }
        }
    }
    agree as f64 / (grid * grid) as f64
}
