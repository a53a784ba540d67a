//! Finite-difference validation of the backward pass.

use crate::error::Result;
use crate::usecase::types::AgentExample;

use super::network::{backward_batch, example_matrix, forward_batch, DeepSetParams};

const STEP: f64 = 1e-4;

fn bce(p: f64, y: f64) -> f64 {
    let eps = 1e-12;
    -(y * (p + eps).ln() + (1.0 - y) * (1.0 - p + eps).ln())
}

fn loss_at(params: &DeepSetParams, example: &AgentExample, label: f64) -> Result<f64> {
    let input = example_matrix(example, params.input_dim)?;
    let trace = forward_batch(params, input, example.observations.len());
    Ok(bce(trace.probs[0], label))
}

/// Maximum relative error between the analytic gradient of the one-example
/// binary cross-entropy and a central finite difference with step `1e-4`,
/// over every parameter. Relative error is `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn grad_check(params: &DeepSetParams, example: &AgentExample, label: f64) -> Result<f64> {
    let input = example_matrix(example, params.input_dim)?;
    let trace = forward_batch(params, input, example.observations.len());
    let (_, grads) = backward_batch(params, &trace, &[label]);

    let analytic: Vec<f64> = grads
        .phi
        .iter()
        .chain(grads.rho.iter())
        .flat_map(|(w, b)| w.iter().chain(b.iter()).copied().collect::<Vec<_>>())
        .collect();

    let mut max_rel = 0.0f64;
    let mut flat_index = 0usize;
    let n_phi = params.phi.len();
    let n_layers = n_phi + params.rho.len();
    for layer_idx in 0..n_layers {
        let (w_len, b_len) = {
            let layer = if layer_idx < n_phi {
                &params.phi[layer_idx]
            } else {
                &params.rho[layer_idx - n_phi]
            };
            (layer.w.len(), layer.b.len())
        };
        for slot in 0..w_len + b_len {
            let poke = |delta: f64, p: &mut DeepSetParams| {
                let layer = if layer_idx < n_phi {
                    &mut p.phi[layer_idx]
                } else {
                    &mut p.rho[layer_idx - n_phi]
                };
                if slot < w_len {
                    let v = layer.w.as_slice_mut().unwrap();
                    v[slot] += delta;
                } else {
                    layer.b[slot - w_len] += delta;
                }
            };
            let mut up = params.clone();
            poke(STEP, &mut up);
            let mut down = params.clone();
            poke(-STEP, &mut down);
            let numeric = (loss_at(&up, example, label)? - loss_at(&down, example, label)?)
                / (2.0 * STEP);
            let a = analytic[flat_index];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            max_rel = max_rel.max(rel);
            flat_index += 1;
        }
    }
    Ok(max_rel)
}
