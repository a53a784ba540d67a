//! The permutation-invariant set network: an encoder applied to every
//! observation in the set, a pooling step, and a head mapping the pooled
//! representation to a probability.
//!
//! Encoder widths are (input, 200, 100) and head widths
//! (100, 30, 30, 10, 1), ELU after every layer except the last of each
//! stack, sigmoid on the final scalar. Sum pooling is the default;
//! concatenation pooling (for the capacity ablation) fixes the set size
//! and widens the head input to `100 * S`.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::usecase::types::AgentExample;

pub const PHI_WIDTHS: [usize; 2] = [200, 100];
pub const RHO_WIDTHS: [usize; 4] = [30, 30, 10, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    Sum,
    Concat { set_size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// (out, in) weight matrix.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    fn glorot(n_in: usize, n_out: usize, rng: &mut impl Rng) -> Dense {
        let limit = (6.0 / (n_in + n_out) as f64).sqrt();
        let w = Array2::from_shape_fn((n_out, n_in), |_| rng.gen::<f64>() * 2.0 * limit - limit);
        Dense {
            w,
            b: Array1::zeros(n_out),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.w.len() + self.b.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepSetParams {
    pub phi: Vec<Dense>,
    pub rho: Vec<Dense>,
    pub pooling: Pooling,
    pub input_dim: usize,
}

impl DeepSetParams {
    pub fn parameter_count(&self) -> usize {
        self.phi
            .iter()
            .chain(self.rho.iter())
            .map(Dense::parameter_count)
            .sum()
    }

    pub fn rho_input_dim(&self) -> usize {
        match self.pooling {
            Pooling::Sum => PHI_WIDTHS[1],
            Pooling::Concat { set_size } => PHI_WIDTHS[1] * set_size,
        }
    }
}

/// Glorot-uniform weights and zero biases, deterministic for the stream.
pub fn init_deepset(input_dim: usize, pooling: Pooling, rng: RngStream) -> DeepSetParams {
    assert!(input_dim >= 1);
    let mut rng = rng.rng();
    let mut phi = Vec::new();
    let mut last = input_dim;
    for width in PHI_WIDTHS {
        phi.push(Dense::glorot(last, width, &mut rng));
        last = width;
    }
    let mut rho = Vec::new();
    let mut last = match pooling {
        Pooling::Sum => PHI_WIDTHS[1],
        Pooling::Concat { set_size } => PHI_WIDTHS[1] * set_size,
    };
    for width in RHO_WIDTHS {
        rho.push(Dense::glorot(last, width, &mut rng));
        last = width;
    }
    DeepSetParams {
        phi,
        rho,
        pooling,
        input_dim,
    }
}

fn elu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        z.exp() - 1.0
    }
}

/// Derivative of ELU recovered from the activation value.
fn elu_prime_from_act(a: f64) -> f64 {
    if a > 0.0 {
        1.0
    } else {
        a + 1.0
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Everything the backward pass needs from a batched forward pass.
pub(crate) struct ForwardTrace {
    pub input: Array2<f64>,
    /// Activations after every encoder layer (ELU applied except last).
    pub phi_acts: Vec<Array2<f64>>,
    pub pooled: Array2<f64>,
    /// Activations after every head layer (ELU applied except last).
    pub rho_acts: Vec<Array2<f64>>,
    pub probs: Array1<f64>,
    pub set_size: usize,
}

/// Batched forward pass over `batch` examples of equal set size. Rows of
/// `input` are the concatenated observation sets, example-major.
pub(crate) fn forward_batch(
    params: &DeepSetParams,
    input: Array2<f64>,
    set_size: usize,
) -> ForwardTrace {
    let rows = input.nrows();
    debug_assert_eq!(rows % set_size, 0);
    let batch = rows / set_size;

    let mut phi_acts = Vec::with_capacity(params.phi.len());
    let mut act = input.clone();
    for (l, layer) in params.phi.iter().enumerate() {
        let mut z = act.dot(&layer.w.t());
        z += &layer.b;
        if l + 1 < params.phi.len() {
            z.mapv_inplace(elu);
        }
        phi_acts.push(z.clone());
        act = z;
    }

    let width = PHI_WIDTHS[1];
    let pooled = match params.pooling {
        Pooling::Sum => {
            let mut pooled = Array2::zeros((batch, width));
            for e in 0..batch {
                let block = act.slice(ndarray::s![e * set_size..(e + 1) * set_size, ..]);
                pooled.row_mut(e).assign(&block.sum_axis(Axis(0)));
            }
            pooled
        }
        Pooling::Concat { set_size: s } => {
            assert_eq!(s, set_size, "concat pooling is fixed to one set size");
            let mut pooled = Array2::zeros((batch, width * s));
            for e in 0..batch {
                for j in 0..s {
                    pooled
                        .slice_mut(ndarray::s![e, j * width..(j + 1) * width])
                        .assign(&act.row(e * set_size + j));
                }
            }
            pooled
        }
    };

    let mut rho_acts = Vec::with_capacity(params.rho.len());
    let mut act = pooled.clone();
    for (l, layer) in params.rho.iter().enumerate() {
        let mut z = act.dot(&layer.w.t());
        z += &layer.b;
        if l + 1 < params.rho.len() {
            z.mapv_inplace(elu);
        }
        rho_acts.push(z.clone());
        act = z;
    }
    let probs = act.column(0).mapv(sigmoid);

    ForwardTrace {
        input,
        phi_acts,
        pooled,
        rho_acts,
        probs,
        set_size,
    }
}

/// Gradients for every parameter tensor, in (phi, rho) layer order.
pub(crate) struct Gradients {
    pub phi: Vec<(Array2<f64>, Array1<f64>)>,
    pub rho: Vec<(Array2<f64>, Array1<f64>)>,
}

/// Mean binary cross-entropy over the batch and its gradients.
pub(crate) fn backward_batch(
    params: &DeepSetParams,
    trace: &ForwardTrace,
    labels: &[f64],
) -> (f64, Gradients) {
    let batch = labels.len();
    debug_assert_eq!(trace.probs.len(), batch);
    let eps = 1e-12;
    let loss = labels
        .iter()
        .zip(trace.probs.iter())
        .map(|(&y, &p)| -(y * (p + eps).ln() + (1.0 - y) * (1.0 - p + eps).ln()))
        .sum::<f64>()
        / batch as f64;

    // d loss / d z_out = (p - y) / B, shape (B, 1)
    let mut delta = Array2::from_shape_fn((batch, 1), |(i, _)| {
        (trace.probs[i] - labels[i]) / batch as f64
    });

    let mut rho_grads: Vec<(Array2<f64>, Array1<f64>)> = Vec::with_capacity(params.rho.len());
    for l in (0..params.rho.len()).rev() {
        let input_act = if l == 0 {
            &trace.pooled
        } else {
            &trace.rho_acts[l - 1]
        };
        let dw = delta.t().dot(input_act);
        let db = delta.sum_axis(Axis(0));
        rho_grads.push((dw, db));
        if l > 0 {
            let mut prev = delta.dot(&params.rho[l].w);
            prev.zip_mut_with(&trace.rho_acts[l - 1], |d, &a| *d *= elu_prime_from_act(a));
            delta = prev;
        } else {
            delta = delta.dot(&params.rho[0].w);
        }
    }
    rho_grads.reverse();

    // Through pooling: broadcast (sum) or scatter (concat) back to the
    // per-element encoder outputs.
    let set_size = trace.set_size;
    let width = PHI_WIDTHS[1];
    let rows = batch * set_size;
    let mut delta_phi = Array2::zeros((rows, width));
    match params.pooling {
        Pooling::Sum => {
            for e in 0..batch {
                for j in 0..set_size {
                    delta_phi.row_mut(e * set_size + j).assign(&delta.row(e));
                }
            }
        }
        Pooling::Concat { .. } => {
            for e in 0..batch {
                for j in 0..set_size {
                    delta_phi
                        .row_mut(e * set_size + j)
                        .assign(&delta.slice(ndarray::s![e, j * width..(j + 1) * width]));
                }
            }
        }
    }

    let mut phi_grads_rev: Vec<(Array2<f64>, Array1<f64>)> = Vec::with_capacity(params.phi.len());
    let mut delta = delta_phi;
    for l in (0..params.phi.len()).rev() {
        let input_act = if l == 0 {
            &trace.input
        } else {
            &trace.phi_acts[l - 1]
        };
        let dw = delta.t().dot(input_act);
        let db = delta.sum_axis(Axis(0));
        phi_grads_rev.push((dw, db));
        if l > 0 {
            let mut prev = delta.dot(&params.phi[l].w);
            prev.zip_mut_with(&trace.phi_acts[l - 1], |d, &a| *d *= elu_prime_from_act(a));
            delta = prev;
        }
    }
    phi_grads_rev.reverse();

    (
        loss,
        Gradients {
            phi: phi_grads_rev,
            rho: rho_grads,
        },
    )
}

/// Flatten one example's observation set into a `(S, m)` matrix.
pub(crate) fn example_matrix(example: &AgentExample, input_dim: usize) -> Result<Array2<f64>> {
    let s = example.observations.len();
    let mut m = Array2::zeros((s, input_dim));
    for (j, obs) in example.observations.iter().enumerate() {
        if obs.vector.len() != input_dim {
            return Err(Error::WidthMismatch {
                expected: input_dim,
                found: obs.vector.len(),
            });
        }
        m.row_mut(j).assign(&Array1::from_vec(obs.vector.clone()));
    }
    Ok(m)
}

/// Probability the agent assigns to label 1 for a single example.
pub fn deepset_forward(params: &DeepSetParams, example: &AgentExample) -> Result<f64> {
    let input = example_matrix(example, params.input_dim)?;
    let set_size = example.observations.len();
    let trace = forward_batch(params, input, set_size);
    Ok(trace.probs[0])
}
