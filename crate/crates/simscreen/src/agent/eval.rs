//! Test-set evaluation: predict 1 when the output is at least one half.

use crate::error::{Error, Result};
use crate::usecase::types::{AgentDataset, AgentExample};

use super::network::{example_matrix, forward_batch, DeepSetParams};

pub(crate) fn accuracy_on(params: &DeepSetParams, examples: &[AgentExample]) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let mut correct = 0usize;
    for example in examples {
        let input = example_matrix(example, params.input_dim)?;
        let set_size = example.observations.len();
        let trace = forward_batch(params, input, set_size);
        let predicted = (trace.probs[0] >= 0.5) as u8;
        if predicted == example.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / examples.len() as f64)
}

/// Accuracy on the dataset's test partition.
pub fn eval_agent(params: &DeepSetParams, data: &AgentDataset) -> Result<f64> {
    if data.observation_width() != params.input_dim {
        return Err(Error::LayoutMismatch(format!(
            "network expects width {}, dataset observations are {}",
            params.input_dim,
            data.observation_width()
        )));
    }
    accuracy_on(params, &data.test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::network::{init_deepset, Pooling};
    use crate::explain::encode::{EncodedObservation, ObservationLayout};
    use crate::usecase::types::Provenance;

    fn dataset(labels: &[u8]) -> AgentDataset {
        let layout = ObservationLayout {
            spans: vec![("data-point".into(), 2)],
        };
        let test: Vec<AgentExample> = labels
            .iter()
            .map(|&label| AgentExample {
                observations: vec![EncodedObservation {
                    vector: vec![label as f64, 0.5],
                    layout: layout.clone(),
                }],
                label,
            })
            .collect();
        AgentDataset::assemble(
            test.clone(),
            test,
            Provenance {
                use_case: "toy".into(),
                setting: "baseline".into(),
                generator_digest: String::new(),
                seed: 0,
            },
        )
        .unwrap()
    }

    #[test]
    fn constant_half_output_predicts_all_ones() {
        let mut params = init_deepset(2, Pooling::Sum, RngStream::new(0, 0));
        for layer in params.phi.iter_mut().chain(params.rho.iter_mut()) {
            layer.w.fill(0.0);
            layer.b.fill(0.0);
        }
        // sigmoid(0) = 0.5, ties predict positive
        let data = dataset(&[1, 1, 0, 0, 1]);
        let acc = eval_agent(&params, &data).unwrap();
        assert_eq!(acc, 3.0 / 5.0);
    }

    #[test]
    fn empty_test_set_is_an_error_not_nan() {
        let mut data = dataset(&[0, 1]);
        data.test.clear();
        let params = init_deepset(2, Pooling::Sum, RngStream::new(0, 0));
        assert!(matches!(eval_agent(&params, &data), Err(Error::EmptyTestSet)));
    }

    #[test]
    fn layout_mismatch_reported() {
        let data = dataset(&[0, 1]);
        let params = init_deepset(3, Pooling::Sum, RngStream::new(0, 0));
        assert!(matches!(
            eval_agent(&params, &data),
            Err(Error::LayoutMismatch(_))
        ));
    }

    use crate::rng::RngStream;
}
