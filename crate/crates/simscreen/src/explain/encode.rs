//! Flat observation vectors for the agent.
//!
//! An observation concatenates named spans in a fixed order decided by
//! the use case and the explanation type:
//!
//! * attribution-style explanations (surrogate weights, Shapley values,
//!   GAM contributions): `[data-point | prediction? | explanation]`,
//!   plus a 3-value extension (intercept, weight sum, surrogate
//!   prediction) for the forward-simulation surrogate setting;
//! * anchors: `[data-point | prediction? | per-categorical (match,
//!   anchored) then per-continuous (lower, upper, anchored)]` with
//!   unanchored bounds filled by the 0/1 sentinels of the scaled space;
//! * baseline: `[data-point | prediction?]`.
//!
//! Forward simulation carries no prediction span: there the base model's
//! output is the label itself. The data-point span is the one-hot
//! encoded, min-max scaled representation.

use serde::{Deserialize, Serialize};

use crate::data::encode::{apply_pipeline_row, EncodingMaps};
use crate::data::schema::{FeatureKind, FeatureSchema};
use crate::error::{Error, Result};
use crate::explain::anchors::AnchorRule;
use crate::explain::gam_local::GamExplanation;
use crate::explain::lime::SurrogateExplanation;
use crate::explain::shap::ShapleyExplanation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UseCaseKind {
    ForwardSim,
    Counterfactual,
    DataBugs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Explanation {
    Surrogate(SurrogateExplanation),
    Shapley(ShapleyExplanation),
    Gam(GamExplanation),
    Anchor(AnchorRule),
}

/// Named spans of an observation vector, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationLayout {
    pub spans: Vec<(String, usize)>,
}

impl ObservationLayout {
    pub fn total(&self) -> usize {
        self.spans.iter().map(|(_, n)| n).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedObservation {
    pub vector: Vec<f64>,
    pub layout: ObservationLayout,
}

pub fn encode_observation(
    kind: UseCaseKind,
    x_raw: &[f64],
    pred: Option<f64>,
    expl: Option<&Explanation>,
    schema: &FeatureSchema,
    maps: &EncodingMaps,
) -> Result<EncodedObservation> {
    let mut vector = Vec::new();
    let mut spans = Vec::new();

    let point = apply_pipeline_row(x_raw, schema, maps)?;
    spans.push(("data-point".to_string(), point.len()));
    vector.extend(point.iter());

    match (kind, pred) {
        (UseCaseKind::ForwardSim, None) => {}
        (UseCaseKind::ForwardSim, Some(_)) => {
            return Err(Error::LayoutMismatch(
                "forward simulation observations carry no prediction span".into(),
            ));
        }
        (_, Some(p)) => {
            spans.push(("prediction".to_string(), 1));
            vector.push(p);
        }
        (_, None) => {
            return Err(Error::MissingField {
                kind: format!("{kind:?}"),
                field: "prediction".into(),
            });
        }
    }

    match expl {
        None => {}
        Some(Explanation::Surrogate(s)) => {
            if s.weights.len() != maps.encoded_width() {
                return Err(Error::LayoutMismatch(format!(
                    "surrogate weights span {} but encoded width is {}",
                    s.weights.len(),
                    maps.encoded_width()
                )));
            }
            spans.push(("explanation".to_string(), s.weights.len()));
            vector.extend_from_slice(&s.weights);
            if kind == UseCaseKind::ForwardSim {
                spans.push(("extension".to_string(), 3));
                vector.push(s.intercept);
                vector.push(s.weight_sum);
                vector.push(s.local_pred);
            }
        }
        Some(Explanation::Shapley(s)) => {
            expect_group_len(s.values.len(), schema)?;
            spans.push(("explanation".to_string(), s.values.len()));
            vector.extend_from_slice(&s.values);
        }
        Some(Explanation::Gam(g)) => {
            expect_group_len(g.contributions.len(), schema)?;
            spans.push(("explanation".to_string(), g.contributions.len()));
            vector.extend_from_slice(&g.contributions);
        }
        Some(Explanation::Anchor(rule)) => {
            let start = vector.len();
            for (j, (_, feature_kind)) in schema.features.iter().enumerate() {
                match feature_kind {
                    FeatureKind::Categorical { .. } => {
                        let anchored = rule.categorical.iter().find(|(f, _)| *f == j);
                        let matches = anchored
                            .map(|&(_, cat)| x_raw[j] as usize == cat)
                            .unwrap_or(false);
                        vector.push(if matches { 1.0 } else { 0.0 });
                        vector.push(if anchored.is_some() { 1.0 } else { 0.0 });
                    }
                    FeatureKind::Continuous => {
                        let col = maps.one_hot_groups[j].0;
                        let bound = rule.continuous.iter().find(|(f, _, _)| *f == j);
                        match bound {
                            Some(&(_, lo, hi)) => {
                                vector.push(lo.map_or(0.0, |v| maps.scale_value(col, v)));
                                vector.push(hi.map_or(1.0, |v| maps.scale_value(col, v)));
                                vector.push(1.0);
                            }
                            None => {
                                vector.push(0.0);
                                vector.push(1.0);
                                vector.push(0.0);
                            }
                        }
                    }
                }
            }
            spans.push(("explanation".to_string(), vector.len() - start));
        }
    }

    Ok(EncodedObservation {
        vector,
        layout: ObservationLayout { spans },
    })
}

fn expect_group_len(len: usize, schema: &FeatureSchema) -> Result<()> {
    if len != schema.feature_count() {
        return Err(Error::LayoutMismatch(format!(
            "explanation has {len} per-feature values but the schema lists {}",
            schema.feature_count()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::encode::fit_pipeline;
    use crate::data::schema::{TabularDataset, TargetKind};
    use ndarray::array;

    fn saddle_like() -> (FeatureSchema, EncodingMaps) {
        let schema = FeatureSchema::new(
            vec![
                ("x1".into(), FeatureKind::Continuous),
                ("x2".into(), FeatureKind::Continuous),
            ],
            TargetKind::Regression,
        );
        let ds = TabularDataset::new(
            schema.clone(),
            array![[10.0, 10.0], [15.0, 15.0]],
            vec![0.0, 1.0],
        )
        .unwrap();
        let (_, maps) = fit_pipeline(&ds).unwrap();
        (schema, maps)
    }

    fn mixed_schema() -> (FeatureSchema, EncodingMaps) {
        // 2 categorical + 3 continuous
        let schema = FeatureSchema::new(
            vec![
                (
                    "c0".into(),
                    FeatureKind::Categorical {
                        categories: vec!["a".into(), "b".into()],
                    },
                ),
                (
                    "c1".into(),
                    FeatureKind::Categorical {
                        categories: vec!["u".into(), "v".into(), "w".into()],
                    },
                ),
                ("n0".into(), FeatureKind::Continuous),
                ("n1".into(), FeatureKind::Continuous),
                ("n2".into(), FeatureKind::Continuous),
            ],
            TargetKind::BinaryClass,
        );
        let ds = TabularDataset::new(
            schema.clone(),
            array![[0.0, 0.0, 0.0, 0.0, 0.0], [1.0, 2.0, 1.0, 2.0, 4.0]],
            vec![0.0, 1.0],
        )
        .unwrap();
        let (_, maps) = fit_pipeline(&ds).unwrap();
        (schema, maps)
    }

    #[test]
    fn counterfactual_surrogate_is_x_pred_weights() {
        let (schema, maps) = saddle_like();
        let expl = Explanation::Surrogate(SurrogateExplanation {
            weights: vec![3.0, -2.0],
            intercept: 1.0,
            weight_sum: 1.0,
            local_pred: 4.0,
        });
        let obs = encode_observation(
            UseCaseKind::Counterfactual,
            &[12.0, 13.0],
            Some(31.0),
            Some(&expl),
            &schema,
            &maps,
        )
        .unwrap();
        assert_eq!(obs.vector.len(), 5);
        assert_eq!(obs.vector[2], 31.0);
        assert_eq!(&obs.vector[3..], &[3.0, -2.0]);
        assert_eq!(obs.layout.total(), 5);
    }

    #[test]
    fn forward_sim_surrogate_gains_extension() {
        let (schema, maps) = saddle_like();
        let expl = Explanation::Surrogate(SurrogateExplanation {
            weights: vec![3.0, -2.0],
            intercept: 1.0,
            weight_sum: 1.0,
            local_pred: 4.0,
        });
        let obs = encode_observation(
            UseCaseKind::ForwardSim,
            &[12.0, 13.0],
            None,
            Some(&expl),
            &schema,
            &maps,
        )
        .unwrap();
        // d features -> 2d + 3
        assert_eq!(obs.vector.len(), 2 * 2 + 3);
        assert_eq!(&obs.vector[4..], &[1.0, 1.0, 4.0]);
    }

    #[test]
    fn anchors_span_is_two_per_categorical_three_per_continuous() {
        let (schema, maps) = mixed_schema();
        let rule = AnchorRule {
            categorical: vec![(1, 2)],
            continuous: vec![(2, Some(0.5), None)],
            precision: 0.97,
            coverage: 0.4,
            met_threshold: true,
        };
        let obs = encode_observation(
            UseCaseKind::ForwardSim,
            &[0.0, 2.0, 0.9, 1.0, 2.0],
            None,
            Some(&Explanation::Anchor(rule)),
            &schema,
            &maps,
        )
        .unwrap();
        let expl_span = obs
            .layout
            .spans
            .iter()
            .find(|(n, _)| n == "explanation")
            .unwrap()
            .1;
        assert_eq!(expl_span, 2 * 2 + 3 * 3);
        assert!(expl_span <= 2 * schema.categorical_count() + 3 * schema.continuous_count());
        // unanchored continuous features carry the 0/1 sentinels
        let base = obs.layout.spans[0].1; // no prediction span for forward sim
        let cont2 = &obs.vector[base + 4 + 3..base + 4 + 6];
        assert_eq!(cont2, &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn baseline_lengths_follow_the_kind() {
        let (schema, maps) = mixed_schema();
        let fwd = encode_observation(UseCaseKind::ForwardSim, &[0.0, 1.0, 0.5, 0.5, 0.5], None, None, &schema, &maps)
            .unwrap();
        assert_eq!(fwd.vector.len(), schema.encoded_width());
        let bugs = encode_observation(
            UseCaseKind::DataBugs,
            &[0.0, 1.0, 0.5, 0.5, 0.5],
            Some(0.25),
            None,
            &schema,
            &maps,
        )
        .unwrap();
        assert_eq!(bugs.vector.len(), schema.encoded_width() + 1);
    }

    #[test]
    fn missing_prediction_is_an_error() {
        let (schema, maps) = saddle_like();
        let err = encode_observation(
            UseCaseKind::Counterfactual,
            &[12.0, 13.0],
            None,
            None,
            &schema,
            &maps,
        );
        assert!(matches!(err, Err(Error::MissingField { .. })));
    }
}
