//! Local explanation of a GAM: the model's own per-feature terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::gam::GamModel;

/// Per-feature additive contributions at one point. The identity
/// `intercept + sum(contributions) = score(x)` is exact (score space;
/// equal to the prediction itself under the identity link).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamExplanation {
    pub contributions: Vec<f64>,
    pub intercept: f64,
}

pub fn gam_local(model: &GamModel, x: &[f64]) -> Result<GamExplanation> {
    if x.len() != model.shapes.len() {
        return Err(Error::WidthMismatch {
            expected: model.shapes.len(),
            found: x.len(),
        });
    }
    Ok(GamExplanation {
        contributions: model
            .shapes
            .iter()
            .zip(x)
            .map(|(shape, &v)| shape.lookup(v))
            .collect(),
        intercept: model.intercept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::{FeatureKind, FeatureSchema, TabularDataset, TargetKind};
    use crate::models::gam::{fit_gam, GamParams};
    use crate::rng::RngStream;
    use ndarray::Array2;
    use rand::Rng;

    fn fitted_quadratic() -> (GamModel, TabularDataset) {
        let n = 4000;
        let mut rng = RngStream::new(11, 0).rng();
        let rows = Array2::from_shape_fn((n, 2), |_| rng.gen::<f64>());
        let y: Vec<f64> = (0..n)
            .map(|i| 2.0 * rows[[i, 0]] + rows[[i, 1]].powi(2))
            .collect();
        let schema = FeatureSchema::new(
            vec![
                ("x0".into(), FeatureKind::Continuous),
                ("x1".into(), FeatureKind::Continuous),
            ],
            TargetKind::Regression,
        );
        let ds = TabularDataset::new(schema, rows, y).unwrap();
        let m = fit_gam(&ds, &GamParams::default(), RngStream::new(0, 0)).unwrap();
        (m, ds)
    }

    #[test]
    fn sum_identity_is_exact() {
        let (m, ds) = fitted_quadratic();
        for i in (0..ds.len()).step_by(97) {
            let row = ds.rows.row(i);
            let row = row.as_slice().unwrap();
            let e = gam_local(&m, row).unwrap();
            // fold from the intercept so the association matches score()
            let total = e.contributions.iter().fold(e.intercept, |acc, c| acc + c);
            assert_eq!(total, m.score(row).unwrap());
        }
    }

    #[test]
    fn zero_valued_bin_contributes_zero() {
        use crate::models::gam::{GamLink, ShapeFn};
        let m = GamModel {
            intercept: 3.0,
            link: GamLink::Identity,
            shapes: vec![ShapeFn::Binned {
                edges: vec![1.0],
                values: vec![0.0, 5.0],
            }],
        };
        let e = gam_local(&m, &[0.5]).unwrap();
        assert_eq!(e.contributions[0], 0.0);
        assert_eq!(e.intercept + e.contributions[0], 3.0);
    }

    #[test]
    fn monotone_component_orders_contributions() {
        let (m, _) = fitted_quadratic();
        let at = |x0: f64| gam_local(&m, &[x0, 0.5]).unwrap().contributions[0];
        assert!(at(0.9) > 0.0);
        assert!(at(0.9) > at(0.1));
    }

    #[test]
    fn width_mismatch_rejected() {
        let (m, _) = fitted_quadratic();
        assert!(gam_local(&m, &[0.1]).is_err());
    }
}
