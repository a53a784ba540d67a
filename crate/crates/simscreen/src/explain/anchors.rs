//! Rule anchors for classifiers via a simplified precision-guided beam
//! search.
//!
//! Continuous features are discretized into quantile bins; candidate
//! predicates are one-sided bounds at the bin edges plus the explained
//! point's own bin. The beam grows one predicate at a time until the
//! estimated precision (share of conditioned perturbation samples whose
//! predicted class matches the explained point) reaches the threshold.
//! Among rules that reach it, wider coverage wins.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::encode::{apply_pipeline_row, EncodingMaps};
use crate::data::schema::{FeatureKind, TabularDataset};
use crate::error::Result;
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorConfig {
    pub precision_threshold: f64,
    pub beam_width: usize,
    pub n_eval_samples: usize,
    pub bins: usize,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        AnchorConfig {
            precision_threshold: 0.95,
            beam_width: 2,
            n_eval_samples: 500,
            bins: 4,
        }
    }
}

/// A conjunction of per-feature predicates the explained point satisfies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRule {
    /// (raw feature index, required category index)
    pub categorical: Vec<(usize, usize)>,
    /// (raw feature index, lower bound, upper bound), raw units,
    /// `v >= lower` and `v < upper` where present
    pub continuous: Vec<(usize, Option<f64>, Option<f64>)>,
    pub precision: f64,
    pub coverage: f64,
    /// False when even the full conjunction missed the threshold.
    pub met_threshold: bool,
}

impl AnchorRule {
    pub fn satisfied_by(&self, row: &[f64]) -> bool {
        self.categorical
            .iter()
            .all(|&(j, cat)| row[j] as usize == cat)
            && self.continuous.iter().all(|&(j, lo, hi)| {
                lo.map_or(true, |l| row[j] >= l) && hi.map_or(true, |h| row[j] < h)
            })
    }

    fn anchored(&self, j: usize) -> bool {
        self.categorical.iter().any(|&(f, _)| f == j)
            || self.continuous.iter().any(|&(f, _, _)| f == j)
    }

    fn predicate_count(&self) -> usize {
        self.categorical.len() + self.continuous.len()
    }
}

#[derive(Debug, Clone)]
enum Predicate {
    Category(usize, usize),
    Range(usize, Option<f64>, Option<f64>),
}

/// Explain `predict`'s class at `x_raw` with an anchor rule. `predict`
/// consumes pipeline-encoded rows and returns the positive-class
/// probability; perturbation rows are drawn from `ds` with anchored
/// features pinned to predicate-satisfying values.
pub fn anchors_explain(
    predict: &(dyn Fn(&[f64]) -> f64 + Sync),
    x_raw: &[f64],
    ds: &TabularDataset,
    maps: &EncodingMaps,
    cfg: &AnchorConfig,
    rng: RngStream,
) -> Result<AnchorRule> {
    let schema = &ds.schema;
    let d = schema.feature_count();
    assert_eq!(x_raw.len(), d);
    let encode = |raw: &[f64]| apply_pipeline_row(raw, schema, maps);
    let target_class = predict(encode(x_raw)?.as_slice().unwrap()) >= 0.5;

    // Quantile bin edges per continuous feature, raw units.
    let edges: Vec<Vec<f64>> = (0..d)
        .map(|j| match &schema.features[j].1 {
            FeatureKind::Categorical { .. } => Vec::new(),
            FeatureKind::Continuous => quantile_edges(ds.rows.column(j).to_vec(), cfg.bins),
        })
        .collect();

    let mut eval_counter = 0u64;
    let mut evaluate = |rule: &AnchorRule| -> Result<(f64, f64)> {
        eval_counter += 1;
        let precision = estimate_precision(
            predict,
            target_class,
            rule,
            ds,
            &encode,
            cfg.n_eval_samples,
            rng.child(eval_counter),
        )?;
        let covered = (0..ds.len())
            .filter(|&i| rule.satisfied_by(ds.rows.row(i).as_slice().unwrap()))
            .count();
        Ok((precision, covered as f64 / ds.len().max(1) as f64))
    };

    // The empty rule first: a constant model needs no predicates.
    let mut empty = AnchorRule {
        categorical: Vec::new(),
        continuous: Vec::new(),
        precision: 0.0,
        coverage: 1.0,
        met_threshold: false,
    };
    let (p, c) = evaluate(&empty)?;
    empty.precision = p;
    empty.coverage = c;
    if p >= cfg.precision_threshold {
        empty.met_threshold = true;
        return Ok(empty);
    }

    let mut beam = vec![empty];
    for _step in 0..d {
        let mut expanded: Vec<AnchorRule> = Vec::new();
        for rule in &beam {
            for j in 0..d {
                if rule.anchored(j) {
                    continue;
                }
                for predicate in candidates(j, x_raw[j], &schema.features[j].1, &edges[j]) {
                    let mut next = rule.clone();
                    match predicate {
                        Predicate::Category(f, cat) => next.categorical.push((f, cat)),
                        Predicate::Range(f, lo, hi) => next.continuous.push((f, lo, hi)),
                    }
                    let (p, c) = evaluate(&next)?;
                    next.precision = p;
                    next.coverage = c;
                    expanded.push(next);
                }
            }
        }
        if expanded.is_empty() {
            break;
        }
        // Rules meeting the threshold compete on coverage.
        let winner = expanded
            .iter()
            .filter(|r| r.precision >= cfg.precision_threshold)
            .max_by(|a, b| {
                a.coverage
                    .partial_cmp(&b.coverage)
                    .unwrap()
                    .then(a.precision.partial_cmp(&b.precision).unwrap())
            });
        if let Some(w) = winner {
            let mut w = w.clone();
            w.met_threshold = true;
            return Ok(w);
        }
        expanded.sort_by(|a, b| {
            b.precision
                .partial_cmp(&a.precision)
                .unwrap()
                .then(b.coverage.partial_cmp(&a.coverage).unwrap())
                .then(a.predicate_count().cmp(&b.predicate_count()))
        });
        expanded.truncate(cfg.beam_width);
        beam = expanded;
    }

    // Full conjunction still under the threshold: return it, flagged.
    let mut fallback = beam.into_iter().next().expect("beam never empties");
    fallback.met_threshold = false;
    Ok(fallback)
}

/// Candidate predicates for one feature: its category for categoricals;
/// one-sided bounds at each bin edge plus the point's own bin for
/// continuous features.
fn candidates(j: usize, value: f64, kind: &FeatureKind, edges: &[f64]) -> Vec<Predicate> {
    match kind {
        FeatureKind::Categorical { .. } => vec![Predicate::Category(j, value as usize)],
        FeatureKind::Continuous => {
            let mut out = Vec::new();
            let mut lower = None;
            let mut upper = None;
            for &e in edges {
                if e <= value {
                    out.push(Predicate::Range(j, Some(e), None));
                    lower = Some(e);
                } else {
                    out.push(Predicate::Range(j, None, Some(e)));
                    if upper.is_none() {
                        upper = Some(e);
                    }
                }
            }
            if lower.is_some() && upper.is_some() {
                out.push(Predicate::Range(j, lower, upper));
            }
            out
        }
    }
}

fn quantile_edges(mut values: Vec<f64>, bins: usize) -> Vec<f64> {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    let mut edges = Vec::new();
    for b in 1..bins.max(1) {
        let rank = (n * b) / bins;
        if rank == 0 || rank >= n {
            continue;
        }
        let edge = 0.5 * (values[rank - 1] + values[rank]);
        if values[rank - 1] < values[rank] && edges.last().map_or(true, |&e| edge > e) {
            edges.push(edge);
        }
    }
    edges
}

fn estimate_precision(
    predict: &(dyn Fn(&[f64]) -> f64 + Sync),
    target_class: bool,
    rule: &AnchorRule,
    ds: &TabularDataset,
    encode: &dyn Fn(&[f64]) -> Result<ndarray::Array1<f64>>,
    n_samples: usize,
    rng: RngStream,
) -> Result<f64> {
    let mut rng = rng.rng();
    let n = ds.len();
    // Pool of predicate-satisfying values per anchored continuous feature.
    let pools: Vec<(usize, Vec<f64>)> = rule
        .continuous
        .iter()
        .map(|&(j, lo, hi)| {
            let pool: Vec<f64> = ds
                .rows
                .column(j)
                .iter()
                .copied()
                .filter(|&v| lo.map_or(true, |l| v >= l) && hi.map_or(true, |h| v < h))
                .collect();
            (j, pool)
        })
        .collect();

    let mut hits = 0usize;
    let mut raw = vec![0.0; ds.schema.feature_count()];
    for _ in 0..n_samples {
        let base = rng.gen_range(0..n);
        raw.copy_from_slice(ds.rows.row(base).as_slice().unwrap());
        for &(j, cat) in &rule.categorical {
            raw[j] = cat as f64;
        }
        for (j, pool) in &pools {
            raw[*j] = if pool.is_empty() {
                // no training row satisfies the bound; fall back to an
                // in-range synthetic value (midpoint of the predicate)
                let (_, lo, hi) = rule
                    .continuous
                    .iter()
                    .find(|(f, _, _)| f == j)
                    .copied()
                    .unwrap();
                match (lo, hi) {
                    (Some(l), Some(h)) => 0.5 * (l + h),
                    (Some(l), None) => l,
                    (None, Some(h)) => h - 1e-9,
                    (None, None) => raw[*j],
                }
            } else {
                pool[rng.gen_range(0..pool.len())]
            };
        }
        let class = predict(encode(&raw)?.as_slice().unwrap()) >= 0.5;
        if class == target_class {
            hits += 1;
        }
    }
    Ok(hits as f64 / n_samples as f64)
}
