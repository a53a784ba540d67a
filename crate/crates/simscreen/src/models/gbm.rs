//! Gradient-boosted regression trees with exact greedy splits.
//!
//! Supports squared-error regression and logistic binary classification
//! (gradient/hessian boosting with Newton leaf values). Splits are exact:
//! every midpoint of sorted distinct values is a candidate, no histogram
//! approximation. One-hot column groups can be declared so categorical
//! candidates are accumulated in one pass per tree level instead of one
//! sort-scan per column.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GbmLoss {
    SquaredError,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    pub loss: GbmLoss,
}

impl GbmParams {
    pub fn regression() -> Self {
        GbmParams {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_samples_leaf: 5,
            loss: GbmLoss::SquaredError,
        }
    }

    pub fn classification() -> Self {
        GbmParams {
            loss: GbmLoss::Logistic,
            ..GbmParams::regression()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn output(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] < *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub loss: GbmLoss,
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl GbmModel {
    /// Raw additive score before any link.
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut s = self.base_score;
        for tree in &self.trees {
            s += self.learning_rate * tree.output(row);
        }
        s
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Regression returns the raw score; classification the positive-class
/// probability, strictly inside (0, 1).
pub fn gbm_predict(model: &GbmModel, row: &[f64]) -> Result<f64> {
    if row.len() != model.n_features {
        return Err(Error::WidthMismatch {
            expected: model.n_features,
            found: row.len(),
        });
    }
    let s = model.score(row);
    Ok(match model.loss {
        GbmLoss::SquaredError => s,
        GbmLoss::Logistic => sigmoid(s),
    })
}

pub fn gbm_predict_view(model: &GbmModel, row: ArrayView1<f64>) -> Result<f64> {
    gbm_predict(model, row.as_slice().expect("contiguous row"))
}

/// Fit on an already-encoded matrix. `rng` is accepted for interface
/// uniformity; exact greedy fitting draws nothing from it.
pub fn fit_gbm(x: &Array2<f64>, y: &[f64], params: &GbmParams, rng: RngStream) -> Result<GbmModel> {
    fit_gbm_grouped(x, y, &[], params, rng)
}

/// Like [`fit_gbm`], with `one_hot_groups` marking column ranges that are
/// one-hot encodings of a single raw feature (exactly one 1 per row).
/// Width-1 ranges and uncovered columns are treated as continuous.
pub fn fit_gbm_grouped(
    x: &Array2<f64>,
    y: &[f64],
    one_hot_groups: &[(usize, usize)],
    params: &GbmParams,
    _rng: RngStream,
) -> Result<GbmModel> {
    let n = x.nrows();
    let d = x.ncols();
    if n < 2 {
        return Err(Error::EmptyData { min: 2 });
    }
    assert_eq!(y.len(), n);
    let xs = x.as_slice().expect("row-major matrix");

    let mean = y.iter().sum::<f64>() / n as f64;
    let base_score = match params.loss {
        GbmLoss::SquaredError => mean,
        GbmLoss::Logistic => {
            let p = mean.clamp(1e-6, 1.0 - 1e-6);
            (p / (1.0 - p)).ln()
        }
    };

    let cat_groups: Vec<(usize, usize)> = one_hot_groups
        .iter()
        .copied()
        .filter(|&(s, e)| e - s >= 2)
        .collect();
    let covered = |c: usize| cat_groups.iter().any(|&(s, e)| c >= s && c < e);
    let cont_cols: Vec<usize> = (0..d).filter(|&c| !covered(c)).collect();

    // Global argsort per continuous column, reused by every tree.
    let sorted_cont: Vec<Vec<u32>> = cont_cols
        .iter()
        .map(|&c| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| {
                let va = xs[a as usize * d + c];
                let vb = xs[b as usize * d + c];
                va.partial_cmp(&vb).unwrap().then(a.cmp(&b))
            });
            idx
        })
        .collect();

    // Active category per (group, row), computed once.
    let cat_of: Vec<Vec<u16>> = cat_groups
        .iter()
        .map(|&(s, e)| {
            (0..n)
                .map(|r| {
                    let mut active = 0u16;
                    for c in s..e {
                        if xs[r * d + c] > 0.5 {
                            active = (c - s) as u16;
                            break;
                        }
                    }
                    active
                })
                .collect()
        })
        .collect();

    let mut score: Vec<f64> = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut node_of: Vec<u32> = vec![0; n];
    let mut trees = Vec::with_capacity(params.n_trees);

    for _ in 0..params.n_trees {
        for i in 0..n {
            match params.loss {
                GbmLoss::SquaredError => {
                    grad[i] = y[i] - score[i];
                    hess[i] = 1.0;
                }
                GbmLoss::Logistic => {
                    let p = sigmoid(score[i]);
                    grad[i] = y[i] - p;
                    hess[i] = (p * (1.0 - p)).max(1e-12);
                }
            }
        }
        let tree = build_tree(
            xs,
            d,
            n,
            &grad,
            &hess,
            params,
            &cont_cols,
            &sorted_cont,
            &cat_groups,
            &cat_of,
            &mut node_of,
        );
        for i in 0..n {
            if let Node::Leaf { value } = tree.nodes[node_of[i] as usize] {
                score[i] += params.learning_rate * value;
            }
        }
        trees.push(tree);
    }

    Ok(GbmModel {
        base_score,
        learning_rate: params.learning_rate,
        loss: params.loss,
        n_features: d,
        trees,
    })
}

#[derive(Clone, Copy)]
struct SplitChoice {
    gain: f64,
    feature: usize,
    threshold: f64,
    left_g: f64,
    left_h: f64,
    left_n: u32,
}

struct LevelNode {
    id: u32,
    g: f64,
    h: f64,
    n: u32,
}

#[allow(clippy::too_many_arguments)]
fn build_tree(
    xs: &[f64],
    d: usize,
    n: usize,
    grad: &[f64],
    hess: &[f64],
    params: &GbmParams,
    cont_cols: &[usize],
    sorted_cont: &[Vec<u32>],
    cat_groups: &[(usize, usize)],
    cat_of: &[Vec<u16>],
    node_of: &mut [u32],
) -> Tree {
    let min_leaf = params.min_samples_leaf.max(1) as u32;
    let mut nodes: Vec<Node> = vec![Node::Leaf { value: 0.0 }];
    node_of.iter_mut().for_each(|v| *v = 0);

    let total_g: f64 = grad.iter().sum();
    let total_h: f64 = hess.iter().sum();
    let mut level = vec![LevelNode {
        id: 0,
        g: total_g,
        h: total_h,
        n: n as u32,
    }];

    for depth in 0..params.max_depth {
        let _ = depth;
        if level.is_empty() {
            break;
        }
        // Dense slot per node id for this level.
        let mut slot_of = vec![u32::MAX; nodes.len()];
        for (slot, ln) in level.iter().enumerate() {
            slot_of[ln.id as usize] = slot as u32;
        }
        let mut best: Vec<Option<SplitChoice>> = vec![None; level.len()];

        // Categorical candidates: one accumulation pass over all rows.
        if !cat_groups.is_empty() {
            let cells: usize = cat_groups.iter().map(|&(s, e)| e - s).sum();
            let mut bins: Vec<Vec<(f64, f64, u32)>> =
                level.iter().map(|_| vec![(0.0, 0.0, 0u32); cells]).collect();
            let offsets: Vec<usize> = cat_groups
                .iter()
                .scan(0usize, |acc, &(s, e)| {
                    let here = *acc;
                    *acc += e - s;
                    Some(here)
                })
                .collect();
            for r in 0..n {
                let slot = slot_of[node_of[r] as usize];
                if slot == u32::MAX {
                    continue;
                }
                let row_bins = &mut bins[slot as usize];
                for (gi, off) in offsets.iter().enumerate() {
                    let cell = &mut row_bins[off + cat_of[gi][r] as usize];
                    cell.0 += grad[r];
                    cell.1 += hess[r];
                    cell.2 += 1;
                }
            }
            for (slot, ln) in level.iter().enumerate() {
                let parent_obj = ln.g * ln.g / ln.h.max(1e-12);
                for (gi, &(s, e)) in cat_groups.iter().enumerate() {
                    for cat in 0..(e - s) {
                        let (rg, rh, rn) = bins[slot][offsets[gi] + cat];
                        let ln_ = ln.n - rn;
                        if rn < min_leaf || ln_ < min_leaf {
                            continue;
                        }
                        let lg = ln.g - rg;
                        let lh = ln.h - rh;
                        let gain =
                            lg * lg / lh.max(1e-12) + rg * rg / rh.max(1e-12) - parent_obj;
                        let candidate = SplitChoice {
                            gain,
                            feature: s + cat,
                            threshold: 0.5,
                            left_g: lg,
                            left_h: lh,
                            left_n: ln_,
                        };
                        consider(&mut best[slot], candidate);
                    }
                }
            }
        }

        // Continuous candidates: bucketize each global sorted list by
        // node, then scan boundaries between distinct values.
        let mut buckets: Vec<Vec<u32>> = level.iter().map(|ln| Vec::with_capacity(ln.n as usize)).collect();
        for (ci, &col) in cont_cols.iter().enumerate() {
            for b in &mut buckets {
                b.clear();
            }
            for &r in &sorted_cont[ci] {
                let slot = slot_of[node_of[r as usize] as usize];
                if slot != u32::MAX {
                    buckets[slot as usize].push(r);
                }
            }
            for (slot, ln) in level.iter().enumerate() {
                let rows = &buckets[slot];
                if (rows.len() as u32) < 2 * min_leaf {
                    continue;
                }
                let parent_obj = ln.g * ln.g / ln.h.max(1e-12);
                let mut lg = 0.0;
                let mut lh = 0.0;
                let mut lcount = 0u32;
                for k in 0..rows.len() - 1 {
                    let r = rows[k] as usize;
                    lg += grad[r];
                    lh += hess[r];
                    lcount += 1;
                    let v = xs[r * d + col];
                    let v_next = xs[rows[k + 1] as usize * d + col];
                    if v == v_next {
                        continue;
                    }
                    if lcount < min_leaf || ln.n - lcount < min_leaf {
                        continue;
                    }
                    let rg = ln.g - lg;
                    let rh = ln.h - lh;
                    let gain = lg * lg / lh.max(1e-12) + rg * rg / rh.max(1e-12) - parent_obj;
                    let candidate = SplitChoice {
                        gain,
                        feature: col,
                        threshold: 0.5 * (v + v_next),
                        left_g: lg,
                        left_h: lh,
                        left_n: lcount,
                    };
                    consider(&mut best[slot], candidate);
                }
            }
        }

        // Apply splits; unsplit nodes become final leaves.
        let mut next_level = Vec::new();
        for (slot, ln) in level.iter().enumerate() {
            match best[slot] {
                Some(choice) if choice.gain > 1e-12 => {
                    let left_id = nodes.len() as u32;
                    let right_id = left_id + 1;
                    nodes.push(Node::Leaf { value: 0.0 });
                    nodes.push(Node::Leaf { value: 0.0 });
                    nodes[ln.id as usize] = Node::Split {
                        feature: choice.feature,
                        threshold: choice.threshold,
                        left: left_id as usize,
                        right: right_id as usize,
                    };
                    next_level.push(LevelNode {
                        id: left_id,
                        g: choice.left_g,
                        h: choice.left_h,
                        n: choice.left_n,
                    });
                    next_level.push(LevelNode {
                        id: right_id,
                        g: ln.g - choice.left_g,
                        h: ln.h - choice.left_h,
                        n: ln.n - choice.left_n,
                    });
                }
                _ => {
                    nodes[ln.id as usize] = Node::Leaf {
                        value: ln.g / ln.h.max(1e-12),
                    };
                }
            }
        }
        // Reroute rows of split nodes to their children.
        for r in 0..n {
            let id = node_of[r] as usize;
            if let Node::Split {
                feature,
                threshold,
                left,
                right,
            } = nodes[id]
            {
                node_of[r] = if xs[r * d + feature] < threshold {
                    left as u32
                } else {
                    right as u32
                };
            }
        }
        level = next_level;
    }

    // Depth limit reached: remaining nodes are leaves.
    for ln in level {
        nodes[ln.id as usize] = Node::Leaf {
            value: ln.g / ln.h.max(1e-12),
        };
    }
    Tree { nodes }
}

fn consider(best: &mut Option<SplitChoice>, candidate: SplitChoice) {
    let better = match best {
        None => candidate.gain > 0.0,
        Some(b) => candidate.gain > b.gain + 1e-12,
    };
    if better {
        *best = Some(candidate);
    }
}
