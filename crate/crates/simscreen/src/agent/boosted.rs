//! Alternative agent for the architecture ablation: a boosted-tree
//! classifier over flattened observation sets, behind the same
//! train/eval surface as the set network.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::models::gbm::{fit_gbm, gbm_predict, GbmModel, GbmParams};
use crate::rng::RngStream;
use crate::usecase::types::AgentDataset;

pub fn train_boosted_agent(
    data: &AgentDataset,
    params: &GbmParams,
    rng: RngStream,
) -> Result<GbmModel> {
    if data.train.is_empty() {
        return Err(Error::EmptyData { min: 1 });
    }
    let s = data.set_size();
    let m = data.observation_width();
    let mut x = Array2::zeros((data.train.len(), s * m));
    let mut y = vec![0.0; data.train.len()];
    for (e, example) in data.train.iter().enumerate() {
        y[e] = example.label as f64;
        for (j, obs) in example.observations.iter().enumerate() {
            for (c, v) in obs.vector.iter().enumerate() {
                x[[e, j * m + c]] = *v;
            }
        }
    }
    let mut params = params.clone();
    params.loss = crate::models::gbm::GbmLoss::Logistic;
    fit_gbm(&x, &y, &params, rng)
}

pub fn eval_boosted_agent(model: &GbmModel, data: &AgentDataset) -> Result<f64> {
    if data.test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let s = data.set_size();
    let m = data.observation_width();
    let mut correct = 0usize;
    let mut row = vec![0.0; s * m];
    for example in &data.test {
        for (j, obs) in example.observations.iter().enumerate() {
            row[j * m..(j + 1) * m].copy_from_slice(&obs.vector);
        }
        let p = gbm_predict(model, &row)?;
        if (p >= 0.5) as u8 == example.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.test.len() as f64)
}
