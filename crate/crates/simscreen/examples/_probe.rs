use simscreen::agent::network::{init_deepset, Pooling};
use simscreen::agent::{eval_agent, train_agent, TrainConfig};
use simscreen::rng::RngStream;
use simscreen::usecase::counterfactual::*;
use simscreen::usecase::types::ExplanationSetting;

fn main() {
    for setting in [ExplanationSetting::Surrogate, ExplanationSetting::Baseline] {
        for n_train in [4usize, 16] {
            let mut accs = Vec::new();
            for seed in [1u64, 2, 3, 4, 5] {
                let cfg = CounterfactualConfig { n_train, n_test: 250, ..CounterfactualConfig::default() };
                let (ds, _) = gen_counterfactual(&cfg, setting, RngStream::new(seed, 0)).unwrap();
                let params = init_deepset(ds.observation_width(), Pooling::Sum, RngStream::new(seed, 101));
                let tc = TrainConfig { weight_decay: 1e-4, epochs: 1000, rng: RngStream::new(seed, 102), ..TrainConfig::default() };
                let (trained, _) = train_agent(&params, &ds, &tc).unwrap();
                accs.push(eval_agent(&trained, &ds).unwrap());
            }
            let mean3 = (accs[0] + accs[1] + accs[2]) / 3.0;
            println!("{:?} n={n_train}: {:?} mean(seeds 1-3)={mean3:.3}", setting, accs.iter().map(|a| format!("{a:.3}")).collect::<Vec<_>>());
        }
    }
}
