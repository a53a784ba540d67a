//! The algorithmic agent: a set network trained to predict use-case
//! labels from encoded observations (Steps 2 and 3 of the framework).

pub mod boosted;
pub mod eval;
pub mod gradcheck;
pub mod network;
pub mod train;

pub use boosted::{eval_boosted_agent, train_boosted_agent};
pub use eval::eval_agent;
pub use gradcheck::grad_check;
pub use network::{deepset_forward, init_deepset, DeepSetParams, Pooling};
pub use train::{train_agent, TrainConfig, TrainHistory};
