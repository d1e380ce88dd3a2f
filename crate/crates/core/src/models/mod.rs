//! From-scratch learners.

pub mod bayes_ridge;
pub mod gbdt;
pub mod io;
pub mod mlp;
mod persistence;

pub use bayes_ridge::{fit_bayesian_ridge, predict_bayesian_ridge, BayesianRidgeConfig, BayesianRidgeModel};
pub use gbdt::{fit_gbdt, predict_gbdt, GbdtConfig, GbdtModel};
pub use mlp::{fit_mlp_classifier, predict_season, MlpConfig, MlpModel};
pub use persistence::{persistence_forecast, Persistence};
