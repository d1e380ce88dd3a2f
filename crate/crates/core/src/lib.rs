//! Sea surface temperature anomaly (SSTA) forecasting toolkit.
//!
//! The crate covers the whole pipeline for challenge-shaped monthly grids:
//!
//! - [`data`]: CSV ingestion, climatology and anomalies, 12-month blocks and
//!   the lattice neighbor index.
//! - [`features`]: the tabular row layouts (`RG48`, `UD50`, `UD74`, `BALTIC3`)
//!   and the seasonal pseudolabel dataset.
//! - [`models`]: Bayesian ridge regression (evidence maximization), a small
//!   MLP classifier, gradient-boosted regression trees and persistence.
//! - [`composite`]: the two-window ridge composite with local/global
//!   corrections, weighted ensembles, the September variant and chained
//!   multi-step forecasting.
//! - [`evaluation`]: RMSE, skill against persistence, per-year tables,
//!   diagnostics curves and SVG charts.
//! - [`synth`]: seeded synthetic grids with the same shape as the real data.
//! - [`pipeline`]: the orchestration behind the `ssta` command line tool.

pub mod composite;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod models;
pub mod month;
pub mod pipeline;
pub mod rng;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
pub use month::Month;
