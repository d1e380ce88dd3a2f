//! Forecasters assembled from fitted models.

mod baltic;
mod correction;
mod eq1;
mod ensemble;
mod recursive;
mod ud;

use crate::data::Block;
use crate::error::Result;

pub use baltic::{fit_baltic, forecast_baltic, BalticConfig, BalticModel};
pub use correction::{compute_local_correction, CorrectionTable};
pub use eq1::{
    fit_composite, predict_composite, CompositeConfig, CompositeForecaster, CompositeModel, Eq1Parts, SeasonSource,
};
pub use ensemble::{ensemble_predict, EnsembleSpec};
pub use recursive::{recursive_forecast, ChainMode, OffsetPredictors, RecursiveOutcome};
pub use ud::{fit_ud, UdConfig, UdForecaster, UdMember, UdMemberKind, UdModel};

/// Anything that maps one block to a forecast per location.
///
/// The returned vector has one entry per block location; locations that
/// cannot be forecast (missing inputs) hold NaN.
pub trait BlockPredictor: Sync {
    fn predict_block(&self, block: &Block<'_>) -> Result<Vec<f64>>;
}

impl<P: BlockPredictor + ?Sized> BlockPredictor for &P {
    fn predict_block(&self, block: &Block<'_>) -> Result<Vec<f64>> {
        (**self).predict_block(block)
    }
}
