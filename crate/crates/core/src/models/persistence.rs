use crate::composite::BlockPredictor;
use crate::data::Block;
use crate::error::Result;

/// Last observed SSTA row of the window, whatever the horizon.
pub fn persistence_forecast(block: &Block<'_>) -> Result<Vec<f64>> {
    Ok(block.ssta()?.last_row().to_vec())
}

/// The challenge baseline as a [`BlockPredictor`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Persistence;

impl BlockPredictor for Persistence {
    fn predict_block(&self, block: &Block<'_>) -> Result<Vec<f64>> {
        persistence_forecast(block)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Variable, WINDOW};
    use crate::month::Month;

    #[test]
    fn repeats_last_row_for_any_offset() {
        let mut values = vec![0.0; WINDOW * 2];
        values[22] = 0.3;
        values[23] = -0.1;
        let b3 = Block::new(Month(0), WINDOW, 3, 2)
            .with_window(Variable::Ssta, &values)
            .unwrap();
        let mut b9 = b3.clone();
        b9.target_offset = 9;
        assert_eq!(persistence_forecast(&b3).unwrap(), vec![0.3, -0.1]);
        assert_eq!(persistence_forecast(&b9).unwrap(), persistence_forecast(&b3).unwrap());
    }
}
