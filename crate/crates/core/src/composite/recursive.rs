//! Chained forecasting beyond a model's trained offset.
//!
//! With base offset `B` and anchor `T` (last observed month), round `r`
//! forecasts months `T+B(r−1)+1 ..= T+Br`. Forecast SSTA rows are appended
//! to the working series before the next round; the other variables keep
//! their last observed twelve months.

use crate::data::{Block, ObservedSource, Variable, WINDOW};
use crate::error::{Error, Result};
use crate::month::Month;

use super::BlockPredictor;

/// How the months inside one round are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ChainMode {
    /// One model at the base offset: month `m` comes from the window ending
    /// at `m − B`.
    #[default]
    Shared,
    /// Offset-specific models: every month of a round comes from the window
    /// ending at the round start, with offsets `1..=B`.
    PerOffset,
}

/// Dispatches on the block's target offset (index 0 = offset 1).
pub struct OffsetPredictors<P> {
    pub by_offset: Vec<P>,
}

impl<P: BlockPredictor> BlockPredictor for OffsetPredictors<P> {
    fn predict_block(&self, block: &Block<'_>) -> Result<Vec<f64>> {
        let p = block
            .target_offset
            .checked_sub(1)
            .and_then(|i| self.by_offset.get(i))
            .ok_or_else(|| Error::Config(format!("no model for offset {}", block.target_offset)))?;
        p.predict_block(block)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecursiveOutcome {
    pub anchor: Month,
    pub target_month: Month,
    pub forecast: Vec<f64>,
    pub rounds: usize,
    /// Every forecast month in order, including the intermediate ones.
    pub predicted: Vec<(Month, Vec<f64>)>,
}

pub fn recursive_forecast<P, S>(
    predictor: &P,
    source: &S,
    anchor: Month,
    target_offset: usize,
    base_offset: usize,
    mode: ChainMode,
) -> Result<RecursiveOutcome>
where
    P: BlockPredictor + ?Sized,
    S: ObservedSource + ?Sized,
{
    if base_offset == 0 || target_offset == 0 || !target_offset.is_multiple_of(base_offset) {
        return Err(Error::UnsupportedOffset {
            offset: target_offset,
            base: base_offset,
        });
    }
    if anchor < source.start() || anchor > source.end() {
        return Err(Error::MonthOutOfRange(anchor));
    }
    let b = base_offset as i64;
    let w = WINDOW as i64;
    let first_end = match mode {
        ChainMode::Shared => anchor - (b - 1),
        ChainMode::PerOffset => anchor,
    };
    let earliest = first_end - (w - 1);
    if earliest < source.start() {
        return Err(Error::InsufficientHistory(format!(
            "chaining from {anchor} needs observations from {earliest}"
        )));
    }
    let n_loc = source.location_ids().len();
    let read = |v: Variable, m: Month| -> Result<Vec<f64>> {
        let row = source.row(v, m).ok_or(Error::MonthOutOfRange(m))?;
        if row.len() != n_loc {
            return Err(Error::Shape(format!("{v} row has {} values, expected {n_loc}", row.len())));
        }
        Ok(row.to_vec())
    };

    // working SSTA series from `earliest`, observed part first
    let mut ssta: Vec<Vec<f64>> = (0..=(anchor - earliest))
        .map(|k| read(Variable::Ssta, earliest + k))
        .collect::<Result<_>>()?;
    let aux: Vec<(Variable, Vec<Vec<f64>>)> = Variable::ALL
        .into_iter()
        .filter(|&v| v != Variable::Ssta && source.has_variable(v))
        .map(|v| {
            let rows = (0..=(anchor - earliest))
                .map(|k| read(v, earliest + k))
                .collect::<Result<Vec<_>>>()?;
            Ok((v, rows))
        })
        .collect::<Result<_>>()?;

    let flatten = |rows: &[Vec<f64>], end: Month| -> Vec<f64> {
        let last = (end - earliest) as usize;
        rows[last + 1 - WINDOW..=last].concat()
    };

    let rounds = target_offset / base_offset;
    let mut predicted = Vec::with_capacity(target_offset);
    for r in 0..rounds as i64 {
        let round_start = anchor + b * r;
        let mut round = Vec::with_capacity(base_offset);
        for j in 1..=b {
            let target = round_start + j;
            let (end, offset) = match mode {
                ChainMode::Shared => (target - b, base_offset),
                ChainMode::PerOffset => (round_start, j as usize),
            };
            let ssta_window = flatten(&ssta, end);
            let aux_windows: Vec<(Variable, Vec<f64>)> = aux
                .iter()
                .map(|(v, rows)| (*v, flatten(rows, end.min(anchor))))
                .collect();
            let mut block = Block::new(end - (w - 1), WINDOW, offset, n_loc).with_window(Variable::Ssta, &ssta_window)?;
            for (v, data) in &aux_windows {
                block = block.with_window(*v, data)?;
            }
            debug_assert_eq!(block.target_month(), target);
            let row = predictor.predict_block(&block)?;
            if row.len() != n_loc {
                return Err(Error::Shape(format!(
                    "predictor returned {} values for {n_loc} locations",
                    row.len()
                )));
            }
            round.push((target, row));
        }
        for (m, row) in round {
            ssta.push(row.clone());
            predicted.push((m, row));
        }
    }
    let target_month = anchor + target_offset as i64;
    let forecast = predicted.last().map(|(_, r)| r.clone()).unwrap_or_default();
    Ok(RecursiveOutcome {
        anchor,
        target_month,
        forecast,
        rounds,
        predicted,
    })
}
