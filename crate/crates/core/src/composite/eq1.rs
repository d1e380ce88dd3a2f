use serde::{Deserialize, Serialize};

use crate::data::{build_neighbor_map, extract_blocks, Block, CoordinateTable, Dataset, NeighborMap, Variable, WINDOW};
use crate::error::{Error, Result};
use crate::features::{build_rg48_matrix, build_rg48_rows, normalize_row, FeatureMatrix, FeatureRow, Layout};
use crate::models::{fit_bayesian_ridge, predict_season, BayesianRidgeConfig, BayesianRidgeModel, MlpModel};

use super::correction::{compute_local_correction, CorrectionTable};
use super::BlockPredictor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeConfig {
    pub short_years: usize,
    pub long_years: usize,
    pub trailing_correction_years: usize,
    pub c_global: f64,
    pub target_offset: usize,
    pub ridge: BayesianRidgeConfig,
}

impl Default for CompositeConfig {
    fn default() -> Self {
        Self {
            short_years: 3,
            long_years: 9,
            trailing_correction_years: 10,
            c_global: 0.1,
            target_offset: 3,
            ridge: BayesianRidgeConfig::default(),
        }
    }
}

/// Where the season used by the local correction comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SeasonSource {
    /// Calendar month of the block's target.
    KnownCalendar,
    /// Classifier on the normalized last SST row of the window. `columns`
    /// are the grid columns the classifier was trained on.
    Classifier { model: MlpModel, columns: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeModel {
    pub model_short: BayesianRidgeModel,
    pub model_long: BayesianRidgeModel,
    pub correction: CorrectionTable,
    pub c_global: f64,
    pub target_offset: usize,
    pub season_source: SeasonSource,
}

/// The four terms of the composite forecast for one row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eq1Parts {
    pub p_short: f64,
    pub p_long: f64,
    pub c_local: f64,
    pub c_global: f64,
}

impl Eq1Parts {
    pub fn combined(&self) -> f64 {
        (self.p_short + self.p_long) / 2.0 + (self.c_local + self.c_global) / 2.0
    }

    /// The ridge average alone.
    pub fn uncorrected(&self) -> f64 {
        (self.p_short + self.p_long) / 2.0
    }
}

impl CompositeModel {
    pub fn parts(&self, row: FeatureRow<'_>) -> Result<Eq1Parts> {
        if row.layout != Layout::Rg48 {
            return Err(Error::Layout(format!("composite expects RG48 rows, got {}", row.layout)));
        }
        let season = row
            .meta
            .season
            .ok_or_else(|| Error::Layout("row has no season".into()))?;
        Ok(Eq1Parts {
            p_short: self.model_short.predict_one(row.values),
            p_long: self.model_long.predict_one(row.values),
            c_local: self.correction.get(season, row.meta.location_index)?,
            c_global: self.c_global,
        })
    }
}

pub fn predict_composite(model: &CompositeModel, row: FeatureRow<'_>) -> Result<f64> {
    Ok(model.parts(row)?.combined())
}

/// Fits both ridge members on the RG48 rows whose target month falls in the
/// trailing `short_years` / `long_years` of `train`, plus the correction.
pub fn fit_composite(train: &Dataset, config: &CompositeConfig) -> Result<CompositeModel> {
    if config.short_years == 0 || config.long_years == 0 {
        return Err(Error::Config("training windows must be at least one year".into()));
    }
    let needed = 12 * (config.short_years.max(config.long_years) + 1);
    if train.n_months() < needed {
        return Err(Error::InsufficientHistory(format!(
            "composite needs {needed} training months, got {}",
            train.n_months()
        )));
    }
    let nmap = build_neighbor_map(train.coords())?;
    let longest = config.short_years.max(config.long_years);
    let first_target = train.end() - (12 * longest as i64 - 1);
    let blocks: Vec<_> = extract_blocks(train, WINDOW, config.target_offset, 1)?
        .into_iter()
        .filter(|(b, t)| t.is_some() && b.target_month() >= first_target)
        .collect();
    let matrix = build_rg48_matrix(&blocks, &nmap, train.coords())?;
    log::debug!("composite training rows: {} ({} skipped)", matrix.n_rows(), matrix.skipped);

    let fit_years = |years: usize| -> Result<BayesianRidgeModel> {
        let first = train.end() - (12 * years as i64 - 1);
        let rows = matrix.filter(|m| m.target_month >= first);
        let (x, y) = dense(&rows)?;
        fit_bayesian_ridge(&x, rows.width(), &y, &config.ridge)
    };
    let model_short = fit_years(config.short_years)?;
    let model_long = if config.long_years == config.short_years {
        model_short.clone()
    } else {
        fit_years(config.long_years)?
    };
    let correction = compute_local_correction(train.ssta(), config.trailing_correction_years)?;
    Ok(CompositeModel {
        model_short,
        model_long,
        correction,
        c_global: config.c_global,
        target_offset: config.target_offset,
        season_source: SeasonSource::KnownCalendar,
    })
}

/// Rows with a target, as a dense design matrix and target vector.
pub(crate) fn dense(rows: &FeatureMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut x = Vec::with_capacity(rows.values().len());
    let mut y = Vec::with_capacity(rows.n_rows());
    for (i, r) in rows.rows().enumerate() {
        if let Some(t) = rows.targets()[i] {
            x.extend_from_slice(r.values);
            y.push(t);
        }
    }
    if y.is_empty() {
        return Err(Error::EmptyTraining);
    }
    Ok((x, y))
}

/// [`CompositeModel`] bound to the coordinates it forecasts for.
pub struct CompositeForecaster<'a> {
    model: &'a CompositeModel,
    coords: &'a CoordinateTable,
    nmap: NeighborMap,
    corrected: bool,
}

impl<'a> CompositeForecaster<'a> {
    /// `coords` must list the model's locations in the same order.
    pub fn new(model: &'a CompositeModel, coords: &'a CoordinateTable) -> Result<Self> {
        let ids = &model.correction.location_ids;
        if coords.len() != ids.len() {
            return Err(Error::Shape(format!(
                "model has {} locations, coordinates {}",
                ids.len(),
                coords.len()
            )));
        }
        if let Some(loc) = coords.entries().iter().zip(ids).find(|(loc, id)| loc.id != **id) {
            return Err(Error::UnknownLocation(loc.0.id.clone()));
        }
        Ok(Self {
            model,
            coords,
            nmap: build_neighbor_map(coords)?,
            corrected: true,
        })
    }

    /// Drops both correction terms (the plain ridge average).
    pub fn without_corrections(mut self) -> Self {
        self.corrected = false;
        self
    }

    fn season_for(&self, block: &Block<'_>) -> Result<u8> {
        match &self.model.season_source {
            SeasonSource::KnownCalendar => Ok(block.target_month().calendar() + 1),
            SeasonSource::Classifier { model, columns } => {
                let last = block.require(Variable::Sst)?.last_row();
                let picked: Vec<f64> = columns.iter().map(|&c| last[c]).collect();
                let observed = predict_season(model, &normalize_row(&picked))?;
                Ok(((observed as usize - 1 + block.target_offset) % 12 + 1) as u8)
            }
        }
    }
}

impl BlockPredictor for CompositeForecaster<'_> {
    fn predict_block(&self, block: &Block<'_>) -> Result<Vec<f64>> {
        let mut rows = build_rg48_rows(block, None, &self.nmap, self.coords)?;
        let season = self.season_for(block)?;
        for m in rows.meta_mut() {
            m.season = Some(season);
        }
        let mut out = vec![f64::NAN; block.n_locations()];
        for r in rows.rows() {
            let parts = self.model.parts(r)?;
            out[r.meta.location_index] = if self.corrected {
                parts.combined()
            } else {
                parts.uncorrected()
            };
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::RowMeta;
    use crate::month::Month;

    fn ridge(weights: Vec<f64>, intercept: f64) -> BayesianRidgeModel {
        let d = weights.len();
        BayesianRidgeModel {
            weights,
            intercept,
            alpha: 1.0,
            lambda: 1.0,
            n_iterations: 0,
            converged: true,
            x_mean: vec![0.0; d],
            posterior_vectors: vec![0.0; d * d],
            posterior_scales: vec![0.0; d],
        }
    }

    fn model(p_short: f64, p_long: f64, c_local: f64, c_global: f64) -> CompositeModel {
        CompositeModel {
            model_short: ridge(vec![0.0; 48], p_short),
            model_long: ridge(vec![0.0; 48], p_long),
            correction: CorrectionTable {
                location_ids: vec!["a".into()],
                values: vec![c_local; 12],
                period: (Month(0), Month(11)),
            },
            c_global,
            target_offset: 3,
            season_source: SeasonSource::KnownCalendar,
        }
    }

    fn meta(location_index: usize) -> RowMeta {
        RowMeta {
            location_index,
            latitude: 0.0,
            longitude: 0.0,
            season: Some(4),
            target_month: Month(3),
        }
    }

    fn row<'a>(values: &'a [f64], meta: &'a RowMeta) -> FeatureRow<'a> {
        FeatureRow {
            layout: Layout::Rg48,
            values,
            meta,
        }
    }

    #[test]
    fn substitution_example() {
        let m = model(0.4, 0.4, 0.2, 0.1);
        let x = [0.0; 48];
        let meta = meta(0);
        let got = predict_composite(&m, row(&x, &meta)).unwrap();
        assert!((got - 0.55).abs() < 1e-15);
    }

    #[test]
    fn no_corrections_and_identical_members() {
        let m = model(0.7, 0.7, 0.0, 0.0);
        let x = [1.0; 48];
        let meta = meta(0);
        assert_eq!(predict_composite(&m, row(&x, &meta)).unwrap(), 0.7);
    }

    #[test]
    fn unknown_location() {
        let m = model(0.0, 0.0, 0.0, 0.1);
        let x = [0.0; 48];
        let meta = meta(5);
        assert!(matches!(
            predict_composite(&m, row(&x, &meta)),
            Err(Error::UnknownLocation(_))
        ));
    }

    #[test]
    fn shift_passes_through() {
        let x = [0.3; 48];
        let meta = meta(0);
        for delta in [-1.25, 0.0, 0.5, 3.0] {
            let base = model(0.25, -0.5, 0.125, 0.1);
            let shifted = model(0.25 + delta, -0.5 + delta, 0.125, 0.1);
            let a = predict_composite(&base, row(&x, &meta)).unwrap();
            let b = predict_composite(&shifted, row(&x, &meta)).unwrap();
            assert!((b - a - delta).abs() < 1e-12);
        }
    }
}
