use serde::{Deserialize, Serialize};

use crate::data::{compute_monthly_climatology, extract_blocks, Block, ClimatologyTable, CoordinateTable, Dataset, WINDOW};
use crate::error::{Error, Result};
use crate::features::{augment_ud74, build_ud50_rows, build_ud_matrix, Layout};
use crate::models::{fit_bayesian_ridge, fit_gbdt, BayesianRidgeConfig, BayesianRidgeModel, GbdtConfig, GbdtModel};

use super::eq1::dense;
use super::ensemble::{ensemble_predict, EnsembleSpec};
use super::BlockPredictor;

/// Per-location tabular ensemble: two boosted-tree members and a ridge
/// member on UD50 or UD74 rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UdConfig {
    pub layout: Layout,
    pub target_offset: usize,
    pub block_stride: usize,
    pub gbdt: GbdtConfig,
    pub gbdt_alt: GbdtConfig,
    pub ridge: BayesianRidgeConfig,
    /// Weights of `gbdt`, `gbdt_alt` and `ridge`, in that order.
    pub weights: [f64; 3],
}

impl Default for UdConfig {
    fn default() -> Self {
        Self {
            layout: Layout::Ud74,
            target_offset: 3,
            block_stride: 1,
            gbdt: GbdtConfig::default(),
            gbdt_alt: GbdtConfig {
                max_depth: 4,
                learning_rate: 0.1,
                subsample: 0.8,
                seed: 1,
                ..GbdtConfig::default()
            },
            ridge: BayesianRidgeConfig::default(),
            weights: [0.5, 0.5, 0.12],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum UdMemberKind {
    Gbdt(GbdtModel),
    Ridge(BayesianRidgeModel),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UdMember {
    pub name: String,
    pub kind: UdMemberKind,
}

impl UdMember {
    pub fn predict(&self, row: &[f64]) -> f64 {
        match &self.kind {
            UdMemberKind::Gbdt(m) => m.predict_one(row),
            UdMemberKind::Ridge(m) => m.predict_one(row),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UdModel {
    pub layout: Layout,
    pub target_offset: usize,
    pub location_ids: Vec<String>,
    pub climatology: Option<ClimatologyTable>,
    pub members: Vec<UdMember>,
    pub ensemble: EnsembleSpec,
}

pub fn fit_ud(train: &Dataset, config: &UdConfig) -> Result<UdModel> {
    let climatology = match config.layout {
        Layout::Ud50 => None,
        Layout::Ud74 => Some(compute_monthly_climatology(train.ssta(), (train.start(), train.end()))?),
        other => return Err(Error::Layout(format!("UD ensemble cannot use {other}"))),
    };
    let blocks: Vec<_> = extract_blocks(train, WINDOW, config.target_offset, config.block_stride)?
        .into_iter()
        .filter(|(_, t)| t.is_some())
        .collect();
    let matrix = build_ud_matrix(&blocks, train.coords(), climatology.as_ref())?;
    log::debug!("UD training rows: {} ({} skipped)", matrix.n_rows(), matrix.skipped);
    let (x, y) = dense(&matrix)?;
    let d = matrix.width();
    let members = vec![
        UdMember {
            name: "gbdt".into(),
            kind: UdMemberKind::Gbdt(fit_gbdt(&x, d, &y, &config.gbdt)?),
        },
        UdMember {
            name: "gbdt_alt".into(),
            kind: UdMemberKind::Gbdt(fit_gbdt(&x, d, &y, &config.gbdt_alt)?),
        },
        UdMember {
            name: "ridge".into(),
            kind: UdMemberKind::Ridge(fit_bayesian_ridge(&x, d, &y, &config.ridge)?),
        },
    ];
    let ensemble = EnsembleSpec::new(
        members
            .iter()
            .zip(config.weights)
            .map(|(m, w)| (m.name.clone(), w))
            .collect(),
    )?;
    Ok(UdModel {
        layout: config.layout,
        target_offset: config.target_offset,
        location_ids: train.ssta().location_ids().to_vec(),
        climatology,
        members,
        ensemble,
    })
}

pub struct UdForecaster<'a> {
    model: &'a UdModel,
    coords: &'a CoordinateTable,
}

impl<'a> UdForecaster<'a> {
    pub fn new(model: &'a UdModel, coords: &'a CoordinateTable) -> Result<Self> {
        if coords.len() != model.location_ids.len() {
            return Err(Error::Shape(format!(
                "model has {} locations, coordinates {}",
                model.location_ids.len(),
                coords.len()
            )));
        }
        if let Some((loc, _)) = coords
            .entries()
            .iter()
            .zip(&model.location_ids)
            .find(|(loc, id)| loc.id != **id)
        {
            return Err(Error::UnknownLocation(loc.id.clone()));
        }
        Ok(Self { model, coords })
    }
}

impl BlockPredictor for UdForecaster<'_> {
    fn predict_block(&self, block: &Block<'_>) -> Result<Vec<f64>> {
        let mut rows = build_ud50_rows(block, None, self.coords)?;
        if let Some(c) = &self.model.climatology {
            rows = augment_ud74(&rows, c)?;
        }
        let mut out = vec![f64::NAN; block.n_locations()];
        let mut preds = vec![0.0; self.model.members.len()];
        for r in rows.rows() {
            for (p, m) in preds.iter_mut().zip(&self.model.members) {
                *p = m.predict(r.values);
            }
            out[r.meta.location_index] = ensemble_predict(&self.model.ensemble, &preds)?;
        }
        Ok(out)
    }
}
