use serde::{Deserialize, Serialize};

use crate::data::{CoordinateTable, TimeGrid};
use crate::error::{Error, Result};
use crate::features::{build_baltic_rows, FeatureMatrix, BALTIC_SEPTEMBERS};
use crate::models::{fit_bayesian_ridge, BayesianRidgeConfig, BayesianRidgeModel};
use crate::month::Month;

use super::eq1::dense;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalticConfig {
    /// Trailing windows in years, one ridge member each.
    pub windows: Vec<usize>,
    pub ridge: BayesianRidgeConfig,
}

impl Default for BalticConfig {
    fn default() -> Self {
        Self {
            windows: vec![15, 10],
            ridge: BayesianRidgeConfig::default(),
        }
    }
}

/// September-to-September ridge members averaged without corrections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalticModel {
    pub members: Vec<BayesianRidgeModel>,
    pub windows: Vec<usize>,
}

impl BalticModel {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.members.iter().map(|m| m.predict_one(row)).sum::<f64>() / self.members.len() as f64
    }
}

fn septembers(ssta: &TimeGrid) -> Vec<Month> {
    (0..ssta.n_months())
        .map(|t| ssta.month_of(t))
        .filter(|m| m.is_september())
        .collect()
}

/// One member per window; member `k` learns from the rows whose target
/// September is among the last `windows[k]` Septembers of the grid.
pub fn fit_baltic(ssta: &TimeGrid, coords: &CoordinateTable, config: &BalticConfig) -> Result<BalticModel> {
    if config.windows.is_empty() || config.windows.contains(&0) {
        return Err(Error::Config("Baltic windows must be positive".into()));
    }
    let sept = septembers(ssta);
    let longest = *config.windows.iter().max().unwrap();
    if sept.len() < longest + 1 {
        return Err(Error::InsufficientHistory(format!(
            "{} Septembers in range, need {}",
            sept.len(),
            longest + 1
        )));
    }
    // anchors with full history and a target inside the grid
    let anchors = &sept[BALTIC_SEPTEMBERS - 1..sept.len() - 1];
    let all = FeatureMatrix::concat(
        crate::features::Layout::Baltic3,
        anchors
            .iter()
            .map(|&a| build_baltic_rows(ssta, coords, a))
            .collect::<Result<Vec<_>>>()?,
    );
    let members = config
        .windows
        .iter()
        .map(|&years| {
            let first_target = sept[sept.len() - years];
            let rows = all.filter(|m| m.target_month >= first_target);
            let (x, y) = dense(&rows)?;
            fit_bayesian_ridge(&x, rows.width(), &y, &config.ridge)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BalticModel {
        members,
        windows: config.windows.clone(),
    })
}

/// Forecast for the September after `anchor_september`, one value per
/// location (NaN for absent locations).
pub fn forecast_baltic(
    model: &BalticModel,
    ssta: &TimeGrid,
    coords: &CoordinateTable,
    anchor_september: Month,
) -> Result<Vec<f64>> {
    let rows = build_baltic_rows(ssta, coords, anchor_september)?;
    let mut out = vec![f64::NAN; ssta.n_locations()];
    for r in rows.rows() {
        out[r.meta.location_index] = model.predict(r.values);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Location, Variable};
    use crate::rng::Stream;

    fn setup(n_years: usize, f: impl Fn(Month, usize) -> f64) -> (TimeGrid, CoordinateTable) {
        let start = Month::from_ym(1990, 1);
        let lats = [56.0, 58.0, 62.0];
        let ids: Vec<String> = (0..3).map(|i| format!("b{i}")).collect();
        let values = (0..n_years * 12)
            .flat_map(|t| (0..3).map(move |l| (t, l)))
            .map(|(t, l)| f(start + t as i64, l))
            .collect();
        let grid = TimeGrid::new(Variable::Ssta, start, ids.clone(), values).unwrap();
        let coords = CoordinateTable::new(
            ids.into_iter()
                .zip(lats)
                .map(|(id, latitude)| Location {
                    id,
                    latitude,
                    longitude: 19.6875,
                })
                .collect(),
        )
        .unwrap();
        (grid, coords)
    }

    #[test]
    fn constant_september_anomaly() {
        let c = 0.6;
        let mut s = Stream::new(3);
        let noise: Vec<f64> = (0..20 * 12 * 3).map(|_| s.normal()).collect();
        let (g, coords) = setup(20, |m, l| {
            if m.is_september() {
                c
            } else {
                noise[((m.0 % 240) as usize) * 3 + l]
            }
        });
        let model = fit_baltic(&g, &coords, &BalticConfig::default()).unwrap();
        let f = forecast_baltic(&model, &g, &coords, Month::from_ym(2009, 9)).unwrap();
        for v in f {
            assert!((v - c).abs() < 0.01 * c, "{v}");
        }
    }

    #[test]
    fn identical_windows_and_member_order() {
        let mut s = Stream::new(8);
        let vals: Vec<f64> = (0..20 * 12 * 3).map(|_| s.normal()).collect();
        let (g, coords) = setup(20, |m, l| vals[((m.0 - 1990 * 12) as usize) * 3 + l]);
        let same = BalticConfig {
            windows: vec![12, 12],
            ..Default::default()
        };
        let m = fit_baltic(&g, &coords, &same).unwrap();
        assert_eq!(m.members[0], m.members[1]);
        let row = [0.1, -0.4, 0.9];
        assert_eq!(m.predict(&row), m.members[0].predict_one(&row));

        let m = fit_baltic(&g, &coords, &BalticConfig::default()).unwrap();
        let swapped = BalticModel {
            members: vec![m.members[1].clone(), m.members[0].clone()],
            windows: vec![10, 15],
        };
        assert_eq!(m.predict(&row), swapped.predict(&row));
    }

    #[test]
    fn too_few_septembers() {
        let (g, coords) = setup(15, |_, _| 0.0);
        assert!(matches!(
            fit_baltic(&g, &coords, &BalticConfig::default()),
            Err(Error::InsufficientHistory(_))
        ));
    }
}
