use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::month::Month;

use super::grid::{TimeGrid, Variable};

/// Per-(calendar month, location) mean and population standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClimatologyTable {
    pub n_locations: usize,
    /// `12 × n_locations`, row = calendar month (0 = January).
    #[serde(with = "crate::models::io::nan_as_null")]
    pub avg: Vec<f64>,
    #[serde(with = "crate::models::io::nan_as_null")]
    pub std: Vec<f64>,
    pub base_period: (Month, Month),
}

impl ClimatologyTable {
    pub fn avg(&self, calendar_month: u8, location: usize) -> f64 {
        self.avg[calendar_month as usize * self.n_locations + location]
    }

    pub fn std(&self, calendar_month: u8, location: usize) -> f64 {
        self.std[calendar_month as usize * self.n_locations + location]
    }

    pub fn avg_row(&self, calendar_month: u8) -> &[f64] {
        let n = self.n_locations;
        &self.avg[calendar_month as usize * n..(calendar_month as usize + 1) * n]
    }

    pub fn std_row(&self, calendar_month: u8) -> &[f64] {
        let n = self.n_locations;
        &self.std[calendar_month as usize * n..(calendar_month as usize + 1) * n]
    }
}

/// Climatology of `grid` over `base` (inclusive, clipped to the grid).
pub fn compute_monthly_climatology(grid: &TimeGrid, base: (Month, Month)) -> Result<ClimatologyTable> {
    let n_loc = grid.n_locations();
    let first = base.0.max(grid.start());
    let last = base.1.min(grid.end());

    let mut steps: [Vec<usize>; 12] = Default::default();
    if first <= last {
        for m in first.0..=last.0 {
            let month = Month(m);
            steps[month.calendar() as usize].push(grid.index_of(month).expect("clipped"));
        }
    }
    if let Some(cal) = steps.iter().position(Vec::is_empty) {
        return Err(Error::InsufficientCoverage(cal as u8));
    }

    let mut avg = vec![f64::NAN; 12 * n_loc];
    let mut std = vec![f64::NAN; 12 * n_loc];
    for (cal, ts) in steps.iter().enumerate() {
        let count = ts.len() as f64;
        for l in (0..n_loc).filter(|&l| grid.is_present(l)) {
            let mean = ts.iter().map(|&t| grid.row(t)[l]).sum::<f64>() / count;
            let var = ts.iter().map(|&t| (grid.row(t)[l] - mean).powi(2)).sum::<f64>() / count;
            avg[cal * n_loc + l] = mean;
            std[cal * n_loc + l] = var.sqrt();
        }
    }
    Ok(ClimatologyTable {
        n_locations: n_loc,
        avg,
        std,
        base_period: (first, last),
    })
}

/// `sst - climatology[calendar month]`, returned as an SSTA grid.
pub fn anomalies_from_sst(sst: &TimeGrid, clim: &ClimatologyTable) -> Result<TimeGrid> {
    if clim.n_locations != sst.n_locations() {
        return Err(Error::Shape(format!(
            "climatology covers {} locations, grid has {}",
            clim.n_locations,
            sst.n_locations()
        )));
    }
    let mut values = Vec::with_capacity(sst.values().len());
    for t in 0..sst.n_months() {
        let cal = sst.month_of(t).calendar();
        let avg = clim.avg_row(cal);
        values.extend(sst.row(t).iter().zip(avg).map(|(v, a)| v - a));
    }
    TimeGrid::new(Variable::Ssta, sst.start(), sst.location_ids().to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use proptest::prelude::*;

    fn grid(start: Month, n_loc: usize, values: Vec<f64>) -> TimeGrid {
        let ids = (0..n_loc).map(|i| format!("p{i}")).collect();
        TimeGrid::new(Variable::Sst, start, ids, values).unwrap()
    }

    #[test]
    fn constant_series() {
        let g = grid(Month(0), 2, vec![4.5; 2 * 36]);
        let c = compute_monthly_climatology(&g, (Month(0), Month(35))).unwrap();
        assert!(c.avg.iter().all(|&a| a == 4.5));
        assert!(c.std.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn two_year_arithmetic() {
        // month m holds m in year one and m + 12 in year two
        let g = grid(Month(0), 1, (0..24).map(f64::from).collect());
        let c = compute_monthly_climatology(&g, (Month(0), Month(23))).unwrap();
        for m in 0..12u8 {
            assert_eq!(c.avg(m, 0), f64::from(m) + 6.0);
            assert_eq!(c.std(m, 0), 6.0);
        }
    }

    #[test]
    fn missing_december() {
        let g = grid(Month(0), 1, vec![1.0; 11]);
        assert!(matches!(
            compute_monthly_climatology(&g, (Month(0), Month(10))),
            Err(Error::InsufficientCoverage(11))
        ));
    }

    #[test]
    fn own_pattern_gives_zero_anomalies_and_shape_checked() {
        let values: Vec<f64> = (0..36).map(|t| f64::from(t % 12) * 1.5).collect();
        let g = grid(Month(0), 1, values);
        let c = compute_monthly_climatology(&g, (Month(0), Month(35))).unwrap();
        let a = anomalies_from_sst(&g, &c).unwrap();
        assert!(a.values().iter().all(|&v| v == 0.0));
        assert_eq!(a.variable(), Variable::Ssta);

        let other = grid(Month(0), 2, vec![0.0; 24]);
        assert!(matches!(anomalies_from_sst(&other, &c), Err(Error::Shape(_))));
    }

    #[test]
    fn missing_stays_missing() {
        let mut values = Vec::new();
        for t in 0..24 {
            values.push(f64::from(t));
            values.push(f64::NAN);
        }
        let g = grid(Month(0), 2, values);
        let c = compute_monthly_climatology(&g, (Month(0), Month(23))).unwrap();
        let a = anomalies_from_sst(&g, &c).unwrap();
        assert_eq!(a.present(), &[true, false]);
    }

    proptest! {
        #[test]
        fn anomaly_identities(seed in any::<u64>(), years in 1usize..5, n_loc in 1usize..5, start in 0i64..24) {
            let mut s = Stream::new(seed);
            let n = years * 12 + s.below(12);
            let values: Vec<f64> = (0..n * n_loc).map(|_| 15.0 + 5.0 * s.normal()).collect();
            let g = grid(Month(start), n_loc, values);
            let base = (g.start(), g.start() + (years * 12) as i64 - 1);
            let c = compute_monthly_climatology(&g, base).unwrap();
            let a = anomalies_from_sst(&g, &c).unwrap();
            for t in 0..n {
                let cal = g.month_of(t).calendar();
                for l in 0..n_loc {
                    let back = a.row(t)[l] + c.avg(cal, l);
                    prop_assert!((back - g.row(t)[l]).abs() <= 1e-12);
                }
            }
            let ca = compute_monthly_climatology(&a, base).unwrap();
            prop_assert!(ca.avg.iter().all(|v| v.abs() <= 1e-9));
        }
    }
}
