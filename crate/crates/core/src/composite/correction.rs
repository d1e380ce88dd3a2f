use serde::{Deserialize, Serialize};

use crate::data::TimeGrid;
use crate::error::{Error, Result};
use crate::month::Month;

/// Mean SSTA per calendar month and location over a trailing period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTable {
    pub location_ids: Vec<String>,
    /// `12 × L`, row = calendar month (0 = January); NaN for absent locations.
    #[serde(with = "crate::models::io::nan_as_null")]
    pub values: Vec<f64>,
    pub period: (Month, Month),
}

impl CorrectionTable {
    pub fn n_locations(&self) -> usize {
        self.location_ids.len()
    }

    /// `season` is 1..=12.
    pub fn get(&self, season: u8, location: usize) -> Result<f64> {
        if !(1..=12).contains(&season) {
            return Err(Error::Range(format!("season {season} outside 1..=12")));
        }
        let n = self.n_locations();
        if location >= n {
            return Err(Error::UnknownLocation(format!("#{location}")));
        }
        let v = self.values[(season as usize - 1) * n + location];
        if v.is_nan() {
            return Err(Error::UnknownLocation(self.location_ids[location].clone()));
        }
        Ok(v)
    }
}

/// Per-(calendar month, location) mean over the last `trailing_years · 12`
/// months of the grid.
pub fn compute_local_correction(ssta: &TimeGrid, trailing_years: usize) -> Result<CorrectionTable> {
    let span = trailing_years * 12;
    if trailing_years == 0 || ssta.n_months() < span {
        return Err(Error::InsufficientHistory(format!(
            "correction needs {span} months, grid has {}",
            ssta.n_months()
        )));
    }
    let n = ssta.n_locations();
    let first_t = ssta.n_months() - span;
    let mut values = vec![0.0; 12 * n];
    for t in first_t..ssta.n_months() {
        let m = ssta.month_of(t).calendar() as usize;
        for (acc, v) in values[m * n..(m + 1) * n].iter_mut().zip(ssta.row(t)) {
            *acc += v;
        }
    }
    for v in &mut values {
        *v /= trailing_years as f64;
    }
    Ok(CorrectionTable {
        location_ids: ssta.location_ids().to_vec(),
        values,
        period: (ssta.month_of(first_t), ssta.end()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Variable;

    fn grid(n_months: usize, f: impl Fn(Month) -> f64) -> TimeGrid {
        let start = Month::from_ym(2000, 1);
        let values = (0..n_months).map(|t| f(start + t as i64)).collect();
        TimeGrid::new(Variable::Ssta, start, vec!["a".into()], values).unwrap()
    }

    #[test]
    fn zero_anomalies() {
        let t = compute_local_correction(&grid(120, |_| 0.0), 10).unwrap();
        assert!(t.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn january_only() {
        let t = compute_local_correction(&grid(120, |m| if m.calendar() == 0 { 0.5 } else { 0.0 }), 10).unwrap();
        assert_eq!(t.get(1, 0).unwrap(), 0.5);
        for s in 2..=12 {
            assert_eq!(t.get(s, 0).unwrap(), 0.0);
        }
        assert!(matches!(t.get(1, 3), Err(Error::UnknownLocation(_))));
    }

    #[test]
    fn trailing_mean_exceeds_full_mean_under_trend() {
        let g = grid(360, |m| 0.01 * (m.0 - 24000) as f64);
        let trailing = compute_local_correction(&g, 10).unwrap();
        let full = compute_local_correction(&g, 30).unwrap();
        for s in 1..=12 {
            assert!(trailing.get(s, 0).unwrap() > full.get(s, 0).unwrap());
        }
        assert_eq!(trailing.period, (Month::from_ym(2020, 1), Month::from_ym(2029, 12)));
    }

    #[test]
    fn short_grid() {
        assert!(matches!(
            compute_local_correction(&grid(119, |_| 0.0), 10),
            Err(Error::InsufficientHistory(_))
        ));
    }
}
