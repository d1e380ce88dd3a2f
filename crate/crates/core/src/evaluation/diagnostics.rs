use crate::data::TimeGrid;
use crate::error::{Error, Result};

/// RMSE of predicting `value(t)` by `value(t − N)` for `N = 1..=max_n`,
/// pooled over every valid `t` and present location.
pub fn persistence_horizon_curve(grid: &TimeGrid, max_n: usize) -> Result<Vec<f64>> {
    let t_len = grid.n_months();
    if max_n == 0 || max_n >= t_len {
        return Err(Error::Range(format!("horizon {max_n} needs 1 ≤ N < {t_len}")));
    }
    (1..=max_n)
        .map(|n| {
            let (mut sse, mut count) = (0.0, 0usize);
            for t in n..t_len {
                for (a, b) in grid.row(t).iter().zip(grid.row(t - n)) {
                    if !a.is_nan() && !b.is_nan() {
                        sse += (a - b) * (a - b);
                        count += 1;
                    }
                }
            }
            if count == 0 {
                Err(Error::EmptyComparison)
            } else {
                Ok((sse / count as f64).sqrt())
            }
        })
        .collect()
}

/// Mean over present locations and the twelve months of every complete
/// calendar year in the grid.
pub fn annual_global_mean(grid: &TimeGrid) -> Vec<(i64, f64)> {
    let first = (0..grid.n_months()).find(|&t| grid.month_of(t).calendar() == 0);
    let Some(mut t) = first else { return Vec::new() };
    let mut out = Vec::new();
    while t + 12 <= grid.n_months() {
        let (mut sum, mut count) = (0.0, 0usize);
        for k in t..t + 12 {
            for v in grid.row(k).iter().filter(|v| !v.is_nan()) {
                sum += v;
                count += 1;
            }
        }
        if count > 0 {
            out.push((grid.month_of(t).year(), sum / count as f64));
        }
        t += 12;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Variable;
    use crate::month::Month;

    fn grid(n_months: usize, n_loc: usize, start: Month, f: impl Fn(usize, usize) -> f64) -> TimeGrid {
        let values = (0..n_months * n_loc).map(|i| f(i / n_loc, i % n_loc)).collect();
        let ids = (0..n_loc).map(|l| format!("p{l}")).collect();
        TimeGrid::new(Variable::Sst, start, ids, values).unwrap()
    }

    #[test]
    fn constant_grid_curve_is_zero() {
        let g = grid(40, 3, Month(0), |_, _| 4.0);
        assert!(persistence_horizon_curve(&g, 24).unwrap().iter().all(|&v| v == 0.0));
        assert!(persistence_horizon_curve(&g, 40).is_err());
    }

    #[test]
    fn sinusoid_curve() {
        // uniform phases over locations; amplitude 2
        let a = 2.0;
        let n_loc = 24;
        let g = grid(480, n_loc, Month(0), |t, l| {
            a * (2.0 * std::f64::consts::PI * (t as f64 / 12.0 + l as f64 / n_loc as f64)).sin()
        });
        let c = persistence_horizon_curve(&g, 12).unwrap();
        assert!(c[11] < 1e-9);
        // |sin(x) − sin(x − π)| = 2|sin x|, RMS over phase = A·√2
        assert!((c[5] - a * 2f64.sqrt()).abs() < 1e-9);
        for n in 0..11 {
            assert!(c[n] <= c[5] + 1e-12);
        }
    }

    #[test]
    fn annual_means() {
        let g = grid(36, 2, Month::from_ym(2000, 1), |_, _| 1.5);
        assert_eq!(annual_global_mean(&g), vec![(2000, 1.5), (2001, 1.5), (2002, 1.5)]);
        let g = grid(18, 2, Month::from_ym(2000, 1), |_, _| 1.0);
        assert_eq!(annual_global_mean(&g).len(), 1);
        let g = grid(18, 1, Month::from_ym(2000, 7), |_, _| 1.0);
        assert_eq!(annual_global_mean(&g), vec![(2001, 1.0)]);
        let g = grid(120, 2, Month::from_ym(2000, 1), |t, _| 0.02 * t as f64 / 12.0);
        let s = annual_global_mean(&g);
        assert!(s.windows(2).all(|w| w[1].1 > w[0].1));
    }
}
