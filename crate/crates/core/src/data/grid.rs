use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::month::Month;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variable {
    Ssta,
    Sst,
    Mslp,
    T2m,
}

impl Variable {
    pub const ALL: [Variable; 4] = [Variable::Ssta, Variable::Sst, Variable::Mslp, Variable::T2m];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Variable::Ssta => "SSTA",
            Variable::Sst => "SST",
            Variable::Mslp => "MSLP",
            Variable::T2m => "T2M",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SSTA" => Ok(Variable::Ssta),
            "SST" => Ok(Variable::Sst),
            "MSLP" => Ok(Variable::Mslp),
            "T2M" => Ok(Variable::T2m),
            _ => Err(Error::Config(format!("unknown variable '{s}'"))),
        }
    }
}

/// Dense `months × locations` matrix of one variable, row-major.
///
/// A location is either present at every month or absent at every month
/// (land, masked). Absent columns hold NaN internally and are reported as
/// `None` by [`TimeGrid::get`]; the presence mask is the missing flag.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    variable: Variable,
    start: Month,
    location_ids: Vec<String>,
    present: Vec<bool>,
    values: Vec<f64>,
}

impl TimeGrid {
    /// Builds a grid from row-major values. Non-finite cells mark missing
    /// data and must cover whole columns.
    pub fn new(
        variable: Variable,
        start: Month,
        location_ids: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let n_loc = location_ids.len();
        if n_loc == 0 || values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !values.len().is_multiple_of(n_loc) {
            return Err(Error::Shape(format!(
                "{} values do not fill rows of {n_loc} locations",
                values.len()
            )));
        }
        let n_months = values.len() / n_loc;
        let mut present = vec![true; n_loc];
        for (l, flag) in present.iter_mut().enumerate() {
            let missing = (0..n_months)
                .filter(|&t| !values[t * n_loc + l].is_finite())
                .count();
            if missing == n_months {
                *flag = false;
            } else if missing > 0 {
                return Err(Error::PartialMissing(location_ids[l].clone()));
            }
        }
        let mut values = values;
        for t in 0..n_months {
            for (l, &p) in present.iter().enumerate() {
                if !p {
                    values[t * n_loc + l] = f64::NAN;
                }
            }
        }
        Ok(Self {
            variable,
            start,
            location_ids,
            present,
            values,
        })
    }

    pub fn variable(&self) -> Variable {
        self.variable
    }

    pub fn with_variable(mut self, variable: Variable) -> Self {
        self.variable = variable;
        self
    }

    pub fn start(&self) -> Month {
        self.start
    }

    /// Last month covered (inclusive).
    pub fn end(&self) -> Month {
        self.start + (self.n_months() as i64 - 1)
    }

    pub fn n_months(&self) -> usize {
        self.values.len() / self.location_ids.len()
    }

    pub fn n_locations(&self) -> usize {
        self.location_ids.len()
    }

    pub fn location_ids(&self) -> &[String] {
        &self.location_ids
    }

    pub fn present(&self) -> &[bool] {
        &self.present
    }

    pub fn is_present(&self, location: usize) -> bool {
        self.present[location]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn month_of(&self, t: usize) -> Month {
        self.start + t as i64
    }

    pub fn index_of(&self, month: Month) -> Option<usize> {
        let offset = month - self.start;
        (offset >= 0 && (offset as usize) < self.n_months()).then_some(offset as usize)
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let n = self.n_locations();
        &self.values[t * n..(t + 1) * n]
    }

    /// Contiguous block of `len` rows starting at row `t`.
    pub fn rows(&self, t: usize, len: usize) -> &[f64] {
        let n = self.n_locations();
        &self.values[t * n..(t + len) * n]
    }

    pub fn row_at(&self, month: Month) -> Option<&[f64]> {
        self.index_of(month).map(|t| self.row(t))
    }

    pub fn get(&self, t: usize, location: usize) -> Option<f64> {
        self.present[location].then(|| self.values[t * self.n_locations() + location])
    }

    pub fn column(&self, location: usize) -> impl Iterator<Item = f64> + '_ {
        let n = self.n_locations();
        self.values.iter().skip(location).step_by(n).copied()
    }

    /// Keeps only the listed locations, in the given order.
    pub fn select_locations(&self, keep: &[usize]) -> Result<TimeGrid> {
        let n = self.n_locations();
        let mut values = Vec::with_capacity(self.n_months() * keep.len());
        for t in 0..self.n_months() {
            values.extend(keep.iter().map(|&l| self.values[t * n + l]));
        }
        let ids = keep.iter().map(|&l| self.location_ids[l].clone()).collect();
        TimeGrid::new(self.variable, self.start, ids, values)
    }

    /// Rows `first..=last` (months), clipped to the grid.
    pub fn slice_months(&self, first: Month, last: Month) -> Result<TimeGrid> {
        let lo = first.max(self.start);
        let hi = last.min(self.end());
        if hi < lo {
            return Err(Error::MonthOutOfRange(first));
        }
        let t0 = (lo - self.start) as usize;
        let len = (hi - lo + 1) as usize;
        Ok(TimeGrid {
            variable: self.variable,
            start: lo,
            location_ids: self.location_ids.clone(),
            present: self.present.clone(),
            values: self.rows(t0, len).to_vec(),
        })
    }

    /// Appends one month. Absent locations stay absent whatever the input.
    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_locations() {
            return Err(Error::Shape(format!(
                "row of {} values for {} locations",
                row.len(),
                self.n_locations()
            )));
        }
        for (l, &v) in row.iter().enumerate() {
            if self.present[l] && !v.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite value appended at present location '{}'",
                    self.location_ids[l]
                )));
            }
            self.values.push(if self.present[l] { v } else { f64::NAN });
        }
        Ok(())
    }
}
