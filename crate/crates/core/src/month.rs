use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Absolute month index, proleptic: `12 * year + (month - 1)`.
///
/// Files carry no timestamps, so every grid is anchored by the caller with a
/// start month.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Month(pub i64);

impl Month {
    /// January 1940, the first month of the challenge training data.
    pub const CHALLENGE_START: Month = Month(1940 * 12);

    /// `month` is 1-based (1 = January).
    pub fn from_ym(year: i64, month: u32) -> Month {
        assert!((1..=12).contains(&month), "month must be 1..=12");
        Month(year * 12 + i64::from(month) - 1)
    }

    pub fn year(self) -> i64 {
        self.0.div_euclid(12)
    }

    /// Calendar month, 0 = January .. 11 = December.
    pub fn calendar(self) -> u8 {
        self.0.rem_euclid(12) as u8
    }

    pub fn is_september(self) -> bool {
        self.calendar() == 8
    }
}

impl Add<i64> for Month {
    type Output = Month;
    fn add(self, rhs: i64) -> Month {
        Month(self.0 + rhs)
    }
}

impl Sub<i64> for Month {
    type Output = Month;
    fn sub(self, rhs: i64) -> Month {
        Month(self.0 - rhs)
    }
}

impl Sub<Month> for Month {
    type Output = i64;
    fn sub(self, rhs: Month) -> i64 {
        self.0 - rhs.0
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.calendar() + 1)
    }
}

impl FromStr for Month {
    type Err = Error;

    /// Parses `YYYY-MM`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("expected YYYY-MM, got '{s}'"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        let year: i64 = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        if !(1..=12).contains(&month) {
            return Err(bad());
        }
        Ok(Month::from_ym(year, month))
    }
}
