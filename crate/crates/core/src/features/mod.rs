//! Tabular feature layouts built from blocks.
//!
//! | layout    | width | content                                               |
//! |-----------|-------|-------------------------------------------------------|
//! | `RG48`    | 48    | 12 SSTA lags, then neighbor mean, max, min per lag    |
//! | `UD50`    | 50    | SSTA, SST, MSLP, T2M windows (12 each), lat, lon      |
//! | `UD74`    | 74    | `UD50` + climatological SSTA avg and std per month    |
//! | `BALTIC3` | 3     | SSTA of three consecutive Septembers                  |
//!
//! Row order is block-major, then location index, independent of threading.

mod baltic;
mod rg48;
mod seasonal;
mod ud;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::format_value;
use crate::error::{Error, Result};
use crate::month::Month;

pub use baltic::{build_baltic_row, build_baltic_rows, BALTIC_SEPTEMBERS};
pub use rg48::{build_rg48_matrix, build_rg48_rows};
pub use seasonal::{build_seasonal_dataset, normalize_row, SeasonalDataset};
pub use ud::{augment_ud74, build_ud50_rows, build_ud_matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layout {
    Rg48,
    Ud50,
    Ud74,
    Baltic3,
}

impl Layout {
    pub fn width(self) -> usize {
        match self {
            Layout::Rg48 => 48,
            Layout::Ud50 => 50,
            Layout::Ud74 => 74,
            Layout::Baltic3 => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Layout::Rg48 => "RG48",
            Layout::Ud50 => "UD50",
            Layout::Ud74 => "UD74",
            Layout::Baltic3 => "BALTIC3",
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Layout {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RG48" => Ok(Layout::Rg48),
            "UD50" => Ok(Layout::Ud50),
            "UD74" => Ok(Layout::Ud74),
            "BALTIC3" => Ok(Layout::Baltic3),
            _ => Err(Error::Config(format!("unknown layout '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowMeta {
    pub location_index: usize,
    pub latitude: f64,
    pub longitude: f64,
    /// Calendar month of the target, 1..=12, when known.
    pub season: Option<u8>,
    pub target_month: Month,
}

/// One tabular row: the feature vector and where/when it applies.
#[derive(Clone, Copy, Debug)]
pub struct FeatureRow<'a> {
    pub layout: Layout,
    pub values: &'a [f64],
    pub meta: &'a RowMeta,
}

/// Dense row-major feature table with optional targets.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    layout: Layout,
    values: Vec<f64>,
    meta: Vec<RowMeta>,
    targets: Vec<Option<f64>>,
    /// Rows not emitted because an input was missing.
    pub skipped: usize,
}

impl FeatureMatrix {
    pub fn new(layout: Layout) -> Self {
        Self {
            layout,
            values: Vec::new(),
            meta: Vec::new(),
            targets: Vec::new(),
            skipped: 0,
        }
    }

    pub fn push(&mut self, values: &[f64], meta: RowMeta, target: Option<f64>) {
        assert_eq!(values.len(), self.layout.width(), "row width must match layout");
        self.values.extend_from_slice(values);
        self.meta.push(meta);
        self.targets.push(target);
    }

    /// Appends all rows of `other`, which must share the layout.
    pub fn extend(&mut self, other: FeatureMatrix) {
        assert_eq!(self.layout, other.layout);
        self.values.extend(other.values);
        self.meta.extend(other.meta);
        self.targets.extend(other.targets);
        self.skipped += other.skipped;
    }

    pub fn concat(layout: Layout, parts: impl IntoIterator<Item = FeatureMatrix>) -> Self {
        let mut out = FeatureMatrix::new(layout);
        for p in parts {
            out.extend(p);
        }
        out
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn width(&self) -> usize {
        self.layout.width()
    }

    pub fn n_rows(&self) -> usize {
        self.meta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meta.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> &[RowMeta] {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut [RowMeta] {
        &mut self.meta
    }

    pub fn targets(&self) -> &[Option<f64>] {
        &self.targets
    }

    pub fn row(&self, i: usize) -> FeatureRow<'_> {
        let w = self.width();
        FeatureRow {
            layout: self.layout,
            values: &self.values[i * w..(i + 1) * w],
            meta: &self.meta[i],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = FeatureRow<'_>> {
        (0..self.n_rows()).map(|i| self.row(i))
    }

    /// Targets as a dense vector; fails if any row lacks one.
    pub fn dense_targets(&self) -> Result<Vec<f64>> {
        self.targets
            .iter()
            .map(|t| t.ok_or_else(|| Error::Layout("row without target in training matrix".into())))
            .collect()
    }

    /// Keeps rows for which `keep` returns true.
    pub fn filter(&self, mut keep: impl FnMut(&RowMeta) -> bool) -> FeatureMatrix {
        let mut out = FeatureMatrix::new(self.layout);
        for i in 0..self.n_rows() {
            if keep(&self.meta[i]) {
                out.push(self.row(i).values, self.meta[i].clone(), self.targets[i]);
            }
        }
        out
    }

    /// CSV export for debugging, tagged with a `# layout=...` comment line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# layout={}\n", self.layout.tag());
        out.push_str("location,latitude,longitude,season,target_month");
        for j in 0..self.width() {
            let _ = write!(out, ",f{j:02}");
        }
        out.push_str(",target\n");
        for i in 0..self.n_rows() {
            let m = &self.meta[i];
            let _ = write!(
                out,
                "{},{},{},{},{}",
                m.location_index,
                format_value(m.latitude),
                format_value(m.longitude),
                m.season.map(|s| s.to_string()).unwrap_or_default(),
                m.target_month
            );
            for &v in self.row(i).values {
                let _ = write!(out, ",{}", format_value(v));
            }
            out.push(',');
            if let Some(t) = self.targets[i] {
                out.push_str(&format_value(t));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_export_is_tagged() {
        let mut m = FeatureMatrix::new(Layout::Baltic3);
        m.push(
            &[0.1, 0.2, 0.3],
            RowMeta {
                location_index: 4,
                latitude: 56.0,
                longitude: 19.6875,
                season: Some(9),
                target_month: Month::from_ym(2024, 9),
            },
            None,
        );
        let csv = m.to_csv();
        assert!(csv.starts_with("# layout=BALTIC3\n"));
        assert!(csv.ends_with("4,56,19.6875,9,2024-09,0.1,0.2,0.3,\n"));
    }

    #[test]
    fn layout_widths() {
        assert_eq!(Layout::Rg48.width(), 12 + 3 * 12);
        assert_eq!(Layout::Ud50.width(), 4 * 12 + 2);
        assert_eq!(Layout::Ud74.width(), 50 + 2 * 12);
        assert_eq!("ud74".parse::<Layout>().unwrap(), Layout::Ud74);
    }
}
