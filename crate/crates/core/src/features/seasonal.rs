use crate::data::TimeGrid;
use crate::error::{Error, Result};

/// Per-time-step global SST patterns with periodic calendar pseudolabels.
#[derive(Clone, Debug, PartialEq)]
pub struct SeasonalDataset {
    /// Row-major `n_rows × width`, each row z-scored across locations.
    pub rows: Vec<f64>,
    pub width: usize,
    /// Pseudolabel per row, 0..=11, advancing by one per row.
    pub labels: Vec<u8>,
    /// Grid columns used (present locations), in order.
    pub columns: Vec<usize>,
}

impl SeasonalDataset {
    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.width..(i + 1) * self.width]
    }

    /// Subset of rows by index.
    pub fn select(&self, indices: &[usize]) -> SeasonalDataset {
        SeasonalDataset {
            rows: indices.iter().flat_map(|&i| self.row(i).iter().copied()).collect(),
            width: self.width,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            columns: self.columns.clone(),
        }
    }
}

/// Population z-score; a constant row maps to zeros.
pub fn normalize_row(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var <= 0.0 {
        return vec![0.0; values.len()];
    }
    let sd = var.sqrt();
    values.iter().map(|v| (v - mean) / sd).collect()
}

pub fn build_seasonal_dataset(sst: &TimeGrid) -> Result<SeasonalDataset> {
    let columns: Vec<usize> = (0..sst.n_locations()).filter(|&l| sst.is_present(l)).collect();
    if columns.len() < 2 {
        return Err(Error::DegenerateNormalization(columns.len()));
    }
    if sst.n_months() < 12 {
        return Err(Error::InsufficientHistory(format!(
            "seasonal dataset needs 12 months, got {}",
            sst.n_months()
        )));
    }
    let mut rows = Vec::with_capacity(sst.n_months() * columns.len());
    let mut labels = Vec::with_capacity(sst.n_months());
    let mut buf = Vec::with_capacity(columns.len());
    for t in 0..sst.n_months() {
        buf.clear();
        buf.extend(columns.iter().map(|&l| sst.row(t)[l]));
        rows.extend(normalize_row(&buf));
        labels.push(sst.month_of(t).calendar());
    }
    Ok(SeasonalDataset {
        rows,
        width: columns.len(),
        labels,
        columns,
    })
}
