use crate::error::{Error, Result};
use crate::month::Month;

use super::dataset::Dataset;
use super::grid::Variable;

/// Input window length in months.
pub const WINDOW: usize = 12;

/// Borrowed `rows × locations` slab of one variable.
#[derive(Clone, Copy, Debug)]
pub struct WindowView<'a> {
    data: &'a [f64],
    n_locations: usize,
}

impl<'a> WindowView<'a> {
    pub fn new(data: &'a [f64], n_locations: usize) -> Self {
        debug_assert_eq!(data.len() % n_locations, 0);
        Self { data, n_locations }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.n_locations
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, k: usize) -> &'a [f64] {
        &self.data[k * self.n_locations..(k + 1) * self.n_locations]
    }

    pub fn last_row(&self) -> &'a [f64] {
        self.row(self.len() - 1)
    }

    pub fn get(&self, k: usize, location: usize) -> f64 {
        self.data[k * self.n_locations + location]
    }
}

/// A window of consecutive input months (all variables, all locations)
/// paired with a target month `target_offset` months after the window end.
#[derive(Clone, Debug)]
pub struct Block<'a> {
    pub window_start: Month,
    pub target_offset: usize,
    window_len: usize,
    n_locations: usize,
    windows: [Option<&'a [f64]>; 4],
}

impl<'a> Block<'a> {
    pub fn new(window_start: Month, window_len: usize, target_offset: usize, n_locations: usize) -> Self {
        Self {
            window_start,
            target_offset,
            window_len,
            n_locations,
            windows: [None; 4],
        }
    }

    /// Attaches `window_len × n_locations` values for one variable.
    pub fn with_window(mut self, variable: Variable, data: &'a [f64]) -> Result<Self> {
        if data.len() != self.window_len * self.n_locations {
            return Err(Error::Shape(format!(
                "{variable} window has {} values, expected {}",
                data.len(),
                self.window_len * self.n_locations
            )));
        }
        self.windows[variable.index()] = Some(data);
        Ok(self)
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn n_locations(&self) -> usize {
        self.n_locations
    }

    pub fn window_end(&self) -> Month {
        self.window_start + (self.window_len as i64 - 1)
    }

    pub fn target_month(&self) -> Month {
        self.window_end() + self.target_offset as i64
    }

    pub fn window(&self, variable: Variable) -> Option<WindowView<'a>> {
        self.windows[variable.index()].map(|d| WindowView::new(d, self.n_locations))
    }

    pub fn require(&self, variable: Variable) -> Result<WindowView<'a>> {
        self.window(variable)
            .ok_or_else(|| Error::MissingVariable(variable.name().to_string()))
    }

    pub fn ssta(&self) -> Result<WindowView<'a>> {
        self.require(Variable::Ssta)
    }
}

/// Blocks of `window` months every `stride` months.
///
/// Every window whose target month is inside the SSTA grid is returned with
/// its target row. The latest window is always included; when its target
/// lies beyond the data it carries `None` (the test-time block).
pub fn extract_blocks<'a>(
    data: &'a Dataset,
    window: usize,
    target_offset: usize,
    stride: usize,
) -> Result<Vec<(Block<'a>, Option<&'a [f64]>)>> {
    let n_months = data.n_months();
    if window == 0 || stride == 0 {
        return Err(Error::Config("window and stride must be positive".into()));
    }
    if n_months < window {
        return Err(Error::NoBlocks {
            months: n_months,
            window,
        });
    }
    let ssta = data.ssta();
    let make = |start: usize| -> Result<(Block<'a>, Option<&'a [f64]>)> {
        let mut block = Block::new(
            data.start() + start as i64,
            window,
            target_offset,
            data.n_locations(),
        );
        for v in Variable::ALL {
            if let Some(g) = data.grid(v) {
                block = block.with_window(v, g.rows(start, window))?;
            }
        }
        let target_t = start + window - 1 + target_offset;
        let target = (target_t < n_months).then(|| ssta.row(target_t));
        Ok((block, target))
    };

    let last_start = n_months - window;
    let mut out = Vec::new();
    let mut start = 0;
    while start <= last_start && start + window - 1 + target_offset < n_months {
        out.push(make(start)?);
        start += stride;
    }
    if out.last().is_none_or(|(b, _)| b.window_start != data.start() + last_start as i64) {
        out.push(make(last_start)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{CoordinateTable, Location, TimeGrid};

    fn dataset(n_months: usize, n_loc: usize) -> Dataset {
        let ids: Vec<String> = (0..n_loc).map(|i| format!("p{i}")).collect();
        let values = (0..n_months * n_loc).map(|v| v as f64).collect();
        let ssta = TimeGrid::new(Variable::Ssta, Month(0), ids.clone(), values).unwrap();
        let coords = CoordinateTable::new(
            ids.iter()
                .enumerate()
                .map(|(i, id)| Location {
                    id: id.clone(),
                    latitude: 0.0,
                    longitude: i as f64,
                })
                .collect(),
        )
        .unwrap();
        Dataset::new(ssta, coords).unwrap()
    }

    #[test]
    fn fifteen_months_one_target() {
        let d = dataset(15, 2);
        let blocks = extract_blocks(&d, 12, 3, 1).unwrap();
        let with_target: Vec<_> = blocks.iter().filter(|(_, t)| t.is_some()).collect();
        assert_eq!(with_target.len(), 1);
        let (b, t) = with_target[0];
        assert_eq!(b.window_start, Month(0));
        assert_eq!(b.target_month(), Month(14));
        assert_eq!(t.unwrap(), d.ssta().row(14));
    }

    #[test]
    fn fourteen_months_test_block_only() {
        let d = dataset(14, 2);
        let blocks = extract_blocks(&d, 12, 3, 1).unwrap();
        assert_eq!(blocks.len(), 1);
        assert!(blocks[0].1.is_none());
        assert_eq!(blocks[0].0.window_end(), Month(13));
    }

    #[test]
    fn too_short() {
        let d = dataset(11, 1);
        assert!(matches!(
            extract_blocks(&d, 12, 3, 1),
            Err(Error::NoBlocks { months: 11, window: 12 })
        ));
    }

    #[test]
    fn target_count_formula() {
        for n in 12..60 {
            let d = dataset(n, 1);
            let blocks = extract_blocks(&d, 12, 3, 1).unwrap();
            let with_target = blocks.iter().filter(|(_, t)| t.is_some()).count();
            assert_eq!(with_target, (n as i64 - 12 - 3 + 1).max(0) as usize);
        }
    }

    #[test]
    fn challenge_training_count() {
        // 851 input months (Jan 1940 .. Nov 2010) give 837 blocks at offset 3
        let months = (Month::from_ym(2010, 11) - Month::CHALLENGE_START + 1) as usize;
        assert_eq!(months, 851);
        let d = dataset(months, 1);
        let n = extract_blocks(&d, WINDOW, 3, 1)
            .unwrap()
            .iter()
            .filter(|(_, t)| t.is_some())
            .count();
        assert_eq!(n, 837);
        assert_eq!(5774 * n, 4_832_838);
    }

    #[test]
    fn window_views() {
        let d = dataset(15, 2);
        let (b, _) = &extract_blocks(&d, 12, 3, 1).unwrap()[0];
        let w = b.ssta().unwrap();
        assert_eq!(w.len(), 12);
        assert_eq!(w.last_row(), d.ssta().row(11));
        assert!(matches!(b.require(Variable::Sst), Err(Error::MissingVariable(_))));
    }
}
