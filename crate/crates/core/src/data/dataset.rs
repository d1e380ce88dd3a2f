use crate::error::{Error, Result};
use crate::month::Month;

use super::coords::CoordinateTable;
use super::grid::{TimeGrid, Variable};

/// Time-aligned grids for one set of locations plus their coordinates.
///
/// SSTA is mandatory; SST, MSLP and T2M are optional. Coordinates are kept
/// in grid column order.
#[derive(Clone, Debug)]
pub struct Dataset {
    grids: [Option<TimeGrid>; 4],
    coords: CoordinateTable,
}

impl Dataset {
    pub fn new(ssta: TimeGrid, coords: CoordinateTable) -> Result<Self> {
        let coords = coords.reorder(ssta.location_ids())?;
        let mut grids: [Option<TimeGrid>; 4] = Default::default();
        grids[Variable::Ssta.index()] = Some(ssta.with_variable(Variable::Ssta));
        Ok(Self { grids, coords })
    }

    /// Adds an auxiliary variable; it must cover the same months and
    /// locations as the SSTA grid.
    pub fn with_grid(mut self, grid: TimeGrid) -> Result<Self> {
        let ssta = self.ssta();
        if grid.start() != ssta.start() || grid.n_months() != ssta.n_months() {
            return Err(Error::Shape(format!(
                "{} covers {}..{}, SSTA covers {}..{}",
                grid.variable(),
                grid.start(),
                grid.end(),
                ssta.start(),
                ssta.end()
            )));
        }
        if grid.location_ids() != ssta.location_ids() {
            return Err(Error::Shape(format!(
                "{} locations differ from SSTA locations",
                grid.variable()
            )));
        }
        let v = grid.variable();
        self.grids[v.index()] = Some(grid);
        Ok(self)
    }

    pub fn ssta(&self) -> &TimeGrid {
        self.grids[Variable::Ssta.index()].as_ref().expect("SSTA is mandatory")
    }

    pub fn grid(&self, variable: Variable) -> Option<&TimeGrid> {
        self.grids[variable.index()].as_ref()
    }

    pub fn require(&self, variable: Variable) -> Result<&TimeGrid> {
        self.grid(variable)
            .ok_or_else(|| Error::MissingVariable(variable.name().to_string()))
    }

    pub fn coords(&self) -> &CoordinateTable {
        &self.coords
    }

    pub fn start(&self) -> Month {
        self.ssta().start()
    }

    pub fn end(&self) -> Month {
        self.ssta().end()
    }

    pub fn n_months(&self) -> usize {
        self.ssta().n_months()
    }

    pub fn n_locations(&self) -> usize {
        self.ssta().n_locations()
    }

    /// Drops every location that is absent (land) in the SSTA grid or in
    /// any auxiliary grid.
    pub fn drop_absent(&self) -> Result<Dataset> {
        let keep: Vec<usize> = (0..self.n_locations())
            .filter(|&l| self.grids.iter().flatten().all(|g| g.is_present(l)))
            .collect();
        if keep.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut grids: [Option<TimeGrid>; 4] = Default::default();
        for (slot, g) in grids.iter_mut().zip(&self.grids) {
            if let Some(g) = g {
                *slot = Some(g.select_locations(&keep)?);
            }
        }
        let ids = grids[0].as_ref().expect("SSTA").location_ids().to_vec();
        Ok(Dataset {
            grids,
            coords: self.coords.reorder(&ids)?,
        })
    }

    /// Months `first..=last` of every grid.
    pub fn slice_months(&self, first: Month, last: Month) -> Result<Dataset> {
        let mut grids: [Option<TimeGrid>; 4] = Default::default();
        for (slot, g) in grids.iter_mut().zip(&self.grids) {
            if let Some(g) = g {
                *slot = Some(g.slice_months(first, last)?);
            }
        }
        Ok(Dataset {
            grids,
            coords: self.coords.clone(),
        })
    }
}

/// Read access to observed rows by month; lets chained forecasting be run
/// against instrumented sources.
pub trait ObservedSource {
    fn start(&self) -> Month;
    fn end(&self) -> Month;
    fn location_ids(&self) -> &[String];
    fn has_variable(&self, variable: Variable) -> bool;
    fn row(&self, variable: Variable, month: Month) -> Option<&[f64]>;
}

impl ObservedSource for Dataset {
    fn start(&self) -> Month {
        Dataset::start(self)
    }

    fn end(&self) -> Month {
        Dataset::end(self)
    }

    fn location_ids(&self) -> &[String] {
        self.ssta().location_ids()
    }

    fn has_variable(&self, variable: Variable) -> bool {
        self.grid(variable).is_some()
    }

    fn row(&self, variable: Variable, month: Month) -> Option<&[f64]> {
        self.grid(variable).and_then(|g| g.row_at(month))
    }
}
