//! Forecast scoring against persistence and diagnostics.
//!
//! Skill is computed per location first (RMSE over all scored blocks) and
//! then averaged over locations. Pairs whose truth is missing are left out
//! of both the model and the baseline RMSE.

mod diagnostics;
mod report;
mod skill;
mod svg;

pub use diagnostics::{annual_global_mean, persistence_horizon_curve};
pub use report::{report_csv, yearly_rows, ReportRow};
pub use skill::{
    random_split, rmse, skill_score, split_score, yearly_rmse, EvalSet, LocationScore, SkillReport, YearlyRow,
};
pub use svg::{line_chart, Series};
