use std::fmt::Write as _;

use crate::data::format_value;

use super::skill::SkillReport;

/// One line of the per-year report; `year` is `None` for the overall row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportRow {
    pub year: Option<i64>,
    pub rmse_model: f64,
    pub rmse_persistence: f64,
    pub skill: f64,
}

/// Per-year rows (pooled RMSE) followed by the overall row (location-mean
/// RMSE and headline skill).
pub fn yearly_rows(report: &SkillReport) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = report
        .per_year_rmse
        .iter()
        .map(|(&year, &(m, p))| ReportRow {
            year: Some(year),
            rmse_model: m,
            rmse_persistence: p,
            skill: p - m,
        })
        .collect();
    rows.push(ReportRow {
        year: None,
        rmse_model: report.rmse_model,
        rmse_persistence: report.rmse_persistence,
        skill: report.skill,
    });
    rows
}

/// CSV with header `year,rmse_model,rmse_persistence,skill`; the overall row
/// has year `overall`.
pub fn report_csv(report: &SkillReport) -> String {
    let mut out = String::from("year,rmse_model,rmse_persistence,skill\n");
    for r in yearly_rows(report) {
        let year = r.year.map_or_else(|| "overall".to_string(), |y| y.to_string());
        let _ = writeln!(
            out,
            "{year},{},{},{}",
            format_value(r.rmse_model),
            format_value(r.rmse_persistence),
            format_value(r.skill)
        );
    }
    out
}
