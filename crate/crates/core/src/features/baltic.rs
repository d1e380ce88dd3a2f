use crate::data::{CoordinateTable, TimeGrid};
use crate::error::{Error, Result};
use crate::month::Month;

use super::{FeatureMatrix, Layout, RowMeta};

pub const BALTIC_SEPTEMBERS: usize = 3;

/// SSTA at the `n_septembers` Septembers ending at `anchor_september`,
/// oldest first. The row predicts the September twelve months later.
pub fn build_baltic_row(
    ssta: &TimeGrid,
    location: usize,
    anchor_september: Month,
    n_septembers: usize,
) -> Result<Vec<f64>> {
    if !anchor_september.is_september() {
        return Err(Error::InsufficientHistory(format!(
            "anchor {anchor_september} is not a September"
        )));
    }
    if !ssta.is_present(location) {
        return Err(Error::UnknownLocation(ssta.location_ids()[location].clone()));
    }
    (0..n_septembers)
        .rev()
        .map(|back| {
            let month = anchor_september - 12 * back as i64;
            ssta.index_of(month)
                .map(|t| ssta.row(t)[location])
                .ok_or_else(|| Error::InsufficientHistory(format!("September {month} not in grid")))
        })
        .collect()
}

/// BALTIC3 rows for every present location at one anchor. The target (next
/// September) is attached when it is inside the grid.
pub fn build_baltic_rows(
    ssta: &TimeGrid,
    coords: &CoordinateTable,
    anchor_september: Month,
) -> Result<FeatureMatrix> {
    let target_month = anchor_september + 12;
    let target_t = ssta.index_of(target_month);
    let mut out = FeatureMatrix::new(Layout::Baltic3);
    for l in 0..ssta.n_locations() {
        if !ssta.is_present(l) {
            out.skipped += 1;
            continue;
        }
        let values = build_baltic_row(ssta, l, anchor_september, BALTIC_SEPTEMBERS)?;
        let loc = coords.get(l);
        out.push(
            &values,
            RowMeta {
                location_index: l,
                latitude: loc.latitude,
                longitude: loc.longitude,
                season: Some(9),
                target_month,
            },
            target_t.map(|t| ssta.row(t)[l]),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Variable;

    fn grid(n_months: usize, f: impl Fn(usize) -> f64) -> TimeGrid {
        TimeGrid::new(
            Variable::Ssta,
            Month::from_ym(2000, 1),
            vec!["p0".into()],
            (0..n_months).map(f).collect(),
        )
        .unwrap()
    }

    #[test]
    fn extracts_three_septembers() {
        // Septembers 2000, 2001, 2002 hold 0.1, 0.2, 0.3
        let g = grid(36, |t| if t % 12 == 8 { 0.1 * (t / 12 + 1) as f64 } else { 9.0 });
        let row = build_baltic_row(&g, 0, Month::from_ym(2002, 9), 3).unwrap();
        assert_eq!(row, vec![0.1, 0.2, 0.30000000000000004]);
    }

    #[test]
    fn short_grid_lacks_history() {
        let g = grid(20, |_| 0.0);
        assert!(matches!(
            build_baltic_row(&g, 0, Month::from_ym(2000, 9), 3),
            Err(Error::InsufficientHistory(_))
        ));
        assert!(matches!(
            build_baltic_row(&g, 0, Month::from_ym(2001, 9), 3),
            Err(Error::InsufficientHistory(_))
        ));
        assert!(matches!(
            build_baltic_row(&g, 0, Month::from_ym(2000, 8), 1),
            Err(Error::InsufficientHistory(_))
        ));
    }
}
