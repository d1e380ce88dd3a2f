use rayon::prelude::*;

use crate::data::{Block, ClimatologyTable, CoordinateTable, Variable, WINDOW};
use crate::error::{Error, Result};

use super::{FeatureMatrix, Layout, RowMeta};

const UD_VARIABLES: [Variable; 4] = [Variable::Ssta, Variable::Sst, Variable::Mslp, Variable::T2m];

/// Per location: the SSTA, SST, MSLP and T2M windows in chronological
/// order (12 each), then latitude and longitude in degrees.
pub fn build_ud50_rows(
    block: &Block<'_>,
    target: Option<&[f64]>,
    coords: &CoordinateTable,
) -> Result<FeatureMatrix> {
    let windows = UD_VARIABLES
        .iter()
        .map(|&v| block.require(v))
        .collect::<Result<Vec<_>>>()?;
    if windows[0].len() != WINDOW {
        return Err(Error::Layout(format!(
            "UD50 needs a {WINDOW}-month window, got {}",
            windows[0].len()
        )));
    }
    if coords.len() != block.n_locations() {
        return Err(Error::Shape(format!(
            "block has {} locations, coordinates {}",
            block.n_locations(),
            coords.len()
        )));
    }
    let season = Some(block.target_month().calendar() + 1);
    let mut out = FeatureMatrix::new(Layout::Ud50);
    let mut row = [0.0; 50];
    'locations: for l in 0..block.n_locations() {
        for (vi, w) in windows.iter().enumerate() {
            for k in 0..WINDOW {
                let v = w.get(k, l);
                if !v.is_finite() {
                    out.skipped += 1;
                    continue 'locations;
                }
                row[vi * WINDOW + k] = v;
            }
        }
        let loc = coords.get(l);
        row[48] = loc.latitude;
        row[49] = loc.longitude;
        out.push(
            &row,
            RowMeta {
                location_index: l,
                latitude: loc.latitude,
                longitude: loc.longitude,
                season,
                target_month: block.target_month(),
            },
            target.map(|t| t[l]).filter(|v| v.is_finite()),
        );
    }
    Ok(out)
}

/// Appends `avg[Jan..Dec]` then `std[Jan..Dec]` of the row's location.
pub fn augment_ud74(rows: &FeatureMatrix, clim: &ClimatologyTable) -> Result<FeatureMatrix> {
    if rows.layout() != Layout::Ud50 {
        return Err(Error::Layout(format!("expected UD50 rows, got {}", rows.layout())));
    }
    let mut out = FeatureMatrix::new(Layout::Ud74);
    out.skipped = rows.skipped;
    let mut buf = [0.0; 74];
    for (i, r) in rows.rows().enumerate() {
        let l = r.meta.location_index;
        if l >= clim.n_locations {
            return Err(Error::Shape(format!(
                "row location {l} outside climatology of {} locations",
                clim.n_locations
            )));
        }
        buf[..50].copy_from_slice(r.values);
        for m in 0..12u8 {
            buf[50 + m as usize] = clim.avg(m, l);
            buf[62 + m as usize] = clim.std(m, l);
        }
        out.push(&buf, r.meta.clone(), rows.targets()[i]);
    }
    Ok(out)
}

/// UD50 (or UD74 when a climatology is given) rows for many blocks.
pub fn build_ud_matrix(
    blocks: &[(Block<'_>, Option<&[f64]>)],
    coords: &CoordinateTable,
    clim: Option<&ClimatologyTable>,
) -> Result<FeatureMatrix> {
    let parts = blocks
        .par_iter()
        .map(|(b, t)| {
            let rows = build_ud50_rows(b, *t, coords)?;
            match clim {
                Some(c) => augment_ud74(&rows, c),
                None => Ok(rows),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let layout = if clim.is_some() { Layout::Ud74 } else { Layout::Ud50 };
    Ok(FeatureMatrix::concat(layout, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{compute_monthly_climatology, Location, TimeGrid};
    use crate::month::Month;
    use crate::rng::Stream;
    use proptest::prelude::*;

    fn coords(n: usize) -> CoordinateTable {
        CoordinateTable::new(
            (0..n)
                .map(|i| Location {
                    id: format!("p{i}"),
                    latitude: -10.0 + i as f64,
                    longitude: 100.0 + 2.0 * i as f64,
                })
                .collect(),
        )
        .unwrap()
    }

    fn full_block<'a>(data: &'a [Vec<f64>; 4], n_loc: usize) -> Block<'a> {
        let mut b = Block::new(Month(0), WINDOW, 3, n_loc);
        for (v, d) in UD_VARIABLES.iter().zip(data) {
            b = b.with_window(*v, d).unwrap();
        }
        b
    }

    fn random_data(seed: u64, n_loc: usize) -> [Vec<f64>; 4] {
        let mut s = Stream::new(seed);
        std::array::from_fn(|_| (0..WINDOW * n_loc).map(|_| s.normal()).collect())
    }

    #[test]
    fn identical_series_differ_only_in_coordinates() {
        let n_loc = 2;
        let mut data = random_data(1, n_loc);
        for d in data.iter_mut() {
            for k in 0..WINDOW {
                d[k * n_loc + 1] = d[k * n_loc];
            }
        }
        let m = build_ud50_rows(&full_block(&data, n_loc), None, &coords(n_loc)).unwrap();
        let (a, b) = (m.row(0).values, m.row(1).values);
        assert_eq!(a.len(), 50);
        assert_eq!(&a[..48], &b[..48]);
        assert_ne!(a[48], b[48]);
        assert_ne!(a[49], b[49]);
    }

    #[test]
    fn missing_variable() {
        let data = random_data(2, 1);
        let b = Block::new(Month(0), WINDOW, 3, 1)
            .with_window(Variable::Ssta, &data[0])
            .unwrap();
        assert!(matches!(
            build_ud50_rows(&b, None, &coords(1)),
            Err(Error::MissingVariable(ref v)) if v == "SST"
        ));
    }

    #[test]
    fn ud74_appends_climatology_of_location() {
        let n_loc = 3;
        let mut s = Stream::new(9);
        let ids: Vec<String> = (0..n_loc).map(|i| format!("p{i}")).collect();
        let ssta = TimeGrid::new(
            Variable::Ssta,
            Month(0),
            ids,
            (0..48 * n_loc).map(|_| s.normal()).collect(),
        )
        .unwrap();
        let clim = compute_monthly_climatology(&ssta, (Month(0), Month(47))).unwrap();
        let data = random_data(3, n_loc);
        let rows = build_ud50_rows(&full_block(&data, n_loc), None, &coords(n_loc)).unwrap();
        let aug = augment_ud74(&rows, &clim).unwrap();
        assert_eq!(aug.layout(), Layout::Ud74);
        for (i, r) in aug.rows().enumerate() {
            assert_eq!(r.values.len(), 74);
            assert_eq!(&r.values[..50], rows.row(i).values);
            for m in 0..12u8 {
                assert_eq!(r.values[50 + m as usize], clim.avg(m, i));
                assert_eq!(r.values[62 + m as usize], clim.std(m, i));
            }
        }
        assert!(matches!(augment_ud74(&aug, &clim), Err(Error::Layout(_))));
    }

    #[test]
    fn constant_climatology_appends_constant_and_zero() {
        let ssta = TimeGrid::new(Variable::Ssta, Month(0), vec!["p0".into()], vec![0.25; 24]).unwrap();
        let clim = compute_monthly_climatology(&ssta, (Month(0), Month(23))).unwrap();
        let data = random_data(4, 1);
        let rows = build_ud50_rows(&full_block(&data, 1), None, &coords(1)).unwrap();
        let aug = augment_ud74(&rows, &clim).unwrap();
        let r = aug.row(0).values;
        assert!(r[50..62].iter().all(|&v| v == 0.25));
        assert!(r[62..74].iter().all(|&v| v == 0.0));
    }

    proptest! {
        #[test]
        fn ud50_is_a_pure_reshape(seed in any::<u64>(), n_loc in 1usize..6) {
            let data = random_data(seed, n_loc);
            let c = coords(n_loc);
            let m = build_ud50_rows(&full_block(&data, n_loc), None, &c).unwrap();
            let mut from_rows: Vec<f64> = m.values().to_vec();
            let mut from_source: Vec<f64> = data.iter().flatten().copied().collect();
            for e in c.entries() {
                from_source.push(e.latitude);
                from_source.push(e.longitude);
            }
            from_rows.sort_by(f64::total_cmp);
            from_source.sort_by(f64::total_cmp);
            prop_assert_eq!(from_rows, from_source);
        }
    }
}
