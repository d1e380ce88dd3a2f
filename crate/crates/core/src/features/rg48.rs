use rayon::prelude::*;

use crate::data::{Block, CoordinateTable, NeighborMap, WINDOW};
use crate::error::{Error, Result};

use super::{FeatureMatrix, Layout, RowMeta};

/// Rows `[lag 1..12, neighbor mean ×12, neighbor max ×12, neighbor min ×12]`
/// for every location of one block; lag 1 is the last window month.
///
/// Neighbors missing at a month are ignored; with no neighbor left the
/// center value stands in for all three aggregates. Locations with a
/// missing center value anywhere in the window are skipped and counted.
pub fn build_rg48_rows(
    block: &Block<'_>,
    target: Option<&[f64]>,
    nmap: &NeighborMap,
    coords: &CoordinateTable,
) -> Result<FeatureMatrix> {
    let w = block.ssta()?;
    if w.len() != WINDOW {
        return Err(Error::Layout(format!("RG48 needs a {WINDOW}-month window, got {}", w.len())));
    }
    let n_loc = block.n_locations();
    if nmap.len() != n_loc || coords.len() != n_loc {
        return Err(Error::Shape(format!(
            "block has {n_loc} locations, neighbor map {}, coordinates {}",
            nmap.len(),
            coords.len()
        )));
    }
    let season = Some(block.target_month().calendar() + 1);
    let mut out = FeatureMatrix::new(Layout::Rg48);
    let mut row = [0.0; 48];
    for l in 0..n_loc {
        if (0..WINDOW).any(|k| !w.get(k, l).is_finite()) {
            out.skipped += 1;
            continue;
        }
        for lag in 0..WINDOW {
            let k = WINDOW - 1 - lag;
            let centre = w.get(k, l);
            // shifted sum keeps the mean of equal values exact
            let (mut shift, mut sum, mut count) = (f64::NAN, 0.0, 0usize);
            let (mut max, mut min) = (f64::NEG_INFINITY, f64::INFINITY);
            for &n in nmap.neighbors(l) {
                let v = w.get(k, n);
                if v.is_finite() {
                    if count == 0 {
                        shift = v;
                    }
                    sum += v - shift;
                    count += 1;
                    max = max.max(v);
                    min = min.min(v);
                }
            }
            row[lag] = centre;
            if count == 0 {
                row[WINDOW + lag] = centre;
                row[2 * WINDOW + lag] = centre;
                row[3 * WINDOW + lag] = centre;
            } else {
                row[WINDOW + lag] = shift + sum / count as f64;
                row[2 * WINDOW + lag] = max;
                row[3 * WINDOW + lag] = min;
            }
        }
        let loc = coords.get(l);
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

/// [`build_rg48_rows`] over many blocks, in block order.
pub fn build_rg48_matrix(
    blocks: &[(Block<'_>, Option<&[f64]>)],
    nmap: &NeighborMap,
    coords: &CoordinateTable,
) -> Result<FeatureMatrix> {
    let parts = blocks
        .par_iter()
        .map(|(b, t)| build_rg48_rows(b, *t, nmap, coords))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix::concat(Layout::Rg48, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_neighbor_map, Location, Variable};
    use crate::month::Month;
    use crate::rng::Stream;
    use proptest::prelude::*;

    fn lattice(n: usize, keep: impl Fn(usize) -> bool) -> CoordinateTable {
        CoordinateTable::new(
            (0..n * n)
                .filter(|&i| keep(i))
                .map(|i| Location {
                    id: format!("p{i}"),
                    latitude: (i / n) as f64,
                    longitude: (i % n) as f64,
                })
                .collect(),
        )
        .unwrap()
    }

    fn block(values: &[f64], n_loc: usize) -> Block<'_> {
        Block::new(Month(0), WINDOW, 3, n_loc)
            .with_window(Variable::Ssta, values)
            .unwrap()
    }

    #[test]
    fn constant_field() {
        let coords = lattice(3, |_| true);
        let nmap = build_neighbor_map(&coords).unwrap();
        let values = vec![0.7; WINDOW * 9];
        let m = build_rg48_rows(&block(&values, 9), None, &nmap, &coords).unwrap();
        assert_eq!(m.n_rows(), 9);
        for r in m.rows() {
            assert_eq!(r.values.len(), 48);
            assert!(r.values.iter().all(|&v| v == 0.7));
        }
    }

    #[test]
    fn matches_brute_force_enumeration() {
        let coords = lattice(3, |_| true);
        let nmap = build_neighbor_map(&coords).unwrap();
        let mut s = Stream::new(5);
        let values: Vec<f64> = (0..WINDOW * 9).map(|_| s.normal()).collect();
        let m = build_rg48_rows(&block(&values, 9), None, &nmap, &coords).unwrap();
        let centre = 4;
        let row = m.row(centre).values;
        for lag in 0..WINDOW {
            let k = WINDOW - 1 - lag;
            // the 8 cells around the centre of a 3×3 lattice
            let ring: Vec<f64> = (0..9).filter(|&i| i != centre).map(|i| values[k * 9 + i]).collect();
            let mean = ring.iter().sum::<f64>() / 8.0;
            let max = ring.iter().cloned().fold(f64::MIN, f64::max);
            let min = ring.iter().cloned().fold(f64::MAX, f64::min);
            assert_eq!(row[lag], values[k * 9 + centre]);
            assert!((row[12 + lag] - mean).abs() < 1e-15);
            assert_eq!(row[24 + lag], max);
            assert_eq!(row[36 + lag], min);
        }
    }

    #[test]
    fn isolated_point_uses_centre_and_missing_centre_skips() {
        let coords = lattice(3, |i| i == 0 || i == 8);
        let nmap = build_neighbor_map(&coords).unwrap();
        let mut values = vec![0.0; WINDOW * 2];
        for k in 0..WINDOW {
            values[k * 2] = k as f64;
            values[k * 2 + 1] = f64::NAN;
        }
        let m = build_rg48_rows(&block(&values, 2), None, &nmap, &coords).unwrap();
        assert_eq!(m.n_rows(), 1);
        assert_eq!(m.skipped, 1);
        let r = m.row(0).values;
        assert_eq!(r[0], 11.0);
        assert_eq!(r[11], 0.0);
        assert_eq!(&r[12..24], &r[0..12]);
        assert_eq!(&r[36..48], &r[0..12]);
    }

    #[test]
    fn targets_and_season_attached() {
        let coords = lattice(2, |_| true);
        let nmap = build_neighbor_map(&coords).unwrap();
        let values = vec![0.0; WINDOW * 4];
        let target = [1.0, 2.0, 3.0, 4.0];
        let m = build_rg48_rows(&block(&values, 4), Some(&target), &nmap, &coords).unwrap();
        assert_eq!(m.dense_targets().unwrap(), target.to_vec());
        // window Jan..Dec, target March
        assert_eq!(m.meta()[0].season, Some(3));
        assert_eq!(m.meta()[0].target_month, Month(14));
    }

    proptest! {
        #[test]
        fn aggregates_are_ordered(seed in any::<u64>(), n in 1usize..6, mask in any::<u32>()) {
            let coords = lattice(n, |i| i == 0 || mask & (1 << (i % 32)) != 0);
            let nmap = build_neighbor_map(&coords).unwrap();
            let n_loc = coords.len();
            let mut s = Stream::new(seed);
            let values: Vec<f64> = (0..WINDOW * n_loc).map(|_| s.normal()).collect();
            let m = build_rg48_rows(&block(&values, n_loc), None, &nmap, &coords).unwrap();
            prop_assert_eq!(m.n_rows(), n_loc);
            for r in m.rows() {
                prop_assert_eq!(r.values.len(), 48);
                for lag in 0..WINDOW {
                    let (mean, max, min) = (r.values[12 + lag], r.values[24 + lag], r.values[36 + lag]);
                    prop_assert!(min <= mean + 1e-12 && mean <= max + 1e-12);
                }
            }
        }
    }
}
