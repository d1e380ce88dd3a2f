use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

use super::csv::format_value;

pub const COORDINATE_HEADER: &str = "location_id,latitude,longitude";

#[derive(Clone, Debug, PartialEq)]
pub struct Location {
    pub id: String,
    pub latitude: f64,
    pub longitude: f64,
}

/// Regular lattice spanned by a set of coordinates.
///
/// Points need not fill the lattice (land holes are allowed), but every
/// coordinate must sit on `origin + k * step` for integer `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub lat_origin: f64,
    pub lat_step: Option<f64>,
    pub lon_origin: f64,
    pub lon_step: Option<f64>,
    /// Number of columns around the globe when the lattice spans all
    /// longitudes; neighbor lookups wrap at the dateline in that case.
    pub wrap_columns: Option<i64>,
    /// `(row, column)` lattice index per entry.
    pub cells: Vec<(i64, i64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateTable {
    entries: Vec<Location>,
    lattice: std::result::Result<Lattice, String>,
}

const LATTICE_TOL: f64 = 1e-6;

/// Common step of a sorted set of distinct values and the integer offset of
/// each value, or a description of why none exists.
fn axis_step(values: &[f64]) -> std::result::Result<(f64, Option<f64>), String> {
    let mut uniq: Vec<f64> = values.to_vec();
    uniq.sort_by(f64::total_cmp);
    uniq.dedup_by(|a, b| (*a - *b).abs() <= LATTICE_TOL);
    let origin = uniq[0];
    if uniq.len() == 1 {
        return Ok((origin, None));
    }
    let min_gap = uniq
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    // common divisor of all gaps, so lattices with absent rows still resolve
    let tol = LATTICE_TOL * min_gap;
    let step = uniq.windows(2).map(|w| w[1] - w[0]).fold(min_gap, |a, b| {
        let (mut a, mut b) = (a.max(b), a.min(b));
        while b > tol {
            let r = a % b;
            a = b;
            b = if r > b - tol { 0.0 } else { r };
        }
        a
    });
    if min_gap / step > 8.0 + LATTICE_TOL {
        return Err(format!("no common spacing (gaps down to {step})"));
    }
    for w in uniq.windows(2) {
        let k = (w[1] - w[0]) / step;
        if (k - k.round()).abs() > LATTICE_TOL * k.max(1.0) {
            return Err(format!(
                "spacing {} is not a multiple of step {step}",
                w[1] - w[0]
            ));
        }
    }
    Ok((origin, Some(step)))
}

fn axis_index(value: f64, origin: f64, step: Option<f64>) -> i64 {
    step.map_or(0, |s| ((value - origin) / s).round() as i64)
}

impl CoordinateTable {
    pub fn new(entries: Vec<Location>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if !(-90.0..=90.0).contains(&e.latitude) {
                return Err(Error::Range(format!(
                    "latitude {} of '{}' outside [-90, 90]",
                    e.latitude, e.id
                )));
            }
            if !(-180.0..180.0).contains(&e.longitude) {
                return Err(Error::Range(format!(
                    "longitude {} of '{}' outside [-180, 180)",
                    e.longitude, e.id
                )));
            }
            if !seen.insert(e.id.as_str()) {
                return Err(Error::DuplicateLocation(e.id.clone()));
            }
        }
        let lattice = Self::detect_lattice(&entries);
        Ok(Self { entries, lattice })
    }

    fn detect_lattice(entries: &[Location]) -> std::result::Result<Lattice, String> {
        let lats: Vec<f64> = entries.iter().map(|e| e.latitude).collect();
        let lons: Vec<f64> = entries.iter().map(|e| e.longitude).collect();
        let (lat_origin, lat_step) = axis_step(&lats)?;
        let (lon_origin, lon_step) = axis_step(&lons)?;

        let cells: Vec<(i64, i64)> = entries
            .iter()
            .map(|e| {
                (
                    axis_index(e.latitude, lat_origin, lat_step),
                    axis_index(e.longitude, lon_origin, lon_step),
                )
            })
            .collect();
        let mut occupied = HashSet::new();
        for (e, c) in entries.iter().zip(&cells) {
            if !occupied.insert(*c) {
                return Err(format!("'{}' shares a lattice cell with another point", e.id));
            }
        }

        let wrap_columns = lon_step.and_then(|s| {
            let full = (360.0 / s).round();
            let span = cells.iter().map(|c| c.1).max().unwrap_or(0) + 1;
            ((full * s - 360.0).abs() < 1e-6 && span as f64 == full).then_some(full as i64)
        });
        Ok(Lattice {
            lat_origin,
            lat_step,
            lon_origin,
            lon_step,
            wrap_columns,
            cells,
        })
    }

    pub fn entries(&self) -> &[Location] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> &Location {
        &self.entries[index]
    }

    /// Lattice regularity result, computed once at construction.
    pub fn lattice(&self) -> std::result::Result<&Lattice, &str> {
        self.lattice.as_ref().map_err(String::as_str)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.id == id)
    }

    /// Index of the entry at the given coordinates (within 1e-6 degrees).
    pub fn find(&self, latitude: f64, longitude: f64) -> Option<usize> {
        self.entries.iter().position(|e| {
            (e.latitude - latitude).abs() < 1e-6 && (e.longitude - longitude).abs() < 1e-6
        })
    }

    /// Reorders (and subsets) the table to follow `ids`.
    pub fn reorder(&self, ids: &[String]) -> Result<CoordinateTable> {
        let by_id: HashMap<&str, &Location> =
            self.entries.iter().map(|e| (e.id.as_str(), e)).collect();
        let entries = ids
            .iter()
            .map(|id| {
                by_id
                    .get(id.as_str())
                    .map(|&l| l.clone())
                    .ok_or_else(|| Error::UnknownLocation(id.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        CoordinateTable::new(entries)
    }
}

/// Parses `location_id,latitude,longitude` lines; the header line is
/// optional. Longitudes in [180, 360) are folded into [-180, 0).
pub fn parse_coordinate_csv(text: &str) -> Result<CoordinateTable> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || (i == 0 && line.replace(' ', "") == COORDINATE_HEADER) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Ragged {
                line: i + 1,
                expected: 3,
                got: fields.len(),
            });
        }
        let number = |j: usize| {
            fields[j].parse::<f64>().map_err(|_| Error::Parse {
                line: i + 1,
                field: j + 1,
                message: format!("'{}' is not a number", fields[j]),
            })
        };
        let latitude = number(1)?;
        let mut longitude = number(2)?;
        if (180.0..360.0).contains(&longitude) {
            longitude -= 360.0;
        }
        entries.push(Location {
            id: fields[0].to_string(),
            latitude,
            longitude,
        });
    }
    CoordinateTable::new(entries)
}

pub fn serialize_coordinate_csv(table: &CoordinateTable) -> String {
    let mut out = String::from(COORDINATE_HEADER);
    out.push('\n');
    for e in table.entries() {
        out.push_str(&format!(
            "{},{},{}\n",
            e.id,
            format_value(e.latitude),
            format_value(e.longitude)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_baltic_point() {
        let t = parse_coordinate_csv("p0,56,19.6875").unwrap();
        assert_eq!(
            t.entries(),
            &[Location {
                id: "p0".into(),
                latitude: 56.0,
                longitude: 19.6875
            }]
        );
        assert!(t.lattice().is_ok());
    }

    #[test]
    fn header_is_optional_and_round_trips() {
        let text = "location_id,latitude,longitude\na,0,0\nb,0,0.5\nc,0.5,0\n";
        let t = parse_coordinate_csv(text).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(serialize_coordinate_csv(&t), text);
    }

    #[test]
    fn out_of_range_latitude() {
        assert!(matches!(parse_coordinate_csv("p0,95,0"), Err(Error::Range(_))));
    }

    #[test]
    fn duplicate_id() {
        assert!(matches!(
            parse_coordinate_csv("p0,1,1\np0,2,2"),
            Err(Error::DuplicateLocation(ref id)) if id == "p0"
        ));
    }

    #[test]
    fn lattice_with_holes_is_regular() {
        let t = parse_coordinate_csv("a,0,0\nb,0,2\nc,3,0\n").unwrap();
        let lat = t.lattice().unwrap();
        assert_eq!(lat.lat_step, Some(3.0));
        assert_eq!(lat.lon_step, Some(2.0));
        let t = parse_coordinate_csv("a,0,0\nb,0,1\nc,0,3\n").unwrap();
        assert_eq!(t.lattice().unwrap().cells, vec![(0, 0), (0, 1), (0, 3)]);
    }

    #[test]
    fn irregular_lattice_detected() {
        let t = parse_coordinate_csv("a,0,0\nb,0,1\nc,0,1.55\n").unwrap();
        assert!(t.lattice().is_err());
    }

    #[test]
    fn dateline_wrap_detected() {
        let mut text = String::new();
        for k in 0..4 {
            text.push_str(&format!("p{k},0,{}\n", -180 + 90 * k));
        }
        let t = parse_coordinate_csv(&text).unwrap();
        assert_eq!(t.lattice().unwrap().wrap_columns, Some(4));
        assert_eq!(parse_coordinate_csv("a,0,270").unwrap().get(0).longitude, -90.0);
    }
}
