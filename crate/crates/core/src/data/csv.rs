//! Value CSVs: a header of location ids, then one row per month with no
//! timestamp column. Missing cells are empty or `NaN`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::month::Month;

use super::grid::{TimeGrid, Variable};

/// Shortest decimal that parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

fn parse_cell(field: &str, line: usize, index: usize) -> Result<f64> {
    let field = field.trim();
    if field.is_empty() || field == "NaN" {
        return Ok(f64::NAN);
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            line,
            field: index + 1,
            message: format!("'{field}' is not a number"),
        }),
    }
}

/// Parses a value CSV into a grid anchored at `start`.
pub fn parse_value_csv(text: &str, variable: Variable, start: Month) -> Result<TimeGrid> {
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = match lines.next() {
        Some(h) if !h.trim().is_empty() => h,
        _ => return Err(Error::EmptyInput),
    };
    let location_ids: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let width = location_ids.len();

    let body: Vec<&str> = lines.collect();
    // A single trailing newline yields one empty final element.
    let body = match body.split_last() {
        Some((&"", rest)) => rest,
        _ => &body[..],
    };
    if body.is_empty() {
        return Err(Error::EmptyInput);
    }

    let mut values = Vec::with_capacity(body.len() * width);
    for (i, line) in body.iter().enumerate() {
        let line_no = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(Error::Ragged {
                line: line_no,
                expected: width,
                got: fields.len(),
            });
        }
        for (j, f) in fields.iter().enumerate() {
            values.push(parse_cell(f, line_no, j)?);
        }
    }
    TimeGrid::new(variable, start, location_ids, values)
}

/// Inverse of [`parse_value_csv`]; missing cells are written empty.
pub fn serialize_value_csv(grid: &TimeGrid) -> String {
    let mut out = String::new();
    out.push_str(&grid.location_ids().join(","));
    out.push('\n');
    let present = grid.present();
    for t in 0..grid.n_months() {
        for (l, &v) in grid.row(t).iter().enumerate() {
            if l > 0 {
                out.push(',');
            }
            if present[l] {
                let _ = write!(out, "{v}");
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_file() {
        let g = parse_value_csv("a,b\n1,2\n3,4\n", Variable::Ssta, Month(0)).unwrap();
        assert_eq!(g.n_months(), 2);
        assert_eq!(g.location_ids(), &["a".to_string(), "b".to_string()]);
        assert_eq!(g.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = parse_value_csv("a,b\n1,2,3\n", Variable::Ssta, Month(0)).unwrap_err();
        match err {
            Error::Ragged {
                line,
                expected,
                got,
            } => assert_eq!((line, expected, got), (2, 2, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_and_empty() {
        assert!(matches!(
            parse_value_csv("a\nx\n", Variable::Sst, Month(0)),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_value_csv("", Variable::Sst, Month(0)),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            parse_value_csv("a,b\n", Variable::Sst, Month(0)),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn missing_markers_and_crlf() {
        let g = parse_value_csv("a,b,c\r\n1,,NaN\r\n2,,NaN\r\n", Variable::Sst, Month(0)).unwrap();
        assert_eq!(g.present(), &[true, false, false]);
        assert_eq!(serialize_value_csv(&g), "a,b,c\n1,,\n2,,\n");
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(
            n_loc in 1usize..6,
            n_months in 1usize..8,
            seed in any::<u64>(),
            absent_bits in any::<u8>(),
        ) {
            let mut s = crate::rng::Stream::new(seed);
            let ids: Vec<String> = (0..n_loc).map(|i| format!("loc{i}")).collect();
            let mut text = ids.join(",");
            text.push('\n');
            // keep at least one present column so the grid is non-empty
            let absent: Vec<bool> = (0..n_loc).map(|l| l > 0 && absent_bits & (1 << l) != 0).collect();
            for _ in 0..n_months {
                let row: Vec<String> = (0..n_loc)
                    .map(|l| if absent[l] { String::new() } else { format_value(s.normal() * 10f64.powi(s.below(8) as i32 - 4)) })
                    .collect();
                text.push_str(&row.join(","));
                text.push('\n');
            }
            let g = parse_value_csv(&text, Variable::Ssta, Month(0)).unwrap();
            prop_assert_eq!(serialize_value_csv(&g), text);
        }
    }
}
