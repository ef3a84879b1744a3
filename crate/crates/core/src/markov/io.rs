//! Plain-text matrix format: the first line holds `N`, followed by `N` lines
//! of `N` whitespace-separated decimal entries.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::TransitionMatrix;
use crate::error::{Error, Result};

/// Parses the matrix text format without any stochasticity check.
pub fn parse_raw_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line_no, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing size".into(),
    })?;
    let n: usize = header.parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("bad size {header:?}"),
    })?;
    if n == 0 {
        return Err(Error::Empty);
    }
    let mut m = DMatrix::zeros(n, n);
    for row in 0..n {
        let (line_no, line) = lines.next().ok_or(Error::Parse {
            line: line_no + row + 1,
            message: "missing row".into(),
        })?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        if vals.len() != n {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {n} entries, found {}", vals.len()),
            });
        }
        for (col, v) in vals.into_iter().enumerate() {
            m[(row, col)] = v;
        }
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(Error::Parse {
            line: line_no,
            message: "trailing content".into(),
        });
    }
    Ok(m)
}

/// Parses a header `N` followed by `N` rows of `N` non-negative integers.
pub(crate) fn parse_index_rows(text: &str) -> Result<Vec<Vec<usize>>> {
    let raw = parse_raw_matrix(text)?;
    let mut rows = Vec::with_capacity(raw.nrows());
    for (r, row) in raw.row_iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for &v in row.iter() {
            if v < 0.0 || v.fract() != 0.0 {
                return Err(Error::Parse {
                    line: r + 2,
                    message: format!("{v} is not an index"),
                });
            }
            out.push(v as usize);
        }
        rows.push(out);
    }
    Ok(rows)
}

pub fn parse_transition_matrix(text: &str) -> Result<TransitionMatrix> {
    TransitionMatrix::new(parse_raw_matrix(text)?)
}

/// Writes entries with shortest round-trip formatting.
pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = format!("{}\n", m.nrows());
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}
