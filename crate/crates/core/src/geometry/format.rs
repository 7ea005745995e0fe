//! Plain-text region files.
//!
//! The format is line oriented. Blank lines and everything after `#` are
//! ignored. The data lines are, in order:
//!
//! ```text
//! n m m_I          header: variables, equalities, inequality rows
//! <m lines>        rows of A, n numbers each
//! <1 line>         b, m numbers (omitted when m = 0)
//! <m_I lines>      rows of A_I, n numbers each
//! <1 line>         l, m_I numbers (omitted when m_I = 0)
//! <1 line>         u, m_I numbers (omitted when m_I = 0)
//! <1 line>         reference point, n numbers
//! ```
//!
//! Bounds may be `inf` or `-inf`. Numbers are written with the shortest
//! representation that round-trips exactly.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::FeasibleRegion;

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl FormatError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

/// Non-empty data lines of `text` with comments stripped, paired with their
/// 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.split('#').next().unwrap_or("").trim();
            (!line.is_empty()).then_some((i + 1, line))
        })
        .collect()
}

pub(crate) fn parse_numbers(line: usize, text: &str, expected: usize) -> Result<Vec<f64>, FormatError> {
    let values = text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .ok_or_else(|| FormatError::new(line, format!("invalid number `{tok}`")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if values.len() != expected {
        return Err(FormatError::new(
            line,
            format!("expected {expected} numbers, found {}", values.len()),
        ));
    }
    Ok(values)
}

pub fn parse_region(text: &str) -> Result<FeasibleRegion, FormatError> {
    parse_region_lines(&data_lines(text))
}

pub(crate) fn parse_region_lines(lines: &[(usize, &str)]) -> Result<FeasibleRegion, FormatError> {
    let mut it = lines.iter();
    let &(hline, header) = it
        .next()
        .ok_or_else(|| FormatError::new(0, "missing header `n m m_I`"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| FormatError::new(hline, "header must be three non-negative integers `n m m_I`"))?;
    let [n, m, m_i] = dims[..] else {
        return Err(FormatError::new(
            hline,
            "header must be three non-negative integers `n m m_I`",
        ));
    };
    let mut last_line = hline;
    let mut next = |what: &str, expected: usize| -> Result<(usize, Vec<f64>), FormatError> {
        let &(line, text) = it
            .next()
            .ok_or_else(|| FormatError::new(last_line, format!("unexpected end of file, expected {what}")))?;
        last_line = line;
        Ok((
            line,
            parse_numbers(line, text, expected)
                .map_err(|e| FormatError::new(e.line, format!("{what}: {}", e.message)))?,
        ))
    };

    let mut a = DMatrix::zeros(m, n);
    for r in 0..m {
        let (_, row) = next("row of A", n)?;
        a.row_mut(r).copy_from_slice(&row);
    }
    let b = if m > 0 {
        DVector::from_vec(next("b", m)?.1)
    } else {
        DVector::zeros(0)
    };
    let mut a_i = DMatrix::zeros(m_i, n);
    for r in 0..m_i {
        let (_, row) = next("row of A_I", n)?;
        a_i.row_mut(r).copy_from_slice(&row);
    }
    let (lower, upper) = if m_i > 0 {
        (
            DVector::from_vec(next("lower bounds", m_i)?.1),
            DVector::from_vec(next("upper bounds", m_i)?.1),
        )
    } else {
        (DVector::zeros(0), DVector::zeros(0))
    };
    let (ref_line, reference) = next("reference point", n)?;
    if let Some(&(line, _)) = it.next() {
        return Err(FormatError::new(line, "unexpected data after the reference point"));
    }
    FeasibleRegion::new(a, b, a_i, lower, upper, DVector::from_vec(reference))
        .map_err(|e| FormatError::new(ref_line, e.to_string()))
}

fn push_row<'a>(out: &mut String, values: impl IntoIterator<Item = &'a f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        let _ = write!(out, "{v:?}");
    }
    out.push('\n');
}

pub fn write_region(region: &FeasibleRegion) -> String {
    let (n, m, m_i) = (region.dim(), region.num_equalities(), region.num_inequalities());
    let mut out = String::new();
    let _ = writeln!(out, "# n m m_I\n{n} {m} {m_i}");
    if m > 0 {
        out.push_str("# A\n");
        for r in region.eq_matrix().row_iter() {
            push_row(&mut out, r.iter());
        }
        out.push_str("# b\n");
        push_row(&mut out, region.eq_rhs().iter());
    }
    if m_i > 0 {
        out.push_str("# A_I\n");
        for r in region.ineq_matrix().row_iter() {
            push_row(&mut out, r.iter());
        }
        out.push_str("# lower\n");
        push_row(&mut out, region.lower().iter());
        out.push_str("# upper\n");
        push_row(&mut out, region.upper().iter());
    }
    out.push_str("# reference point\n");
    push_row(&mut out, region.reference().iter());
    out
}
