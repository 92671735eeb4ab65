//! Plain-text matrix files.
//!
//! ```text
//! 2 2
//! 1 0 0 0
//! 0 0 1 0
//! ```
//!
//! The first line holds `rows cols`; each following line holds one row as
//! `2·cols` numbers, real and imaginary parts interleaved.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use super::matrix::ComplexMatrix;
use super::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TextError {
    #[error("missing header line")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error(transparent)]
    Matrix(#[from] LinalgError),
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, TextError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (header_line, header) = lines.next().ok_or(TextError::MissingHeader)?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(TextError::Syntax {
            line: header_line,
            message: "header must be `rows cols`".into(),
        });
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>().map_err(|_| TextError::Syntax {
            line: header_line,
            message: format!("invalid dimension `{s}`"),
        })
    };
    let rows = parse_dim(dims[0])?;
    let cols = parse_dim(dims[1])?;
    if rows == 0 || cols == 0 {
        return Err(LinalgError::EmptyMatrix.into());
    }

    let mut data = Vec::with_capacity(rows.saturating_mul(cols).min(1 << 20));
    let mut found = 0;
    for (line, content) in lines {
        found += 1;
        if found > rows {
            continue;
        }
        let values: Vec<f64> = content
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| TextError::Syntax {
                    line,
                    message: format!("invalid number `{tok}`"),
                })
            })
            .collect::<Result<_, _>>()?;
        if values.len() != 2 * cols {
            return Err(TextError::Syntax {
                line,
                message: format!("expected {} numbers, found {}", 2 * cols, values.len()),
            });
        }
        data.extend(values.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])));
    }
    if found != rows {
        return Err(TextError::RowCount { expected: rows, found });
    }
    Ok(ComplexMatrix::new(rows, cols, data)?)
}

/// Seventeen significant digits, enough for an exact `f64` round trip.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for r in 0..m.rows() {
        let mut first = true;
        for z in m.row(r) {
            for part in [z.re, z.im] {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{part:.16e}").expect("writing to a String");
            }
        }
        out.push('\n');
    }
    out
}
