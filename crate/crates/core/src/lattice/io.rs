//! Matrix files.
//!
//! JSON: `{"n": 3, "rows": [[...], [...], [...]]}`.
//! CSV: `n` lines of `n` comma-separated values, no header.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PosMatrix, Tolerances};
use crate::error::{Error, Result};

/// Serialized form of a matrix, shared by matrix files and report payloads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &nalgebra::DMatrix<f64>) -> Self {
        MatrixFile {
            n: m.nrows(),
            rows: (0..m.nrows())
                .map(|i| m.row(i).iter().copied().collect())
                .collect(),
        }
    }

    pub fn to_pos_matrix(&self, tol: &Tolerances) -> Result<PosMatrix> {
        if self.rows.len() != self.n {
            return Err(Error::Parse(format!(
                "declared n = {} but found {} rows",
                self.n,
                self.rows.len()
            )));
        }
        if let Some((i, r)) = self
            .rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != self.n)
        {
            return Err(Error::Parse(format!(
                "ragged row {}: {} entries, expected {}",
                i + 1,
                r.len(),
                self.n
            )));
        }
        PosMatrix::from_rows(&self.rows, tol)
    }
}

impl From<&PosMatrix> for MatrixFile {
    fn from(m: &PosMatrix) -> Self {
        MatrixFile::from_matrix(m.as_matrix())
    }
}

pub fn parse_json(text: &str, tol: &Tolerances) -> Result<PosMatrix> {
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix JSON: {e}")))?;
    file.to_pos_matrix(tol)
}

pub fn parse_csv(text: &str, tol: &Tolerances) -> Result<PosMatrix> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("line {}: `{}`: {e}", lineno + 1, cell.trim()))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Parse(format!(
            "ragged row {}: {} entries, expected {n}",
            i + 1,
            r.len()
        )));
    }
    PosMatrix::from_rows(&rows, tol)
}

/// Parses either format; JSON is recognized by a leading `{`.
pub fn parse_matrix(text: &str, tol: &Tolerances) -> Result<PosMatrix> {
    if text.trim_start().starts_with('{') {
        parse_json(text, tol)
    } else {
        parse_csv(text, tol)
    }
}

pub fn read_matrix(path: impl AsRef<Path>, tol: &Tolerances) -> Result<PosMatrix> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_matrix(&text, tol)
}

pub fn to_json(m: &PosMatrix) -> String {
    serde_json::to_string(&MatrixFile::from(m)).expect("matrix serialization cannot fail")
}
