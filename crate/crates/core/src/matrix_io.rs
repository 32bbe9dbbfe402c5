//! JSON exchange format for square complex matrices:
//! `{"n": 2, "rows": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]}`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StrataError};
use crate::linalg::CMat;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMat) -> Self {
        let rows = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        Self { n: m.nrows(), rows }
    }

    /// Validated matrix: square of order `n` with finite entries.
    pub fn to_matrix(&self) -> Result<CMat> {
        if self.rows.len() != self.n {
            return Err(StrataError::MatrixFile(format!("expected {} rows, found {}", self.n, self.rows.len())));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.n {
                return Err(StrataError::MatrixFile(format!(
                    "row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    self.n
                )));
            }
            if let Some(j) = row.iter().position(|e| !e[0].is_finite() || !e[1].is_finite()) {
                return Err(StrataError::MatrixFile(format!("entry ({}, {}) is not finite", i + 1, j + 1)));
            }
        }
        Ok(CMat::from_fn(self.n, self.n, |i, j| {
            let [re, im] = self.rows[i][j];
            Complex64::new(re, im)
        }))
    }
}

pub fn parse_matrix_json(text: &str) -> Result<CMat> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| StrataError::MatrixFile(e.to_string()))?;
    file.to_matrix()
}

pub fn read_matrix_file(path: &Path) -> Result<CMat> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| StrataError::MatrixFile(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix_json(&text)
}

pub fn matrix_to_json(m: &CMat) -> serde_json::Value {
    serde_json::to_value(MatrixFile::from_matrix(m)).expect("plain data serialises")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn roundtrip() {
        let m = CMat::from_fn(2, 2, |i, j| c(i as f64, j as f64 - 0.5));
        let text = matrix_to_json(&m).to_string();
        assert_eq!(parse_matrix_json(&text).unwrap(), m);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(parse_matrix_json(r#"{"n": 2, "rows": [[[1, 0]]]}"#).is_err());
        assert!(parse_matrix_json(r#"{"n": 1, "rows": [[[1, 0], [2, 0]]]}"#).is_err());
        assert!(parse_matrix_json(r#"{"n": 1, "rows": [[[1]]]}"#).is_err());
        assert!(parse_matrix_json("not json").is_err());
    }
}
