//! On-disk formats: instance JSON, matrix CSV dumps and the reduced-problem JSON.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::DistanceMatrix;
use crate::reduction::ReducedProblem;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: parse error: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Invalid { path: String, source: crate::Error },
    #[error("{path}: field n = {n} does not match {len} distance entries")]
    SizeMismatch { path: String, n: usize, len: usize },
}

/// `{"n": int, "d": [row-major n*n reals], "points": [[x, y], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    pub d: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
}

impl InstanceFile {
    pub fn new(d: &DistanceMatrix, points: Option<Vec<[f64; 2]>>) -> Self {
        Self {
            n: d.n(),
            d: d.row_major().to_vec(),
            points,
        }
    }
}

/// Reads and validates an instance. The triangle inequality is not required.
pub fn load_instance(path: &Path) -> Result<(DistanceMatrix, InstanceFile), IoError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| IoError::Io {
        path: shown.clone(),
        source,
    })?;
    let file: InstanceFile = serde_json::from_str(&text).map_err(|source| IoError::Parse {
        path: shown.clone(),
        source,
    })?;
    if file.n.checked_mul(file.n) != Some(file.d.len()) {
        return Err(IoError::SizeMismatch {
            path: shown,
            n: file.n,
            len: file.d.len(),
        });
    }
    let d = DistanceMatrix::from_row_major(file.n, file.d.clone(), false).map_err(|source| {
        IoError::Invalid {
            path: shown,
            source,
        }
    })?;
    Ok((d, file))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Row-major CSV with shortest round-trip decimal rendering of each entry.
pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<(), IoError> {
    let mut f = fs::File::create(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    f.write_all(matrix_csv(m).as_bytes())
        .map_err(|source| IoError::Io {
            path: path.display().to_string(),
            source,
        })
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Reduced problem as written by the `reduce` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedDump {
    pub n: usize,
    #[serde(rename = "A_r")]
    pub a_r: Vec<Vec<f64>>,
    pub b_r: Vec<f64>,
    #[serde(rename = "E_r")]
    pub e_r: Vec<Vec<f64>>,
    pub c0: f64,
    /// Four-city instances only: exact match with the closed-form blocks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_match: Option<bool>,
}

impl ReducedDump {
    pub fn new(r: &ReducedProblem, reference_match: Option<bool>) -> Self {
        Self {
            n: r.n,
            a_r: matrix_rows(&r.a_r),
            b_r: r.b_r.as_slice().to_vec(),
            e_r: matrix_rows(&r.e_r),
            c0: r.c0,
            reference_match,
        }
    }

    pub fn a_r_matrix(&self) -> DMatrix<f64> {
        rows_to_matrix(&self.a_r)
    }

    pub fn e_r_matrix(&self) -> DMatrix<f64> {
        rows_to_matrix(&self.e_r)
    }

    pub fn b_r_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.b_r)
    }
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let ncols = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{unit_square, unit_square_reduced};

    #[test]
    fn csv_rendering() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 0.1, 2f64.sqrt(), 4.0]);
        assert_eq!(matrix_csv(&m), "0,0.1\n1.4142135623730951,4\n");
    }

    #[test]
    fn instance_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sq.json");
        write_json(&path, &InstanceFile::new(&unit_square(), None)).unwrap();
        let (d, _) = load_instance(&path).unwrap();
        assert_eq!(
            d,
            DistanceMatrix::from_rows(&unit_square().rows(), false).unwrap()
        );
    }

    #[test]
    fn instance_file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, "{\"n\": 3, \"d\": [").unwrap();
        assert!(matches!(load_instance(&bad), Err(IoError::Parse { .. })));
        std::fs::write(&bad, "{\"n\": 3, \"d\": [0, 1, 1, 0]}").unwrap();
        assert!(matches!(
            load_instance(&bad),
            Err(IoError::SizeMismatch { .. })
        ));
        std::fs::write(&bad, "{\"n\": 2, \"d\": [0, 1, 1, 0]}").unwrap();
        assert!(matches!(
            load_instance(&bad),
            Err(IoError::Invalid {
                source: crate::Error::TooFewCities { n: 2 },
                ..
            })
        ));
    }

    #[test]
    fn reduced_dump_field_names() {
        let dump = ReducedDump::new(&unit_square_reduced(), Some(true));
        let v: serde_json::Value = serde_json::to_value(&dump).unwrap();
        for key in ["n", "A_r", "b_r", "E_r", "c0", "reference_match"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: ReducedDump = serde_json::from_value(v).unwrap();
        assert_eq!(back.a_r_matrix(), unit_square_reduced().a_r);
    }
}
