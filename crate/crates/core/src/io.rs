//! JSON state files.
//!
//! ```json
//! { "dim": 2, "matrix": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]] }
//! { "dim": 2, "vector": [[1.0, 0.0], [0.0, 0.0]] }
//! ```
//!
//! Each entry is `[real, imaginary]`. Numbers are written in shortest
//! round-trip form, so a written state re-parses to the identical matrix.

use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;
use crate::states::{density_from_matrix, DensityMatrix, PureState};

/// On-disk layout; exactly one of `matrix` and `vector` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone)]
pub enum StateFile<T: Real> {
    Mixed(DensityMatrix<T>),
    Pure(PureState<T>),
}

impl<T: Real> StateFile<T> {
    pub fn density(&self) -> DensityMatrix<T> {
        match self {
            StateFile::Mixed(rho) => rho.clone(),
            StateFile::Pure(psi) => psi.density(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            StateFile::Mixed(rho) => rho.dim(),
            StateFile::Pure(psi) => psi.dim(),
        }
    }
}

fn entry<T: Real>([re, im]: [f64; 2]) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

fn pair<T: Real>(z: &Complex<T>) -> [f64; 2] {
    [z.re.as_f64(), z.im.as_f64()]
}

impl StateDocument {
    pub fn from_matrix<T: Real>(m: &ComplexMatrix<T>) -> Self {
        Self {
            dim: m.dim(),
            matrix: Some(m.rows().map(|row| row.iter().map(pair).collect()).collect()),
            vector: None,
        }
    }

    pub fn from_density<T: Real>(rho: &DensityMatrix<T>) -> Self {
        Self::from_matrix(rho.matrix())
    }

    pub fn from_pure<T: Real>(psi: &PureState<T>) -> Self {
        Self {
            dim: psi.dim(),
            matrix: None,
            vector: Some(psi.as_slice().iter().map(pair).collect()),
        }
    }

    /// Raw matrix with shape checks only (no state validation).
    pub fn to_matrix<T: Real>(&self) -> Result<ComplexMatrix<T>> {
        let rows = self
            .matrix
            .as_ref()
            .ok_or_else(|| Error::Parse("field `matrix` missing".into()))?;
        if rows.len() != self.dim {
            return Err(Error::Parse(format!(
                "field `matrix` has {} rows but dim = {}",
                rows.len(),
                self.dim
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != self.dim {
                return Err(Error::Parse(format!(
                    "matrix row {i} has {} entries, expected {}",
                    row.len(),
                    self.dim
                )));
            }
        }
        ComplexMatrix::from_rows(
            rows.iter()
                .map(|row| row.iter().copied().map(entry).collect())
                .collect(),
        )
        .map_err(|e| Error::Parse(format!("field `matrix`: {e}")))
    }

    pub fn to_state<T: Real>(&self) -> Result<StateFile<T>> {
        if self.dim == 0 {
            return Err(Error::Parse("field `dim` must be positive".into()));
        }
        match (&self.matrix, &self.vector) {
            (Some(_), None) => {
                let m = self.to_matrix()?;
                Ok(StateFile::Mixed(density_from_matrix(m)?))
            }
            (None, Some(v)) => {
                if v.len() != self.dim {
                    return Err(Error::Parse(format!(
                        "field `vector` has {} entries but dim = {}",
                        v.len(),
                        self.dim
                    )));
                }
                Ok(StateFile::Pure(PureState::new(
                    v.iter().copied().map(entry).collect(),
                )?))
            }
            (Some(_), Some(_)) => Err(Error::Parse("both `matrix` and `vector` present".into())),
            (None, None) => Err(Error::Parse(
                "one of `matrix` or `vector` is required".into(),
            )),
        }
    }
}

pub fn parse_state<T: Real>(text: &str) -> Result<StateFile<T>> {
    let doc: StateDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.to_state()
}

pub fn read_state<T: Real>(path: impl AsRef<Path>) -> Result<StateFile<T>> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_state(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn to_json(doc: &StateDocument) -> String {
    serde_json::to_string_pretty(doc).expect("state documents always serialize")
}

pub fn write_state(path: impl AsRef<Path>, doc: &StateDocument) -> std::io::Result<()> {
    fs::write(path, to_json(doc) + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_matrix_and_vector() {
        let text = r#"{"dim": 2, "matrix": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]}"#;
        let s = parse_state::<f64>(text).unwrap();
        assert_eq!(s.density(), DensityMatrix::maximally_mixed(2));

        let text = r#"{"dim": 2, "vector": [[0.6, 0.0], [0.0, 0.8]]}"#;
        let StateFile::Pure(psi) = parse_state::<f64>(text).unwrap() else {
            panic!()
        };
        assert_eq!(psi.as_slice()[1], Complex::new(0.0, 0.8));
    }

    #[test]
    fn rejects_malformed_rows() {
        let text = "{\"dim\": 2,\n \"matrix\": [[[1.0, 0.0], [0.0, 0.0]],\n [[0.0, 0.0]]]}";
        let err = parse_state::<f64>(text).unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");

        let text = "{\"dim\": 2,\n \"matrix\": [[[1.0, 0.0], [0.0, 0.0, 3.0]],\n [[0.0, 0.0], [0.0, 0.0]]]}";
        let err = parse_state::<f64>(text).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let text = r#"{"dim": 3, "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}"#;
        assert!(matches!(parse_state::<f64>(text), Err(Error::Parse(_))));
        let text = r#"{"dim": 3, "vector": [[1.0, 0.0]]}"#;
        assert!(matches!(parse_state::<f64>(text), Err(Error::Parse(_))));
    }

    #[test]
    fn rejects_invalid_states() {
        let text = r#"{"dim": 2, "matrix": [[[0.6, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.6, 0.0]]]}"#;
        assert!(matches!(
            parse_state::<f64>(text),
            Err(Error::InvalidState(_))
        ));
        let text = r#"{"dim": 2, "vector": [[1.0, 0.0], [1.0, 0.0]]}"#;
        assert!(matches!(
            parse_state::<f64>(text),
            Err(Error::InvalidState(_))
        ));
        let text = r#"{"dim": 1}"#;
        assert!(matches!(parse_state::<f64>(text), Err(Error::Parse(_))));
    }
}
