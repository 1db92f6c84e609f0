//! JSON file formats.
//!
//! Matrix files carry real and imaginary parts as nested arrays:
//!
//! ```json
//! {"dim": 2, "re": [[0.5, 0.5], [0.5, 0.5]], "im": [[0.0, 0.0], [0.0, 0.0]]}
//! ```
//!
//! Instrument files list Kraus operators the same way:
//!
//! ```json
//! {"dim": 2, "kraus": [{"re": [[1.0, 0.0], [0.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}]}
//! ```
//!
//! Parsing rejects ragged arrays and non-finite entries; structural and
//! physical validation (Hermitian/PSD/trace for states, row-column structure
//! and sub-normalization for instruments) is a separate step so callers can
//! distinguish a parse failure from a validation failure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::ComplexMatrix;
use crate::sio::{validate_sio, SioInstrument, DEFAULT_SIO_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrausJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstrumentJson {
    pub dim: usize,
    pub kraus: Vec<KrausJson>,
}

fn assemble(dim: usize, re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<ComplexMatrix> {
    for (field, rows) in [("re", re), ("im", im)] {
        if rows.len() != dim {
            return Err(Error::RaggedMatrix {
                field,
                row: rows.len(),
                len: rows.len(),
                dim,
            });
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::RaggedMatrix {
                    field,
                    row,
                    len: r.len(),
                    dim,
                });
            }
        }
    }
    let m = ComplexMatrix::from_fn(dim, |i, j| Complex64::new(re[i][j], im[i][j]));
    m.check_finite()?;
    Ok(m)
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        assemble(self.dim, &self.re, &self.im)
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let d = m.dim();
        MatrixJson {
            dim: d,
            re: (0..d)
                .map(|i| (0..d).map(|j| m[(i, j)].re).collect())
                .collect(),
            im: (0..d)
                .map(|i| (0..d).map(|j| m[(i, j)].im).collect())
                .collect(),
        }
    }
}

impl InstrumentJson {
    /// Parse and fully validate into an instrument.
    pub fn to_instrument(&self) -> Result<SioInstrument> {
        let kraus = self
            .kraus
            .iter()
            .map(|k| {
                let m = assemble(self.dim, &k.re, &k.im)?;
                validate_sio(&m, DEFAULT_SIO_TOL)
            })
            .collect::<Result<Vec<_>>>()?;
        SioInstrument::new(kraus)
    }

    pub fn from_instrument(ins: &SioInstrument) -> Self {
        InstrumentJson {
            dim: ins.dim(),
            kraus: ins
                .kraus()
                .iter()
                .map(|k| {
                    let mj = MatrixJson::from_matrix(k.matrix());
                    KrausJson { re: mj.re, im: mj.im }
                })
                .collect(),
        }
    }
}

/// Parse a matrix file's contents. JSON syntax errors surface as
/// `serde_json::Error`; shape problems as [`Error::RaggedMatrix`].
pub fn matrix_from_json(text: &str) -> std::result::Result<ComplexMatrix, MatrixParseError> {
    let mj: MatrixJson = serde_json::from_str(text)?;
    Ok(mj.to_matrix()?)
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixJson::from_matrix(m)).expect("plain arrays always serialize")
}

/// Parse an instrument file's contents, validating every Kraus operator.
pub fn instrument_from_json(text: &str) -> std::result::Result<SioInstrument, MatrixParseError> {
    let ij: InstrumentJson = serde_json::from_str(text)?;
    Ok(ij.to_instrument()?)
}

pub fn instrument_to_json(ins: &SioInstrument) -> String {
    serde_json::to_string(&InstrumentJson::from_instrument(ins))
        .expect("plain arrays always serialize")
}

/// Either layer can fail: JSON syntax or array shape.
#[derive(Debug, thiserror::Error)]
pub enum MatrixParseError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Shape(#[from] Error),
}

impl MatrixParseError {
    /// True when the failure is in parsing (syntax or array shape) rather
    /// than in physical validation.
    pub fn is_parse_level(&self) -> bool {
        matches!(
            self,
            MatrixParseError::Json(_)
                | MatrixParseError::Shape(Error::RaggedMatrix { .. })
                | MatrixParseError::Shape(Error::NonFinite { .. })
        )
    }
}
