//! JSON matrix interchange format.
//!
//! ```json
//! {"dim": 2, "entries": [[0, 0], [0.5, 0], [-0.5, 0], [1, 0]], "label": "B"}
//! ```
//!
//! Entries are row-major `[re, im]` pairs. Bare numbers are read as `[x, 0]`;
//! output always uses pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Pair([f64; 2]),
    Bare(f64),
}

impl Entry {
    pub fn value(self) -> Complex64 {
        match self {
            Entry::Pair([re, im]) => Complex64::new(re, im),
            Entry::Bare(re) => Complex64::new(re, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub dim: usize,
    pub entries: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl MatrixDocument {
    pub fn from_operator(m: &OperatorMatrix, label: Option<String>) -> Self {
        Self {
            dim: m.dim(),
            entries: m
                .to_row_major()
                .into_iter()
                .map(|z| Entry::Pair([z.re, z.im]))
                .collect(),
            label,
        }
    }

    pub fn to_operator(&self) -> Result<OperatorMatrix> {
        let expected = self.dim * self.dim;
        if self.dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if self.entries.len() != expected {
            return Err(Error::LengthMismatch {
                dim: self.dim,
                expected,
                actual: self.entries.len(),
            });
        }
        let values: Vec<Complex64> = self.entries.iter().map(|e| e.value()).collect();
        if let Some(index) = values
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFiniteEntry { index });
        }
        OperatorMatrix::from_row_slice(self.dim, &values)
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix documents always serialize")
    }
}

pub fn parse_matrix(bytes: &[u8]) -> Result<OperatorMatrix> {
    MatrixDocument::parse(bytes)?.to_operator()
}

pub fn serialize_matrix(m: &OperatorMatrix, label: Option<&str>) -> String {
    MatrixDocument::from_operator(m, label.map(str::to_owned)).to_json()
}
