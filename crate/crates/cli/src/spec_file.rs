//! Operator spec files.
//!
//! ```json
//! { "n": 2, "dim_u": 1, "dim_v": 2,
//!   "coefficients": [[[1], [0]], [[0], [1]]],
//!   "q": [[[0, 1]], [[-1, 0]]],
//!   "r": [[[0]], [[0]]] }
//! ```
//!
//! `coefficients` holds `n` row-major `dim_v × dim_u` matrices. The optional
//! `q` block (`V → W`) and `r` block (`X → U`) hold `n` matrices each; their
//! outer dimensions are read from the first matrix.

use std::path::Path;

use nalgebra::DMatrix;
use rankcomplex::{ComplexChain, DiffOperator};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpecFile {
    pub n: usize,
    pub dim_u: usize,
    pub dim_v: usize,
    pub coefficients: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<Vec<f64>>>>,
}

/// The operators a spec describes.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    pub p: DiffOperator,
    pub q: Option<DiffOperator>,
    pub r: Option<DiffOperator>,
}

impl OperatorSet {
    /// `R → P → Q`, with `Q = 0` into a one-dimensional space when absent.
    pub fn chain(&self) -> Result<ComplexChain, CliError> {
        let right = match &self.q {
            Some(q) => q.clone(),
            None => DiffOperator::zero(self.p.space_dim(), self.p.dim_target(), 1)?,
        };
        Ok(ComplexChain::new(self.r.clone(), self.p.clone(), right)?)
    }
}

fn block(
    field: &str,
    mats: &[Vec<Vec<f64>>],
    n: usize,
    rows: Option<usize>,
    cols: usize,
) -> Result<DiffOperator, CliError> {
    if mats.len() != n {
        return Err(CliError::input(format!("{field}: expected {n} matrices (one per axis), found {}", mats.len())));
    }
    let rows = match rows {
        Some(r) => r,
        None => mats[0].len(),
    };
    if rows == 0 {
        return Err(CliError::input(format!("{field}[0]: matrix has no rows")));
    }
    let mut out = Vec::with_capacity(n);
    for (k, m) in mats.iter().enumerate() {
        if m.len() != rows {
            return Err(CliError::input(format!("{field}[{k}]: expected {rows} rows, found {}", m.len())));
        }
        for (i, row) in m.iter().enumerate() {
            if row.len() != cols {
                return Err(CliError::input(format!("{field}[{k}][{i}]: expected {cols} columns, found {}", row.len())));
            }
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(CliError::input(format!("{field}[{k}][{i}][{j}]: entry is not finite")));
            }
        }
        out.push(DMatrix::from_fn(rows, cols, |i, j| m[i][j]));
    }
    Ok(DiffOperator::new(out)?)
}

fn to_rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
}

fn to_block(op: &DiffOperator) -> Vec<Vec<Vec<f64>>> {
    op.coefficients().iter().map(to_rows).collect()
}

impl OperatorSpecFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::input(format!("malformed operator spec at line {} column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| e.context(&path.display().to_string()))
    }

    /// Validates dimensions and builds the operators.
    pub fn operators(&self) -> Result<OperatorSet, CliError> {
        if self.n == 0 {
            return Err(CliError::input("n: must be at least 1"));
        }
        if self.dim_u == 0 || self.dim_v == 0 {
            return Err(CliError::input("dim_u, dim_v: must be at least 1"));
        }
        let p = block("coefficients", &self.coefficients, self.n, Some(self.dim_v), self.dim_u)?;
        let q = self
            .q
            .as_deref()
            .map(|q| block("q", q, self.n, None, self.dim_v))
            .transpose()?;
        let r = match self.r.as_deref() {
            None => None,
            Some(r) => {
                let cols = r.first().and_then(|m| m.first()).map_or(0, Vec::len);
                if cols == 0 {
                    return Err(CliError::input("r[0]: matrix has no columns"));
                }
                Some(block("r", r, self.n, Some(self.dim_u), cols)?)
            }
        };
        Ok(OperatorSet { p, q, r })
    }

    pub fn from_operators(ops: &OperatorSet) -> Self {
        Self {
            n: ops.p.space_dim(),
            dim_u: ops.p.dim_source(),
            dim_v: ops.p.dim_target(),
            coefficients: to_block(&ops.p),
            q: ops.q.as_ref().map(to_block),
            r: ops.r.as_ref().map(to_block),
        }
    }
}
