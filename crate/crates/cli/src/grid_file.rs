//! GridFunction files: a JSON header plus a flat array of `[re, im]` pairs.
//!
//! Values are point-major with axis 0 varying fastest and the fiber
//! components innermost. Point `(k_0, …, k_{n-1})` sits at
//! `x_j = 2π k_j / N`.

use std::path::Path;

use rankcomplex::spectral::{Grid, GridFunction};
use rankcomplex::C64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const LAYOUT: &str = "row-major-axis0-fastest";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFunctionFile {
    pub format_version: u32,
    pub n: usize,
    #[serde(rename = "N")]
    pub points_per_axis: usize,
    pub fiber_dim: usize,
    pub layout: String,
    pub values: Vec<[f64; 2]>,
}

impl GridFunctionFile {
    pub fn from_function(f: &GridFunction) -> Self {
        let grid = f.grid();
        Self {
            format_version: 1,
            n: grid.space_dim(),
            points_per_axis: grid.points_per_axis(),
            fiber_dim: f.fiber_dim(),
            layout: LAYOUT.to_string(),
            values: f.values().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_function(&self) -> Result<GridFunction, CliError> {
        if self.format_version != 1 {
            return Err(CliError::input(format!("format_version: unsupported value {}", self.format_version)));
        }
        if self.layout != LAYOUT {
            return Err(CliError::input(format!("layout: expected {LAYOUT:?}")));
        }
        let grid = Grid::new(self.n, self.points_per_axis).map_err(|e| CliError::input(format!("n / N: {e}")))?;
        let expected = grid.total_points() * self.fiber_dim;
        if self.fiber_dim == 0 || self.values.len() != expected {
            return Err(CliError::input(format!(
                "values: expected N^n * fiber_dim = {expected} pairs, found {}",
                self.values.len()
            )));
        }
        if let Some(i) = self.values.iter().position(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(CliError::input(format!("values[{i}]: entry is not finite")));
        }
        let values = self.values.iter().map(|v| C64::new(v[0], v[1])).collect();
        Ok(GridFunction::new(grid, self.fiber_dim, values)?)
    }

    pub fn load(path: &Path) -> Result<GridFunction, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        let file: Self = serde_json::from_str(&text).map_err(|e| {
            CliError::input(format!(
                "{}: malformed grid function at line {} column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        file.to_function().map_err(|e| e.context(&path.display().to_string()))
    }

    pub fn save(f: &GridFunction, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string(&Self::from_function(f)).expect("grid function serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
    }
}
