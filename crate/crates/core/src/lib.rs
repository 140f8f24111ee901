//! Constant-rank and elliptic-complex certification for first-order
//! constant-coefficient differential operators, with spectral
//! constructions of kernel projections and empirical Poincaré constants on
//! periodic grids.
//!
//! Modules, bottom up:
//!
//! * [`linalg`]: SVD, numerical rank, Moore–Penrose pseudoinverse;
//! * [`symbol`]: operators, symbols, adjoints, the second-order symbol;
//! * [`catalog`]: de Rham, gradient/curl and a rank-dropping operator;
//! * [`rank_analysis`]: sampled constant rank, exactness, classification;
//! * [`spectral`]: Fourier multipliers on `[0, 2π)ⁿ`;
//! * [`norms`]: discrete `Lᵖ` norms and Poincaré ratios.

pub mod catalog;
pub mod error;
pub mod linalg;
pub mod norms;
pub mod parallel;
pub mod rank_analysis;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
pub use linalg::{Matrix, C64, DEFAULT_REL_TOL};
pub use spectral::{Grid, GridFunction};
pub use symbol::{ComplexChain, DiffOperator, HomogeneousOperator};
