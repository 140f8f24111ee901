use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty matrix ({rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ellipticity violated: symbol is singular at xi = {xi:?} (smallest eigenvalue {min_eigenvalue:e})")]
    Ellipticity { xi: Vec<f64>, min_eigenvalue: f64 },

    #[error("right-hand side has energy {magnitude:e} on modes where the band-limited frequency is 0 (the mean and pure-Nyquist modes), where the symbol vanishes")]
    ZeroModeObstruction { magnitude: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
