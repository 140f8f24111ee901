//! Fourier multipliers on the periodic grid `[0, 2π)ⁿ`.
//!
//! Every transform here is a per-mode matrix multiplication in frequency
//! space. Conventions:
//!
//! * the DFT pair is unitary, `f̂(ξ) = N^{-n/2} Σₓ f(x) e^{-iξ·x}`;
//! * frequencies per axis run over `−N/2 … N/2−1`;
//! * symbols are evaluated at the *band-limited frequency* `ξ̃`, which is
//!   `ξ` with every Nyquist component (`ξⱼ = −N/2`) set to zero. This keeps
//!   real inputs real under odd symbols such as `iξⱼ`;
//! * multipliers are undefined where `ξ̃ = 0`. There every transform uses
//!   the field's zero-mode matrix, which is `0` for all Riesz-type
//!   transforms, so `f₀` absorbs the mean of `f`.

mod fft;
mod multiplier;
mod transforms;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::C64;

pub use fft::{dft, idft};
pub use multiplier::MultiplierField;
pub(crate) use transforms::{apply_operator_spectrum, derivative_spectrum};
pub use transforms::{
    apply_operator, construct_f0_complex, construct_f0_geninv, derivative, derivatives, h_operator,
    poisson_solve, riesz_first, riesz_first_multiplier, riesz_second, riesz_second_multiplier,
    F0Split, KernelProjection, RieszOutput, RieszTransform, NORM_SPREAD_WARNING,
};

/// Uniform periodic grid with `N` points per axis in `n` dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    space_dim: usize,
    points_per_axis: usize,
}

impl Grid {
    /// `N` must be even and at least 4.
    pub fn new(space_dim: usize, points_per_axis: usize) -> Result<Self> {
        if space_dim == 0 {
            return Err(Error::InvalidArgument("grid dimension must be at least 1".into()));
        }
        if points_per_axis < 4 || !points_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "points per axis must be even and >= 4, got {points_per_axis}"
            )));
        }
        points_per_axis
            .checked_pow(space_dim as u32)
            .filter(|&t| t <= 1 << 28)
            .ok_or_else(|| Error::InvalidArgument("grid too large".into()))?;
        Ok(Self {
            space_dim,
            points_per_axis,
        })
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// `Nⁿ`.
    pub fn total_points(&self) -> usize {
        self.points_per_axis.pow(self.space_dim as u32)
    }

    /// Grid spacing `2π/N`.
    pub fn spacing(&self) -> f64 {
        std::f64::consts::TAU / self.points_per_axis as f64
    }

    /// Per-axis integer index of a linear index; axis 0 varies fastest.
    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        let n = self.points_per_axis;
        (0..self.space_dim)
            .map(|_| {
                let k = linear % n;
                linear /= n;
                k
            })
            .collect()
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .rev()
            .fold(0, |acc, &k| acc * self.points_per_axis + k)
    }

    /// Signed frequency of a per-axis index, in `−N/2 … N/2−1`.
    pub fn signed_frequency(&self, k: usize) -> i64 {
        let n = self.points_per_axis as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Integer frequency vector of a mode.
    pub fn frequency(&self, mode: usize) -> Vec<i64> {
        self.multi_index(mode)
            .into_iter()
            .map(|k| self.signed_frequency(k))
            .collect()
    }

    /// True when some component of the mode's frequency is `−N/2`.
    pub fn is_nyquist(&self, mode: usize) -> bool {
        self.multi_index(mode)
            .into_iter()
            .any(|k| k == self.points_per_axis / 2)
    }

    /// Frequency with Nyquist components zeroed.
    pub fn band_limited_xi(&self, mode: usize) -> Vec<f64> {
        let mut xi = vec![0.0; self.space_dim];
        self.band_limited_xi_into(mode, &mut xi);
        xi
    }

    pub(crate) fn band_limited_xi_into(&self, mut mode: usize, xi: &mut [f64]) {
        let n = self.points_per_axis;
        for x in xi.iter_mut() {
            let k = mode % n;
            mode /= n;
            *x = if k == n / 2 {
                0.0
            } else {
                self.signed_frequency(k) as f64
            };
        }
    }

    /// Index of the mode `−ξ` (mod `N`), the conjugate partner for real data.
    pub fn negated_mode(&self, mode: usize) -> usize {
        let n = self.points_per_axis;
        let idx: Vec<usize> = self.multi_index(mode).into_iter().map(|k| (n - k) % n).collect();
        self.linear_index(&idx)
    }

    /// Physical coordinates `2πk/N` of a grid point.
    pub fn point(&self, linear: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(linear)
            .into_iter()
            .map(|k| k as f64 * h)
            .collect()
    }
}

/// Vector-valued samples on a grid, point-major with the fiber innermost:
/// component `c` at point `p` is `values[p * fiber_dim + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    fiber_dim: usize,
    values: Vec<C64>,
}

impl GridFunction {
    pub fn new(grid: Grid, fiber_dim: usize, values: Vec<C64>) -> Result<Self> {
        if fiber_dim == 0 {
            return Err(Error::InvalidArgument("fiber dimension must be at least 1".into()));
        }
        crate::error::check_dim("grid function value count", grid.total_points() * fiber_dim, values.len())?;
        Ok(Self {
            grid,
            fiber_dim,
            values,
        })
    }

    pub fn zeros(grid: Grid, fiber_dim: usize) -> Self {
        Self {
            grid,
            fiber_dim,
            values: vec![C64::new(0.0, 0.0); grid.total_points() * fiber_dim],
        }
    }

    /// Samples `f(x)` at every grid point; `f` writes the fiber vector.
    pub fn from_fn<F>(grid: Grid, fiber_dim: usize, f: F) -> Self
    where
        F: Fn(&[f64], &mut [C64]),
    {
        let mut out = Self::zeros(grid, fiber_dim);
        for (p, chunk) in out.values.chunks_mut(fiber_dim).enumerate() {
            f(&grid.point(p), chunk);
        }
        out
    }

    /// Real scalar profile `g(x)` placed in one fiber component.
    pub fn from_real_component<F>(grid: Grid, fiber_dim: usize, component: usize, g: F) -> Self
    where
        F: Fn(&[f64]) -> f64,
    {
        Self::from_fn(grid, fiber_dim, |x, v| v[component] = C64::new(g(x), 0.0))
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Fiber vector at a grid point.
    pub fn at(&self, point: usize) -> &[C64] {
        &self.values[point * self.fiber_dim..(point + 1) * self.fiber_dim]
    }

    /// Unscaled `√(Σ |v|²)` over all samples.
    pub fn l2_coefficient_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|Im|` over all samples.
    pub fn max_imaginary(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            values: self.values.iter().map(|z| z * s).collect(),
            ..self.clone()
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("grid functions live on different grids".into()));
        }
        crate::error::check_dim("fiber dimension", self.fiber_dim, other.fiber_dim)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            ..self.clone()
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    /// `‖self − other‖ / max(‖other‖, tiny)` in the unscaled coefficient norm.
    pub fn relative_distance(&self, other: &Self) -> Result<f64> {
        let d = self.try_sub(other)?.l2_coefficient_norm();
        let base = other.l2_coefficient_norm();
        Ok(if base > 0.0 { d / base } else { d })
    }
}

/// Fourier coefficients laid out like [`GridFunction`], indexed by mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    fiber_dim: usize,
    coeffs: Vec<C64>,
}

impl Spectrum {
    pub fn new(grid: Grid, fiber_dim: usize, coeffs: Vec<C64>) -> Result<Self> {
        crate::error::check_dim("spectrum coefficient count", grid.total_points() * fiber_dim, coeffs.len())?;
        Ok(Self {
            grid,
            fiber_dim,
            coeffs,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn mode(&self, m: usize) -> &[C64] {
        &self.coeffs[m * self.fiber_dim..(m + 1) * self.fiber_dim]
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Real band-limited random field: independent standard Gaussian
/// coefficients on every mode with `|ξ|_∞ ≤ band` (zero mode included),
/// symmetrized as `(g(ξ) + conj g(−ξ)) / 2` so the samples are real.
///
/// `stream` selects an independent ChaCha stream under the same `seed`.
pub fn random_band_limited(
    grid: Grid,
    fiber_dim: usize,
    band: usize,
    seed: u64,
    stream: u64,
) -> Result<GridFunction> {
    if 2 * band >= grid.points_per_axis() {
        return Err(Error::InvalidArgument(format!(
            "band {band} must be below N/2 = {}",
            grid.points_per_axis() / 2
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let total = grid.total_points();
    let mut raw = vec![C64::new(0.0, 0.0); total * fiber_dim];
    let in_band = |m: usize| grid.frequency(m).iter().all(|&k| k.unsigned_abs() as usize <= band);
    for m in (0..total).filter(|&m| in_band(m)) {
        for c in 0..fiber_dim {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            raw[m * fiber_dim + c] = Complex64::new(re, im);
        }
    }
    let mut sym = vec![C64::new(0.0, 0.0); total * fiber_dim];
    for m in 0..total {
        let partner = grid.negated_mode(m);
        for c in 0..fiber_dim {
            sym[m * fiber_dim + c] = (raw[m * fiber_dim + c] + raw[partner * fiber_dim + c].conj()) * 0.5;
        }
    }
    let mut f = idft(&Spectrum::new(grid, fiber_dim, sym)?);
    for z in f.values_mut() {
        z.im = 0.0;
    }
    Ok(f)
}
