use super::multiplier::map_modes;
use super::{dft, idft, Grid, GridFunction, MultiplierField, Spectrum};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Matrix, C64, DEFAULT_REL_TOL};
use crate::symbol::{self, ComplexChain, DiffOperator};

/// Ratio of largest to smallest `|ξ|·‖P†(iξ)‖` over the nonzero modes above
/// which a constant-rank violation is suspected. Under constant rank this
/// degree-0 quantity is continuous on the sphere and bounded away from 0.
pub const NORM_SPREAD_WARNING: f64 = 1e3;

fn check_grid(op: &DiffOperator, grid: Grid) -> Result<()> {
    check_dim("operator / grid space dimension", op.space_dim(), grid.space_dim())
}

fn check_axis(grid: Grid, axis: usize) -> Result<()> {
    if axis >= grid.space_dim() {
        return Err(Error::InvalidArgument(format!(
            "axis {axis} out of range for a {}-dimensional grid",
            grid.space_dim()
        )));
    }
    Ok(())
}

pub(crate) fn derivative_spectrum(s: &Spectrum, axis: usize) -> Spectrum {
    map_modes(s, s.fiber_dim(), |_, xi, input, out| {
        let factor = C64::new(0.0, xi[axis]);
        for (o, z) in out.iter_mut().zip(input) {
            *o = factor * z;
        }
    })
}

/// `∂f/∂x_axis` (axis is 0-based), computed as multiplication by `iξ̃_axis`.
pub fn derivative(f: &GridFunction, axis: usize) -> Result<GridFunction> {
    check_axis(f.grid(), axis)?;
    Ok(idft(&derivative_spectrum(&dft(f), axis)))
}

/// All first partial derivatives, sharing one forward transform.
pub fn derivatives(f: &GridFunction) -> Vec<GridFunction> {
    let s = dft(f);
    (0..f.grid().space_dim())
        .map(|j| idft(&derivative_spectrum(&s, j)))
        .collect()
}

pub(crate) fn apply_operator_spectrum(op: &DiffOperator, s: &Spectrum) -> Spectrum {
    let coeffs = op.coefficients();
    let d_in = op.dim_source();
    map_modes(s, op.dim_target(), |_, xi, input, out| {
        out.fill(C64::new(0.0, 0.0));
        for (a, &x) in coeffs.iter().zip(xi) {
            if x == 0.0 {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..d_in {
                    acc += input[c] * a[(r, c)];
                }
                *o += acc * x;
            }
        }
        for o in out.iter_mut() {
            *o = C64::new(-o.im, o.re);
        }
    })
}

/// `P f`, computed per mode as `P(iξ̃) f̂(ξ)`.
pub fn apply_operator(op: &DiffOperator, f: &GridFunction) -> Result<GridFunction> {
    check_grid(op, f.grid())?;
    check_dim("operator source / function fiber", op.dim_source(), f.fiber_dim())?;
    Ok(idft(&apply_operator_spectrum(op, &dft(f))))
}

/// First-order Riesz multiplier `iξⱼ P†(iξ)`; zero at `ξ = 0`.
pub fn riesz_first_multiplier(op: &DiffOperator, j: usize, xi: &[f64], rel_tol: f64) -> Result<Matrix> {
    check_dim("frequency length", op.space_dim(), xi.len())?;
    if j >= xi.len() {
        return Err(Error::InvalidArgument(format!("axis {j} out of range")));
    }
    if xi.iter().all(|&x| x == 0.0) {
        return Ok(Matrix::zeros(op.dim_source(), op.dim_target()));
    }
    let p = linalg::pinv(&op.eval_symbol_i(xi)?, rel_tol)?;
    Ok(p * C64::new(0.0, xi[j]))
}

/// Result of a first-order Riesz transform together with the range of
/// `|ξ|·‖P†(iξ)‖_F` over the nonzero modes.
#[derive(Debug, Clone)]
pub struct RieszOutput {
    pub output: GridFunction,
    pub min_multiplier_norm: f64,
    pub max_multiplier_norm: f64,
}

impl RieszOutput {
    /// `max / min` of the normalized pseudoinverse norms (infinite if some
    /// vanish while others do not).
    pub fn norm_spread(&self) -> f64 {
        if self.max_multiplier_norm == 0.0 {
            1.0
        } else {
            self.max_multiplier_norm / self.min_multiplier_norm
        }
    }

    /// Warning channel: the multiplier is far from bounded-and-continuous,
    /// the usual symptom of a symbol without constant rank.
    pub fn constant_rank_suspect(&self) -> bool {
        self.norm_spread() > NORM_SPREAD_WARNING
    }
}

fn euclidean(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// First-order Riesz transform `Rⱼ` on a fixed grid, with its multiplier
/// field precomputed so it can be applied to many inputs.
#[derive(Debug, Clone)]
pub struct RieszTransform {
    field: MultiplierField,
    min_norm: f64,
    max_norm: f64,
}

impl RieszTransform {
    /// Multiplier `iξⱼ P†(iξ)` on every mode of `grid` (axis `j` 0-based).
    pub fn new(op: &DiffOperator, j: usize, grid: Grid, rel_tol: f64) -> Result<Self> {
        check_grid(op, grid)?;
        check_axis(grid, j)?;
        // |ξ| P†(iξ) once per mode, then the scalar iξⱼ/|ξ|.
        let normalized = MultiplierField::build(
            grid,
            op.dim_source(),
            op.dim_target(),
            Matrix::zeros(op.dim_source(), op.dim_target()),
            |xi| Ok(linalg::pinv(&op.eval_symbol_i(xi)?, rel_tol)? * C64::new(euclidean(xi), 0.0)),
        )?;
        let norms = normalized.mode_norms();
        let field = normalized.scaled_per_mode(|xi| C64::new(0.0, xi[j] / euclidean(xi)));
        Ok(Self {
            field,
            min_norm: norms.iter().copied().fold(f64::INFINITY, f64::min),
            max_norm: norms.iter().copied().fold(0.0, f64::max),
        })
    }

    pub fn field(&self) -> &MultiplierField {
        &self.field
    }

    pub fn apply(&self, h: &GridFunction) -> Result<GridFunction> {
        Ok(idft(&self.field.apply(&dft(h))?))
    }

    fn output(&self, output: GridFunction) -> RieszOutput {
        RieszOutput {
            output,
            min_multiplier_norm: self.min_norm,
            max_multiplier_norm: self.max_norm,
        }
    }
}

/// `Rⱼh`: multiplication of `ĥ(ξ)` by `iξⱼ P†(iξ)` (axis `j` 0-based).
pub fn riesz_first(op: &DiffOperator, j: usize, h: &GridFunction, rel_tol: f64) -> Result<RieszOutput> {
    check_dim("operator target / function fiber", op.dim_target(), h.fiber_dim())?;
    let t = RieszTransform::new(op, j, h.grid(), rel_tol)?;
    let out = t.apply(h)?;
    Ok(t.output(out))
}

/// Decomposition `f = f₀ + diff` with `P f₀ = 0`.
#[derive(Debug, Clone)]
pub struct F0Split {
    pub f0: GridFunction,
    pub diff: GridFunction,
}

/// Per-mode multiplier producing `diff` from `f`; `f₀ = f − diff`.
///
/// Built once per (operator, grid) and reused across inputs.
#[derive(Debug, Clone)]
pub struct KernelProjection {
    field: MultiplierField,
}

impl KernelProjection {
    /// `P†(iξ)P(iξ)`, the orthogonal projector onto `(ker P(iξ))ᗮ`.
    pub fn geninv(op: &DiffOperator, grid: Grid, rel_tol: f64) -> Result<Self> {
        check_grid(op, grid)?;
        let d = op.dim_source();
        let field = MultiplierField::build(grid, d, d, Matrix::zeros(d, d), |xi| {
            let p = op.eval_symbol_i(xi)?;
            Ok(linalg::pinv(&p, rel_tol)? * p)
        })?;
        Ok(Self { field })
    }

    /// `P(iξ)*P(iξ) H_U(ξ)⁻¹` with `H_U = P(iξ)*P(iξ) + R(iξ)R(iξ)*`.
    pub fn complex(chain: &ComplexChain, grid: Grid) -> Result<Self> {
        if chain.left.is_none() {
            return Err(Error::InvalidArgument(
                "the complex route needs the left operator R of the chain".into(),
            ));
        }
        check_grid(&chain.middle, grid)?;
        let d = chain.middle.dim_source();
        let field = MultiplierField::build(grid, d, d, Matrix::zeros(d, d), |xi| {
            complex_route_multiplier(chain, xi)
        })?;
        Ok(Self { field })
    }

    pub fn field(&self) -> &MultiplierField {
        &self.field
    }

    pub fn split(&self, f: &GridFunction) -> Result<F0Split> {
        let diff = idft(&self.field.apply(&dft(f))?);
        let f0 = f.try_sub(&diff)?;
        Ok(F0Split { f0, diff })
    }
}

/// `P*P H_U⁻¹` at one frequency; errors if `H_U(ξ)` is singular.
pub(crate) fn complex_route_multiplier(chain: &ComplexChain, xi: &[f64]) -> Result<Matrix> {
    let h = symbol::source_laplace_symbol(chain, xi)?;
    let inv = linalg::hpd_inverse(&h, DEFAULT_REL_TOL)?;
    let hinv = inv.inverse.ok_or_else(|| Error::Ellipticity {
        xi: xi.to_vec(),
        min_eigenvalue: inv.min_eigenvalue,
    })?;
    let p = chain.middle.eval_symbol_i(xi)?;
    Ok(p.adjoint() * p * hinv)
}

/// `f₀` as the per-mode orthogonal projection of `f̂` onto `ker P(iξ)`,
/// built from the pseudoinverse of the symbol.
pub fn construct_f0_geninv(op: &DiffOperator, f: &GridFunction, rel_tol: f64) -> Result<F0Split> {
    check_dim("operator source / function fiber", op.dim_source(), f.fiber_dim())?;
    KernelProjection::geninv(op, f.grid(), rel_tol)?.split(f)
}

/// `f₀ = f − P*Pφ` where `H_U φ = f`, using the left operator of the chain.
pub fn construct_f0_complex(chain: &ComplexChain, f: &GridFunction) -> Result<F0Split> {
    check_dim("operator source / function fiber", chain.middle.dim_source(), f.fiber_dim())?;
    KernelProjection::complex(chain, f.grid())?.split(f)
}

fn inverse_h(chain: &ComplexChain, xi: &[f64]) -> Result<Matrix> {
    let h = symbol::laplace_symbol(chain, xi)?;
    let inv = linalg::hpd_inverse(&h, DEFAULT_REL_TOL)?;
    inv.inverse.ok_or_else(|| Error::Ellipticity {
        xi: xi.to_vec(),
        min_eigenvalue: inv.min_eigenvalue,
    })
}

/// Second-order Riesz multiplier `ξᵢξⱼ H(ξ)⁻¹`; zero at `ξ = 0`.
pub fn riesz_second_multiplier(chain: &ComplexChain, i: usize, j: usize, xi: &[f64]) -> Result<Matrix> {
    let d = chain.dim_middle();
    if i >= xi.len() || j >= xi.len() {
        return Err(Error::InvalidArgument(format!("axes ({i}, {j}) out of range")));
    }
    if xi.iter().all(|&x| x == 0.0) {
        return Ok(Matrix::zeros(d, d));
    }
    Ok(inverse_h(chain, xi)? * C64::new(xi[i] * xi[j], 0.0))
}

/// `R_{ij}F = ∂ᵢ∂ⱼφ` for the Poisson problem `Hφ = F` (axes 0-based).
pub fn riesz_second(chain: &ComplexChain, i: usize, j: usize, f: &GridFunction) -> Result<GridFunction> {
    let grid = f.grid();
    check_grid(&chain.middle, grid)?;
    check_axis(grid, i)?;
    check_axis(grid, j)?;
    check_dim("chain middle / function fiber", chain.dim_middle(), f.fiber_dim())?;
    let d = chain.dim_middle();
    let field = MultiplierField::build(grid, d, d, Matrix::zeros(d, d), |xi| {
        riesz_second_multiplier(chain, i, j, xi)
    })?;
    Ok(idft(&field.apply(&dft(f))?))
}

/// Relative size of the unresolvable modes above which Poisson data is
/// rejected.
pub const MEAN_TOLERANCE: f64 = 1e-10;

/// Solves `Hφ = F` with `H = PP* + Q*Q`, normalized by `φ̂ = 0` wherever
/// `ξ̃ = 0`.
///
/// `H(ξ̃)` vanishes on the mean and on modes whose every nonzero component
/// is Nyquist, so `F` must carry no energy there; the `l²` size of that part
/// is reported in the error.
pub fn poisson_solve(chain: &ComplexChain, f: &GridFunction) -> Result<GridFunction> {
    let grid = f.grid();
    check_grid(&chain.middle, grid)?;
    check_dim("chain middle / function fiber", chain.dim_middle(), f.fiber_dim())?;
    let s = dft(f);
    let unresolved = (0..grid.total_points())
        .filter(|&m| grid.band_limited_xi(m).iter().all(|&x| x == 0.0))
        .flat_map(|m| s.mode(m).iter().map(|z| z.norm_sqr()))
        .sum::<f64>()
        .sqrt();
    if unresolved > MEAN_TOLERANCE * s.l2_norm() {
        return Err(Error::ZeroModeObstruction { magnitude: unresolved });
    }
    let d = chain.dim_middle();
    let field = MultiplierField::build(grid, d, d, Matrix::zeros(d, d), |xi| inverse_h(chain, xi))?;
    Ok(idft(&field.apply(&s)?))
}

/// `(PP* + Q*Q)φ` realized by composing operator applications on the grid.
pub fn h_operator(chain: &ComplexChain, phi: &GridFunction) -> Result<GridFunction> {
    let p = &chain.middle;
    let q = &chain.right;
    let a = apply_operator(p, &apply_operator(&p.adjoint(), phi)?)?;
    let b = apply_operator(&q.adjoint(), &apply_operator(q, phi)?)?;
    a.try_add(&b)
}
