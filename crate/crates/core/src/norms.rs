//! Discrete `Lᵖ` norms, the `L^{1,p}` seminorm, and empirical Poincaré
//! ratios `‖f − f₀‖_{1,p} / ‖Pf‖_p`.
//!
//! The seminorm is the *sum* over axes of the `Lᵖ` norms of the first
//! partial derivatives. Pointwise magnitudes are Euclidean norms on the
//! fiber. Sums run in grid order on one thread so results are
//! reproducible bit for bit.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::C64;
use crate::parallel;
use crate::spectral::{self, dft, idft, Grid, GridFunction, KernelProjection, Spectrum};
use crate::symbol::{ComplexChain, DiffOperator};

/// A trial whose `‖Pf‖_p` is below this fraction of `‖f‖_p` counts as a
/// kernel member and is excluded from the constant.
pub const KERNEL_MEMBER_TOL: f64 = 1e-10;

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "exponent p must satisfy 1 < p < inf, got {p}"
        )));
    }
    Ok(())
}

fn lp_from_values(values: &[C64], fiber: usize, grid: Grid, p: f64) -> f64 {
    let cell = grid.spacing().powi(grid.space_dim() as i32);
    let mut acc = 0.0;
    for point in values.chunks(fiber) {
        let mag = point.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        acc += mag.powf(p);
    }
    (cell * acc).powf(1.0 / p)
}

/// `(hⁿ Σₓ |f(x)|ᵖ)^{1/p}` with `h = 2π/N`.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_from_values(f.values(), f.fiber_dim(), f.grid(), p))
}

/// `Σⱼ ‖∂f/∂xⱼ‖_p`.
pub fn seminorm_1p(f: &GridFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    let mut total = 0.0;
    for d in spectral::derivatives(f) {
        total += lp_norm(&d, p)?;
    }
    Ok(total)
}

/// Which construction of `f₀` a trial uses.
#[derive(Debug, Clone, Copy)]
pub enum Route<'a> {
    /// Per-mode pseudoinverse projection; needs only constant rank.
    Geninv { rel_tol: f64 },
    /// `f₀ = f − P*Pφ` through the chain's left operator.
    Complex(&'a ComplexChain),
}

impl Route<'_> {
    pub fn label(&self) -> &'static str {
        match self {
            Route::Geninv { .. } => "geninv",
            Route::Complex(_) => "complex",
        }
    }

    fn projection(&self, op: &DiffOperator, grid: Grid) -> Result<KernelProjection> {
        match self {
            Route::Geninv { rel_tol } => KernelProjection::geninv(op, grid, *rel_tol),
            Route::Complex(chain) => {
                if &chain.middle != op {
                    return Err(Error::InvalidArgument(
                        "complex route: chain middle operator differs from the operator under test".into(),
                    ));
                }
                KernelProjection::complex(chain, grid)
            }
        }
    }
}

/// One Poincaré trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialResult {
    /// `‖f − f₀‖_{1,p} / ‖Pf‖_p`; `None` for kernel members.
    pub ratio: Option<f64>,
    pub kernel_member: bool,
    /// `‖Pf₀‖_p`.
    pub kernel_residual: f64,
    /// `‖Pf‖_p`.
    pub operator_norm: f64,
    /// `‖f − f₀‖_{1,p}`.
    pub seminorm: f64,
}

impl TrialResult {
    /// `‖Pf₀‖_p / ‖Pf‖_p`, or the raw residual for kernel members.
    pub fn relative_kernel_residual(&self) -> f64 {
        if self.operator_norm > 0.0 {
            self.kernel_residual / self.operator_norm
        } else {
            self.kernel_residual
        }
    }
}

/// Grid fields of one trial that do not depend on `p`.
struct TrialFields {
    f: GridFunction,
    f0: GridFunction,
    pf: GridFunction,
    pf0: GridFunction,
    /// `∂ⱼ(f − f₀)` for every axis.
    diff_derivatives: Vec<GridFunction>,
}

impl TrialFields {
    fn compute(op: &DiffOperator, proj: &KernelProjection, f: GridFunction) -> Result<Self> {
        let grid = f.grid();
        let s = dft(&f);
        let diff_hat = proj.field().apply(&s)?;
        let f0_hat = Spectrum::new(
            grid,
            s.fiber_dim(),
            s.coeffs().iter().zip(diff_hat.coeffs()).map(|(a, b)| a - b).collect(),
        )?;
        let pf = idft(&spectral::apply_operator_spectrum(op, &s));
        let pf0 = idft(&spectral::apply_operator_spectrum(op, &f0_hat));
        let diff_derivatives = (0..grid.space_dim())
            .map(|j| idft(&spectral::derivative_spectrum(&diff_hat, j)))
            .collect();
        let f0 = f.try_sub(&idft(&diff_hat))?;
        Ok(Self {
            f,
            f0,
            pf,
            pf0,
            diff_derivatives,
        })
    }

    fn evaluate(&self, p: f64) -> TrialResult {
        let grid = self.f.grid();
        let norm = |g: &GridFunction| lp_from_values(g.values(), g.fiber_dim(), grid, p);
        let operator_norm = norm(&self.pf);
        let kernel_residual = norm(&self.pf0);
        let seminorm = self.diff_derivatives.iter().map(norm).sum::<f64>();
        let kernel_member = operator_norm == 0.0 || operator_norm <= KERNEL_MEMBER_TOL * norm(&self.f);
        TrialResult {
            ratio: (!kernel_member).then(|| seminorm / operator_norm),
            kernel_member,
            kernel_residual,
            operator_norm,
            seminorm,
        }
    }
}

/// Builds `f₀` by the chosen route and evaluates the Poincaré ratio.
pub fn poincare_trial(op: &DiffOperator, f: &GridFunction, p: f64, route: Route<'_>) -> Result<TrialResult> {
    check_p(p)?;
    check_dim("operator source / function fiber", op.dim_source(), f.fiber_dim())?;
    let proj = route.projection(op, f.grid())?;
    Ok(TrialFields::compute(op, &proj, f.clone())?.evaluate(p))
}

/// Settings for [`estimate_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoincareConfig {
    pub grid_n: usize,
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    /// Largest `|ξ|_∞` in the random ensemble; `None` means `N/4`.
    pub band: Option<usize>,
    pub rel_tol: f64,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        Self {
            grid_n: 32,
            p: 2.0,
            trials: 100,
            seed: 0,
            band: None,
            rel_tol: crate::linalg::DEFAULT_REL_TOL,
        }
    }
}

impl PoincareConfig {
    pub fn band(&self) -> usize {
        self.band.unwrap_or(self.grid_n / 4)
    }
}

/// Empirical lower bound on the Poincaré constant over a random ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareReport {
    pub route: &'static str,
    pub p: f64,
    pub seed: u64,
    pub grid_n: usize,
    pub band: usize,
    pub trials: Vec<TrialResult>,
    /// Largest ratio over non-kernel trials; `None` if every trial was a
    /// kernel member.
    pub empirical_c: Option<f64>,
    pub kernel_members: usize,
    /// Largest `‖Pf₀‖_p / ‖Pf‖_p` over all trials.
    pub max_relative_kernel_residual: f64,
}

impl PoincareReport {
    pub fn ratios(&self) -> Vec<Option<f64>> {
        self.trials.iter().map(|t| t.ratio).collect()
    }
}

/// The random field of trial `index`: a real band-limited field drawn from
/// stream `index` of the master seed.
pub fn trial_field(op: &DiffOperator, config: &PoincareConfig, index: usize) -> Result<GridFunction> {
    let grid = Grid::new(op.space_dim(), config.grid_n)?;
    spectral::random_band_limited(grid, op.dim_source(), config.band(), config.seed, index as u64)
}

fn run_trials(
    op: &DiffOperator,
    config: &PoincareConfig,
    route: Route<'_>,
    exponents: &[f64],
) -> Result<(Vec<PoincareReport>, Vec<GridFunction>)> {
    for &p in exponents {
        check_p(p)?;
    }
    if config.trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let grid = Grid::new(op.space_dim(), config.grid_n)?;
    let proj = route.projection(op, grid)?;
    let results = parallel::map_indexed(config.trials, |t| -> Result<(Vec<TrialResult>, GridFunction)> {
        let fields = TrialFields::compute(op, &proj, trial_field(op, config, t)?)?;
        Ok((exponents.iter().map(|&p| fields.evaluate(p)).collect(), fields.f0))
    });
    let mut per_exponent = vec![Vec::with_capacity(config.trials); exponents.len()];
    let mut f0s = Vec::with_capacity(config.trials);
    for r in results {
        let (trials, f0) = r?;
        for (acc, t) in per_exponent.iter_mut().zip(trials) {
            acc.push(t);
        }
        f0s.push(f0);
    }
    let reports = exponents
        .iter()
        .zip(per_exponent)
        .map(|(&p, trials)| PoincareReport {
            route: route.label(),
            p,
            seed: config.seed,
            grid_n: config.grid_n,
            band: config.band(),
            kernel_members: trials.iter().filter(|t| t.kernel_member).count(),
            max_relative_kernel_residual: trials
                .iter()
                .map(TrialResult::relative_kernel_residual)
                .fold(0.0, f64::max),
            empirical_c: trials
                .iter()
                .filter_map(|t| t.ratio)
                .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r)))),
            trials,
        })
        .collect();
    Ok((reports, f0s))
}

/// Runs `config.trials` seeded trials and reports the largest ratio.
pub fn estimate_constant(op: &DiffOperator, config: &PoincareConfig, route: Route<'_>) -> Result<PoincareReport> {
    let (mut reports, _) = run_trials(op, config, route, &[config.p])?;
    Ok(reports.remove(0))
}

/// Like [`estimate_constant`] for several exponents at once, sharing the
/// transforms of each trial (`config.p` is ignored). The reports are
/// identical to separate calls.
pub fn estimate_constant_for_exponents(
    op: &DiffOperator,
    config: &PoincareConfig,
    route: Route<'_>,
    exponents: &[f64],
) -> Result<Vec<PoincareReport>> {
    Ok(run_trials(op, config, route, exponents)?.0)
}

/// Both constructions of `f₀` on the same ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteAgreement {
    pub geninv: PoincareReport,
    pub complex: PoincareReport,
    /// Largest `‖f₀ᵍ − f₀ᶜ‖₂ / ‖f₀ᵍ‖₂` over trials (unscaled grid norm).
    pub max_f0_distance: f64,
    /// Largest absolute difference of per-trial ratios.
    pub max_ratio_difference: f64,
}

pub fn compare_routes(chain: &ComplexChain, config: &PoincareConfig) -> Result<RouteAgreement> {
    let op = &chain.middle;
    let (mut geninv, f0_g) = run_trials(op, config, Route::Geninv { rel_tol: config.rel_tol }, &[config.p])?;
    let (mut complex, f0_c) = run_trials(op, config, Route::Complex(chain), &[config.p])?;
    let (geninv, complex) = (geninv.remove(0), complex.remove(0));
    let mut max_f0_distance = 0.0f64;
    for (a, b) in f0_g.iter().zip(&f0_c) {
        max_f0_distance = max_f0_distance.max(b.relative_distance(a)?);
    }
    let max_ratio_difference = geninv
        .trials
        .iter()
        .zip(&complex.trials)
        .map(|(a, b)| match (a.ratio, b.ratio) {
            (Some(x), Some(y)) => (x - y).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max);
    Ok(RouteAgreement {
        geninv,
        complex,
        max_f0_distance,
        max_ratio_difference,
    })
}
