use serde::Serialize;

use rankcomplex::norms::{self, PoincareConfig, PoincareReport, Route};
use rankcomplex::rank_analysis::{self, ComplexVerdict};
use rankcomplex::spectral::{self, Grid, GridFunction};
use rankcomplex::{catalog, ComplexChain};

use crate::args::{CheckArgs, OperatorSource, PoincareArgs, PoissonArgs, ReportArgs, RouteArg};
use crate::error::CliError;
use crate::grid_file::GridFunctionFile;
use crate::report::{self, Report};
use crate::spec_file::{OperatorSet, OperatorSpecFile};

/// Bound on relative kernel residuals and route disagreement in `poincare`.
pub const POINCARE_TOL: f64 = 1e-8;
/// Bound on the relative Poisson residual.
pub const POISSON_TOL: f64 = 1e-10;

/// A finished run: the report to emit and, when a check failed, why.
pub struct Outcome {
    pub report: Report,
    pub failure: Option<String>,
}

impl Outcome {
    fn new(mut report: Report, failure: Option<String>) -> Self {
        report.set_pass(failure.is_none());
        Self { report, failure }
    }
}

struct Loaded {
    source: String,
    ops: OperatorSet,
}

fn load(src: &OperatorSource) -> Result<Loaded, CliError> {
    match (&src.spec, &src.example) {
        (Some(path), None) => Ok(Loaded {
            source: path.display().to_string(),
            ops: OperatorSpecFile::load(path)?.operators()?,
        }),
        (None, Some(name)) => {
            let chain = catalog::lookup(name)?.chain;
            Ok(Loaded {
                source: name.clone(),
                ops: OperatorSet {
                    p: chain.middle,
                    q: Some(chain.right),
                    r: chain.left,
                },
            })
        }
        _ => Err(CliError::input("give exactly one of a spec file or --example")),
    }
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol.is_finite() && tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(CliError::input(format!("--tol must lie in (0, 1), got {tol}")))
    }
}

fn check_samples(samples: usize) -> Result<(), CliError> {
    if samples == 0 {
        return Err(CliError::input("--samples must be at least 1"));
    }
    Ok(())
}

#[derive(Serialize)]
struct SampleInfo {
    count: usize,
    random: usize,
    seed: u64,
    scheme: &'static str,
}

fn failed_conditions(v: &ComplexVerdict) -> Vec<&'static str> {
    let names = ["(i)", "(ii)", "(iii)", "(iv)", "(v)"];
    v.conditions()
        .iter()
        .zip(names)
        .filter(|(holds, _)| !**holds)
        .map(|(_, n)| n)
        .collect()
}

pub fn check(a: &CheckArgs) -> Result<Outcome, CliError> {
    check_tol(a.tol)?;
    check_samples(a.samples)?;
    let loaded = load(&a.source)?;
    let ops = &loaded.ops;
    let samples = rank_analysis::sample_sphere(ops.p.space_dim(), a.samples, a.seed)?;

    let mut report = Report::new("check", &loaded.source, Some(a.seed));
    report.tolerance("rank_rel_tol", a.tol);
    report.section(
        "samples",
        &SampleInfo {
            count: samples.len(),
            random: a.samples,
            seed: samples.seed,
            scheme: samples.scheme,
        },
    );

    let failure = if ops.q.is_some() {
        let verdict = rank_analysis::classify_complex(&ops.chain()?, &samples, a.tol)?;
        report.section("mode", &"complex");
        report.section("conditions", &verdict.conditions());
        report.section("verdict", &verdict);
        (!verdict.overall).then(|| {
            let mut msg = format!("conditions {} fail", failed_conditions(&verdict).join(", "));
            if let Some(w) = verdict.condition_iv.detail.witnesses.first() {
                msg.push_str(&format!("; rank of P changes at xi = {w:?}"));
            }
            msg
        })
    } else {
        let profile = rank_analysis::constant_rank_check(&ops.p, &samples, a.tol)?;
        report.section("mode", &"constant_rank");
        report.section("rank_profile", &profile);
        (!profile.constant).then(|| {
            let w = profile.witnesses.first().cloned().unwrap_or_default();
            format!("rank of P is not constant (mode rank {}; differs at xi = {w:?})", profile.mode_rank)
        })
    };
    Ok(Outcome::new(report, failure))
}

#[derive(Serialize)]
struct Agreement {
    max_f0_distance: f64,
    max_ratio_difference: f64,
}

#[derive(Serialize)]
struct Certification {
    exact: bool,
    verdict: ComplexVerdict,
}

/// Confirms `R → P` is exact at every sample so the complex route applies.
fn certify_left(ops: &OperatorSet, a: &PoincareArgs) -> Result<(ComplexChain, Certification), CliError> {
    let r = ops
        .r
        .clone()
        .ok_or_else(|| CliError::input("the complex route needs a left operator (an `r` block)"))?;
    let left_pair = ComplexChain::new(None, r, ops.p.clone())?;
    let samples = rank_analysis::sample_sphere(ops.p.space_dim(), a.samples, a.seed)?;
    let verdict = rank_analysis::classify_complex(&left_pair, &samples, a.tol)?;
    Ok((
        ops.chain()?,
        Certification {
            exact: verdict.overall,
            verdict,
        },
    ))
}

fn poincare_failure(r: &PoincareReport) -> Option<String> {
    if r.empirical_c.is_none() {
        return Some(format!(
            "{} route: all {} trials lie in the kernel of P, so no ratio is defined",
            r.route,
            r.trials.len()
        ));
    }
    if r.max_relative_kernel_residual > POINCARE_TOL {
        return Some(format!(
            "{} route: |P f0| / |P f| reached {:e} (bound {POINCARE_TOL:e})",
            r.route, r.max_relative_kernel_residual
        ));
    }
    None
}

pub fn poincare(a: &PoincareArgs) -> Result<Outcome, CliError> {
    check_tol(a.tol)?;
    if !(a.p.is_finite() && a.p > 1.0) {
        return Err(CliError::input(format!("--p must satisfy 1 < p < inf, got {}", a.p)));
    }
    if a.trials == 0 {
        return Err(CliError::input("--trials must be at least 1"));
    }
    let loaded = load(&a.source)?;
    let ops = &loaded.ops;
    Grid::new(ops.p.space_dim(), a.grid).map_err(|e| CliError::input(format!("--grid: {e}")))?;
    if a.band == Some(0) || a.band.is_some_and(|b| b >= a.grid / 2) {
        return Err(CliError::input(format!("--band must lie in 1..{}", a.grid / 2)));
    }
    let config = PoincareConfig {
        grid_n: a.grid,
        p: a.p,
        trials: a.trials,
        seed: a.seed,
        band: a.band,
        rel_tol: a.tol,
    };

    let mut report = Report::new("poincare", &loaded.source, Some(a.seed));
    report.tolerance("rank_rel_tol", a.tol);
    report.tolerance("kernel_residual", POINCARE_TOL);
    report.section("config", &config);

    let mut failures = Vec::new();
    let reports = match a.route {
        RouteArg::Geninv => vec![norms::estimate_constant(&ops.p, &config, Route::Geninv { rel_tol: a.tol })?],
        RouteArg::Complex | RouteArg::Both => {
            check_samples(a.samples)?;
            let (chain, cert) = certify_left(ops, a)?;
            let exact = cert.exact;
            report.section("left_certification", &cert);
            if !exact {
                report.section("routes", &Vec::<PoincareReport>::new());
                let failure = "the left pair R -> P is not exact at every sample; the complex route does not apply";
                return Ok(Outcome::new(report, Some(failure.into())));
            }
            if a.route == RouteArg::Both {
                let agreement = norms::compare_routes(&chain, &config)?;
                let scale = agreement.geninv.empirical_c.unwrap_or(0.0).max(1.0);
                if agreement.max_f0_distance > POINCARE_TOL {
                    failures.push(format!("routes disagree: f0 distance {:e}", agreement.max_f0_distance));
                }
                if agreement.max_ratio_difference > POINCARE_TOL * scale {
                    failures.push(format!("routes disagree: ratio difference {:e}", agreement.max_ratio_difference));
                }
                report.tolerance("route_agreement", POINCARE_TOL);
                report.section(
                    "agreement",
                    &Agreement {
                        max_f0_distance: agreement.max_f0_distance,
                        max_ratio_difference: agreement.max_ratio_difference,
                    },
                );
                vec![agreement.geninv, agreement.complex]
            } else {
                vec![norms::estimate_constant(&chain.middle, &config, Route::Complex(&chain))?]
            }
        }
    };
    failures.splice(0..0, reports.iter().filter_map(poincare_failure));
    report.section("routes", &reports);
    let failure = (!failures.is_empty()).then(|| failures.join("; "));
    Ok(Outcome::new(report, failure))
}

#[derive(Serialize)]
struct PoissonSection {
    grid_n: usize,
    fiber_dim: usize,
    rhs: String,
    relative_residual: f64,
    solution_l2: f64,
    solution_max_imaginary: f64,
    solution: Option<String>,
}

pub const BUILTIN_RHS: &str = "builtin:sin(x1)";

pub fn poisson(a: &PoissonArgs) -> Result<Outcome, CliError> {
    let loaded = load(&a.source)?;
    let chain = loaded.ops.chain()?;
    let n = chain.space_dim();
    let (f, rhs) = match &a.rhs {
        Some(path) => {
            let f = GridFunctionFile::load(path)?;
            let g = f.grid();
            if g.space_dim() != n || f.fiber_dim() != chain.dim_middle() {
                return Err(CliError::input(format!(
                    "{}: expected n = {n} and fiber_dim = {}, found n = {} and fiber_dim = {}",
                    path.display(),
                    chain.dim_middle(),
                    g.space_dim(),
                    f.fiber_dim()
                )));
            }
            if let Some(want) = a.grid.filter(|&want| want != g.points_per_axis()) {
                return Err(CliError::input(format!(
                    "--grid {want} does not match N = {} in {}",
                    g.points_per_axis(),
                    path.display()
                )));
            }
            (f, path.display().to_string())
        }
        None => {
            let grid = Grid::new(n, a.grid.unwrap_or(32)).map_err(|e| CliError::input(format!("--grid: {e}")))?;
            let f = GridFunction::from_real_component(grid, chain.dim_middle(), 0, |x| x[0].sin());
            (f, BUILTIN_RHS.to_string())
        }
    };

    let u = spectral::poisson_solve(&chain, &f)?;
    let residual = spectral::h_operator(&chain, &u)?.relative_distance(&f)?;
    if let Some(path) = &a.solution {
        GridFunctionFile::save(&u, path)?;
    }

    let mut report = Report::new("poisson", &loaded.source, None);
    report.tolerance("relative_residual", POISSON_TOL);
    report.section(
        "poisson",
        &PoissonSection {
            grid_n: f.grid().points_per_axis(),
            fiber_dim: f.fiber_dim(),
            rhs,
            relative_residual: residual,
            solution_l2: u.l2_coefficient_norm(),
            solution_max_imaginary: u.max_imaginary(),
            solution: a.solution.as_ref().map(|p| p.display().to_string()),
        },
    );
    let failure = (residual > POISSON_TOL).then(|| format!("relative residual {residual:e} exceeds {POISSON_TOL:e}"));
    Ok(Outcome::new(report, failure))
}

pub fn convert(a: &ReportArgs) -> Result<(), CliError> {
    let v = report::load(&a.input)?;
    report::write(&report::to_csv(&v)?, a.out.as_deref())
}
