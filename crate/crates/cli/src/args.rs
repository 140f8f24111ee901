use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "rankcomplex", version, about = "Constant-rank and elliptic-complex checks for first-order operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify constant rank, or classify a chain when a `q` block or example is given.
    Check(CheckArgs),
    /// Estimate the Poincaré constant on random band-limited fields.
    Poincare(PoincareArgs),
    /// Solve the periodic Poisson problem `H u = f`.
    Poisson(PoissonArgs),
    /// Convert a JSON report to CSV.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
#[group(id = "operator", required = true, multiple = false)]
pub struct OperatorSource {
    /// Operator spec file (JSON).
    #[arg(group = "operator")]
    pub spec: Option<PathBuf>,
    /// Built-in operator: `grad_curl:<n>`, `de_rham:<n>:<l>` or `rank_drop`.
    #[arg(long, group = "operator")]
    pub example: Option<String>,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Geninv,
    Complex,
    Both,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: OperatorSource,
    /// Random sphere directions (the signed axes are always added).
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Relative rank tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PoincareArgs {
    #[command(flatten)]
    pub source: OperatorSource,
    /// Points per axis (even, at least 4).
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = RouteArg::Geninv)]
    pub route: RouteArg,
    /// Largest |frequency| per axis in the random fields (default N/4).
    #[arg(long)]
    pub band: Option<usize>,
    /// Sphere samples used to certify the left pair for the complex route.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PoissonArgs {
    #[command(flatten)]
    pub source: OperatorSource,
    /// Points per axis; must match the right-hand side file when both are given.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Right-hand side GridFunction file. Defaults to sin(x_1) in component 0.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    /// Write the solution GridFunction here.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON report produced by another subcommand.
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
