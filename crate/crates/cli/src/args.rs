use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "kelvinasym", version, about = "Exact and numerical checks for exterior asymptotics of special Lagrangian type equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact checks of the symmetric-function identities on seeded random spectra.
    Lemmas(LemmasArgs),
    /// Finite-difference check of the Hessian identity under the Kelvin map.
    KelvinCheck(KelvinCheckArgs),
    /// Solve the radical Poisson equation for a homogeneous source.
    Poisson(PoissonArgs),
    /// Exact residual of the three-dimensional equation for v = P + |y| Q.
    ResidualN3(ResidualN3Args),
    /// Run the three-dimensional correction recursion.
    Expand3(Expand3Args),
    /// Integrate a radially symmetric exterior solution.
    Radial(RadialArgs),
    /// Fit the exterior expansion to sampled data.
    Fit(FitArgs),
    /// Log-log slope of the nonlinear part of the transformed residual.
    ResidualScaling(ResidualScalingArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for all randomness.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON object of flag values, overridden by explicit flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BranchArgs {
    /// Branch kind: slag, recip, atan2 or log.
    #[arg(long, default_value = "slag")]
    pub branch: String,
    /// cot(tau) for the atan2 and log branches.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// tau itself, as an alternative to --a.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Phase value.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
}

#[derive(Debug, Args)]
pub struct LemmasArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct KelvinCheckArgs {
    /// Frame JSON; replaces the branch and --lambda flags.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    #[command(flatten)]
    pub branch: BranchArgs,
    /// Comma separated eigenvalues of A (default: zeros).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Polynomial JSON for v (default: seeded random cubic).
    #[arg(long)]
    pub poly: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
    #[arg(long, default_value_t = 2.0)]
    pub rmin: f64,
    #[arg(long, default_value_t = 5.0)]
    pub rmax: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PoissonArgs {
    /// Polynomial JSON for the homogeneous source h (default: seeded random).
    #[arg(long)]
    pub h: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
    /// Degree of the random source when --h is absent.
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Comma separated rational eigenvalues, e.g. "1,2,-1/2".
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Spectrum JSON, as an alternative to --lambda.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResidualN3Args {
    /// Polynomial JSON for P (default: seeded random, degree at most 2).
    #[arg(long)]
    pub p: Option<PathBuf>,
    /// Polynomial JSON for Q (default: zero).
    #[arg(long)]
    pub q: Option<PathBuf>,
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Expand3Args {
    /// Polynomial JSON for the Taylor part P (default: seeded random, degree at most 2).
    #[arg(long)]
    pub p: Option<PathBuf>,
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    /// Final order of the recursion.
    #[arg(long, default_value_t = 5)]
    pub order: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RadialArgs {
    #[command(flatten)]
    pub branch: BranchArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub u1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub p1: f64,
    #[arg(long, default_value_t = 50.0)]
    pub rmax: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Write every stride-th node.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Also write full-field samples x1..xn,u to this CSV.
    #[arg(long)]
    pub field_samples: Option<PathBuf>,
    /// Inner radius of the sampled region.
    #[arg(long, default_value_t = 20.0)]
    pub sample_rmin: f64,
    #[arg(long, default_value_t = 6)]
    pub annuli: usize,
    #[arg(long, default_value_t = 400)]
    pub per_annulus: usize,
    /// Comma separated centre of the field samples (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with header x1,...,xn,u.
    #[arg(long)]
    pub samples: PathBuf,
    #[command(flatten)]
    pub branch: BranchArgs,
    #[arg(long, default_value_t = 6)]
    pub annuli: usize,
    /// Leave out the logarithmic term in two dimensions.
    #[arg(long)]
    pub no_log: bool,
    #[arg(long, default_value_t = 2)]
    pub passes: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ResidualScalingArgs {
    /// Frame JSON; replaces the branch and --lambda flags.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    #[command(flatten)]
    pub branch: BranchArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Polynomial JSON for v (default: 1 plus a seeded random cubic).
    #[arg(long)]
    pub poly: Option<PathBuf>,
    /// Comma separated direction (default: seeded random).
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Option<String>,
    /// Comma separated radii (default: 2^-3 .. 2^-10).
    #[arg(long)]
    pub ts: Option<String>,
    /// Allowed shortfall of the slope below n - 2.
    #[arg(long, default_value_t = 0.1)]
    pub margin: f64,
    #[command(flatten)]
    pub common: Common,
}
