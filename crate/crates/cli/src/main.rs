//! `latdisp`: propagator kernels and dispersion checks on `Z^d □ G_F`.
//!
//! Exit codes: 0 when every check passes, 1 when a bound or tolerance
//! fails, 2 on usage or input errors.

mod commands;
mod input;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Environment variable selecting the worker thread count for scans.
pub const THREADS_ENV: &str = "LATDISP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "latdisp", version, about = "Exact propagators and dispersive decay on lattice x finite-graph products")]
pub struct RunConfig {
    /// Emit machine-readable JSON reports.
    #[arg(long, global = true)]
    pub json: bool,

    /// Seed for randomized probe selection.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate J_nu(t) and cross-check it against the integral identity.
    Bessel(BesselArgs),
    /// Evaluate the propagator kernel e^{itH}(n + v_p, m + v_q).
    Kernel(KernelArgs),
    /// Compare the closed-form kernel with direct evolution and fiber quadrature.
    Verify(VerifyArgs),
    /// Scan the sup norm over a log-spaced time grid and write a CSV series.
    Scan(ScanArgs),
    /// Fit a power-law decay exponent to a CSV series.
    Fit(FitArgs),
    /// Check that the finite crystal alone does not disperse.
    NoDispersion(NoDispersionArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Graph spec JSON file, or one of the builtin names
    /// (ladder, ladder_potential, strip4, cylinder3, cylinder3_potential, star3).
    #[arg(long)]
    pub graph: String,

    /// Lattice dimension d.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
}

#[derive(Debug, Args)]
pub struct BesselArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub nu: i64,
    #[arg(long)]
    pub t: f64,
    /// Quadrature nodes; defaults to the minimum accepted count plus 32.
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    /// Lattice offset n - m as comma-separated integers.
    #[arg(long, allow_hyphen_values = true)]
    pub offset: String,
    #[arg(long, default_value_t = 0)]
    pub p: usize,
    #[arg(long, default_value_t = 0)]
    pub q: usize,
    /// Print the whole k x k block at this offset as JSON.
    #[arg(long)]
    pub block: bool,
    /// Print the eigendecomposition of H_{G_F} as JSON.
    #[arg(long)]
    pub dump_spectrum: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub t: f64,
    /// Box radius L; defaults to ceil(2t) + 25.
    #[arg(long = "L", alias = "radius")]
    pub radius: Option<usize>,
    /// Truncated-lattice evolution strategy.
    #[arg(long, default_value = "chebyshev")]
    pub evolver: String,
    /// Random probe offsets in addition to the axis sweep.
    #[arg(long, default_value_t = 50)]
    pub probes: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1e-11)]
    pub quadrature_tolerance: f64,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub t_min: f64,
    #[arg(long)]
    pub t_max: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long = "in")]
    pub input: std::path::PathBuf,
    #[arg(long, default_value_t = 10.0)]
    pub t_min: f64,
    /// Series to fit: envelope, sup_norm, or upper (running-max envelope of sup_norm).
    #[arg(long, default_value = "envelope")]
    pub column: String,
}

#[derive(Debug, Args)]
pub struct NoDispersionArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long, default_value_t = 100.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub t_step: f64,
    #[arg(long, default_value_t = 0)]
    pub source: usize,
}

/// How a command ended when it did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// A check ran and failed.
    Check(String),
    /// Bad arguments or input files.
    Usage(String),
}

impl Failure {
    fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Check(_) => ExitCode::from(1),
            Failure::Usage(_) => ExitCode::from(2),
        }
    }
}

impl From<latdisp_core::Error> for Failure {
    fn from(e: latdisp_core::Error) -> Self {
        use latdisp_core::Error as E;
        match e {
            E::BoundViolation { .. } | E::NumericalFailure(_) => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .parse()
            .map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let result = configure_threads().and_then(|()| commands::run(&config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Check(msg) => eprintln!("FAIL: {msg}"),
                Failure::Usage(msg) => eprintln!("error: {msg}"),
            }
            failure.exit_code()
        }
    }
}
