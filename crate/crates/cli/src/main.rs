//! `wheelbound` command-line front end.
//!
//! Exit codes: `0` success, `1` internal error, `2` invalid input,
//! `3` a verification or post-check failed.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "wheelbound",
    version,
    about = "Bounds and optimal wheel structures for three-phase conducting and elastic composites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form lower bound with its regime, thresholds and optimal fields.
    Bounds(BoundsArgs),
    /// Optimal wheel for a fraction triple, checked by the radial solver.
    Wheel(WheelArgs),
    /// Brute-force check of a rasterized wheel on a polar grid.
    Verify(VerifyArgs),
    /// Bound over a range of fractions, written as CSV.
    Sweep(SweepArgs),
    /// Bound rebuilt from translated energy wells.
    Oracle(OracleArgs),
    /// Bulk-compliance bound for two elastic materials and void, or the
    /// bulk-modulus bound with a rigid phase (`--dual`).
    Elastic(ElasticArgs),
}

#[derive(Args, Debug, Clone)]
struct Conductors {
    #[arg(long)]
    k1: f64,
    #[arg(long)]
    k2: f64,
}

#[derive(Args, Debug, Clone)]
struct Point {
    #[arg(long)]
    m1: f64,
    #[arg(long)]
    m2: f64,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, required_unless_present = "rho1", conflicts_with_all = ["rho1", "rho2"])]
    k1: Option<f64>,
    #[arg(long, required_unless_present = "rho2")]
    k2: Option<f64>,
    /// Resistivity of material 1 (dual problem with an ideal insulator).
    #[arg(long, requires = "rho2")]
    rho1: Option<f64>,
    #[arg(long, requires = "rho1")]
    rho2: Option<f64>,
    #[command(flatten)]
    point: Point,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct Raster {
    #[arg(long, default_value_t = 64)]
    n_spikes: usize,
    /// Rings in the unit disk.
    #[arg(long, default_value_t = 256)]
    nr: usize,
    /// Sectors around the circle.
    #[arg(long, default_value_t = 1024)]
    ntheta: usize,
    /// Conductivity standing in for the ideal phase.
    #[arg(long, default_value_t = 1e6)]
    contrast: f64,
}

#[derive(Args, Debug)]
struct WheelArgs {
    #[command(flatten)]
    materials: Conductors,
    #[command(flatten)]
    point: Point,
    /// Radii at which the phase-fraction profile is reported.
    #[arg(long, default_value_t = 11)]
    profile_points: usize,
    /// Write a rasterization to this PGM file.
    #[arg(long)]
    pgm: Option<PathBuf>,
    #[command(flatten)]
    raster: Raster,
    #[arg(long)]
    json: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Pre {
    Ic0,
    Jacobi,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, requires_all = ["k2", "m1", "m2"])]
    k1: Option<f64>,
    #[arg(long)]
    k2: Option<f64>,
    #[arg(long)]
    m1: Option<f64>,
    #[arg(long)]
    m2: Option<f64>,
    /// Read the phase map from a PGM file instead of building a wheel.
    #[arg(long, conflicts_with = "homogeneous")]
    map: Option<PathBuf>,
    /// Sanity run on a disk of one conductivity.
    #[arg(long)]
    homogeneous: Option<f64>,
    #[command(flatten)]
    raster: Raster,
    /// Radius of the Dirichlet rim.
    #[arg(long, default_value_t = 4.0)]
    r_out: f64,
    /// Relative residual for conjugate gradients.
    #[arg(long, default_value_t = 1e-10)]
    cg_tol: f64,
    #[arg(long, value_enum, default_value_t = Pre::Ic0)]
    preconditioner: Pre,
    /// Skip deflation of the high-conductivity groups.
    #[arg(long)]
    no_deflation: bool,
    /// Largest accepted relative gap between measurement and bound.
    #[arg(long, default_value_t = 0.02)]
    tolerance: f64,
    /// Comma-separated spike counts for an extrapolation series.
    #[arg(long, value_delimiter = ',')]
    series: Vec<usize>,
    /// Also check the optimal-field conditions (wheel runs only).
    #[arg(long)]
    field_check: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    materials: Conductors,
    /// Value or `start:stop:step`.
    #[arg(long)]
    m1: String,
    /// Value or `start:stop:step`.
    #[arg(long)]
    m2: String,
    /// Add the radial-solver conductivity of the optimal wheel.
    #[arg(long)]
    with_radial: bool,
    /// Add the finite-difference radial conductivity.
    #[arg(long)]
    with_fd: bool,
    #[arg(long, default_value_t = 2.5e-3)]
    fd_h: f64,
    #[arg(long, default_value_t = 1e6)]
    fd_contrast: f64,
    /// Write the CSV here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    materials: Conductors,
    #[command(flatten)]
    point: Point,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ElasticArgs {
    /// `kappa1`, or the plane bulk modulus `K1` with `--dual`.
    #[arg(long, visible_alias = "bulk1", required_unless_present = "young1")]
    kappa1: Option<f64>,
    /// `eta1`, or the shear modulus `mu1` with `--dual`.
    #[arg(long, visible_alias = "shear1", required_unless_present = "young1")]
    eta1: Option<f64>,
    #[arg(long, visible_alias = "bulk2", required_unless_present = "young1")]
    kappa2: Option<f64>,
    #[arg(long, visible_alias = "shear2", required_unless_present = "young1")]
    eta2: Option<f64>,
    #[arg(long, requires_all = ["poisson1", "young2", "poisson2"], conflicts_with_all = ["kappa1", "eta1", "kappa2", "eta2"])]
    young1: Option<f64>,
    #[arg(long)]
    poisson1: Option<f64>,
    #[arg(long)]
    young2: Option<f64>,
    #[arg(long)]
    poisson2: Option<f64>,
    #[command(flatten)]
    point: Point,
    /// Rigid third phase: the moduli are stiffnesses `K`, `mu`.
    #[arg(long)]
    dual: bool,
    #[arg(long)]
    json: bool,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Verification(String),
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use wheelbound::Error as E;
    if let Some(f) = e.downcast_ref::<Failure>() {
        return match f {
            Failure::Invalid(_) => 2,
            Failure::Verification(_) => 3,
        };
    }
    match e.downcast_ref::<E>() {
        Some(E::NoConvergence { .. } | E::SingularProfile(_) | E::IllConditionedFit(_)) => 1,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(a) => commands::bounds(a),
        Command::Wheel(a) => commands::wheel(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Elastic(a) => commands::elastic(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
