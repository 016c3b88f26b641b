//! `daniell`: experiments and verification suites from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use daniell::Error;

/// Exit codes shared by every subcommand.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CHECK_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const MALFORMED: u8 = 3;
    pub const UNREACHABLE: u8 = 4;
    pub const DOMAIN: u8 = 5;
}

#[derive(Parser, Debug)]
#[command(name = "daniell", version, about = "Daniell integration: exact lattices, measures from integrals, Wiener and harmonic measure")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output file, or `-` for standard output.
    #[arg(long, global = true, default_value = "-")]
    pub output: String,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Seed for every stochastic step.
    #[arg(long, global = true, env = "DANIELL_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Boolean combinations, pre-measures and additivity of ring sets.
    Rings(RingsArgs),
    /// Lattice operations on simple functions.
    Lattice(LatticeArgs),
    /// Jordan decomposition of a signed point-mass functional.
    Decompose(DecomposeArgs),
    /// Dyadic level-set integral against Lebesgue length.
    Integrate(IntegrateArgs),
    /// Length of an interval through the Riemann integral and ramps.
    Lebesgue(LebesgueArgs),
    /// Wiener premeasure of a cylinder set.
    Wiener(WienerArgs),
    /// Dirichlet functional at an interior point.
    Dirichlet(DirichletArgs),
    /// Every module's invariant suite with a summary table.
    VerifyAll(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SetOp {
    Union,
    Intersect,
    Difference,
}

#[derive(Args, Debug, Serialize)]
pub struct RingsArgs {
    /// Ring set JSON, inline or `@path`.
    #[arg(long)]
    pub a: String,
    #[arg(long, requires = "op")]
    pub b: Option<String>,
    #[arg(long, value_enum, requires = "b")]
    pub op: Option<SetOp>,
    /// Point masses on a finite universe, comma separated; the real line
    /// always uses length.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<String>>,
    /// JSON array of ring sets whose union is checked for additivity.
    #[arg(long)]
    pub partition: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeOpArg {
    Plus,
    Meet,
    Join,
    Abs,
    Scale,
}

#[derive(Args, Debug, Serialize)]
pub struct LatticeArgs {
    /// Simple function JSON, inline or `@path`.
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: Option<String>,
    #[arg(long, value_enum)]
    pub op: LatticeOpArg,
    /// Scalar for `scale`.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct DecomposeArgs {
    /// Signed point masses, comma separated rationals.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub weights: Vec<String>,
    /// Values of the test function at each atom; all ones by default.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<String>>,
}

#[derive(Args, Debug, Serialize)]
pub struct IntegrateArgs {
    /// `t`, a rational constant, or `affine:slope:intercept`.
    #[arg(long, allow_hyphen_values = true)]
    pub function: String,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_hyphen_values = true, required = true)]
    pub interval: Vec<String>,
    #[arg(long, default_value_t = 8)]
    pub depth: u32,
    /// Stop once successive partial sums differ by less than this.
    #[arg(long, default_value = "0")]
    pub tol: String,
    #[arg(long, default_value = "1000000000")]
    pub ceiling: String,
}

#[derive(Args, Debug, Serialize)]
pub struct LebesgueArgs {
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_hyphen_values = true, required = true)]
    pub interval: Vec<String>,
    #[arg(long, default_value_t = 64)]
    pub depth: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Quad,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelArg {
    Standard,
    /// `exp(-dx^2 / dt) / sqrt(2 pi dt)`, total mass `1/sqrt 2`.
    #[value(name = "paper", alias = "half-variance")]
    #[serde(rename = "paper")]
    HalfVariance,
}

#[derive(Args, Debug, Serialize)]
pub struct WienerArgs {
    /// Cylinder JSON file, or inline JSON.
    #[arg(long)]
    pub cylinder: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Quad)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1_000_000)]
    pub paths: u64,
    #[arg(long, value_enum, default_value_t = KernelArg::Standard)]
    pub kernel: KernelArg,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainArg {
    Disk,
    Square,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverArg {
    Grid,
    Wos,
}

#[derive(Args, Debug, Serialize)]
pub struct DirichletArgs {
    #[arg(long, value_enum, default_value_t = DomainArg::Disk)]
    pub domain: DomainArg,
    /// `const:c`, `cos`, `trig:a0,a1,b1,...`, `arc:lo:hi` or `ramp:lo:hi:w`.
    #[arg(long)]
    pub g: String,
    /// Interior point `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, value_enum, default_value_t = SolverArg::Grid)]
    pub solver: SolverArg,
    #[arg(long, default_value_t = 100_000)]
    pub walks: usize,
    /// Grid spacing `1/m`.
    #[arg(long, default_value_t = 128)]
    pub cells: u32,
    /// Ramp depth for discontinuous data.
    #[arg(long, default_value_t = 64)]
    pub depth: usize,
    /// Largest accepted gap between the ramp brackets.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// Smaller case counts and coarser grids.
    #[arg(long)]
    pub quick: bool,
}

pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::Malformed(_) => exit::MALFORMED,
        Error::Unreachable { .. } | Error::NoConvergence(_) => exit::UNREACHABLE,
        Error::UniverseMismatch(_)
        | Error::Domain(_)
        | Error::Precondition(_)
        | Error::Overlap { .. }
        | Error::NonMonotone { .. }
        | Error::Nesting(_) => exit::DOMAIN,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    let record = match commands::run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(error_code(&e));
        }
    };
    if let Err(e) = output::write(&cli, &record) {
        eprintln!("error: {e}");
        return ExitCode::from(error_code(&e));
    }
    ExitCode::from(if record.pass { exit::OK } else { exit::CHECK_FAILED })
}
