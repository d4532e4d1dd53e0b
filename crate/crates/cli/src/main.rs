use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use monomul_core::semigroup::Scheme;
use monomul_core::{Error, Operation, DEFAULT_SEED};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "monomul", version, about = "Multiplicative monotone convolution toolkit")]
struct Cli {
    /// Seed for randomized checks.
    #[arg(long, global = true, env = "MONOMUL_SEED")]
    seed: Option<u64>,
    /// Truncation order of series and moment sequences [default: 32; oracle: 8].
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Dimension of the one-variable space in the operator model.
    #[arg(long, global = true, default_value_t = 64)]
    dim: usize,
    /// Tolerance override (oracle: largest accepted error; flow: cross-check tolerance).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convolve two measures given as JSON files.
    Convolve(ConvolveArgs),
    /// Compare the series engine with the operator model.
    Oracle(OracleArgs),
    /// Integrate the semigroup of a generator.
    Flow(FlowArgs),
    /// Compute a chain of square roots of a measure.
    Divide(DivideArgs),
    /// Smoothed density of a measure or of a convolution.
    Density(DensityArgs),
    /// Run the acceptance checks.
    Selftest,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConvolveOp {
    Mconv,
    Mconv0,
    Pair,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OpArg {
    Mconv,
    Mconv0,
}

impl From<OpArg> for Operation {
    fn from(op: OpArg) -> Self {
        match op {
            OpArg::Mconv => Operation::Mconv,
            OpArg::Mconv0 => Operation::Mconv0,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Rk,
    EulerExp,
    Crosscheck,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Rk => Scheme::Rk,
            SchemeArg::EulerExp => Scheme::EulerExp,
            SchemeArg::Crosscheck => Scheme::CrossCheck,
        }
    }
}

#[derive(Args, Debug)]
struct ConvolveArgs {
    #[arg(long, value_enum)]
    op: ConvolveOp,
    #[arg(long)]
    lhs: PathBuf,
    #[arg(long)]
    rhs: PathBuf,
    /// Centering constant of the left factor (`pair` only), as `RE,IM` or `RE`.
    #[arg(long, allow_hyphen_values = true)]
    c1: Option<String>,
    /// Centering constant of the right factor (`pair` only).
    #[arg(long, allow_hyphen_values = true)]
    c2: Option<String>,
    /// Moment CSV (`n,re,im`); standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output measure JSON, written when the moments identify an atomic measure.
    #[arg(long)]
    measure_out: Option<PathBuf>,
    /// Largest number of atoms tried when identifying the output.
    #[arg(long, default_value_t = 8)]
    max_atoms: usize,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Coefficients of u1, constant term first, comma separated (`RE` or `RE:IM`).
    #[arg(long, allow_hyphen_values = true)]
    u1: String,
    #[arg(long, allow_hyphen_values = true)]
    u2: String,
    /// Centering constant of x1, as `RE,IM` or `RE`.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    c1: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    c2: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FlowArgs {
    /// Generator JSON file.
    #[arg(long)]
    generator: PathBuf,
    /// Comma-separated times.
    #[arg(long, allow_hyphen_values = true)]
    tau_list: String,
    #[arg(long, value_enum, default_value = "rk")]
    scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "mconv0")]
    convention: OpArg,
    /// Moment CSV (`tau,n,re,im`); standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated starting points (`RE` or `RE:IM`) for pointwise flows.
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,
    /// CSV of pointwise flows; standard output if absent and `--points` is given.
    #[arg(long)]
    points_out: Option<PathBuf>,
    /// Measure JSON of the semigroup members (a single measure for one time).
    #[arg(long)]
    measure_out: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    max_atoms: usize,
}

#[derive(Args, Debug)]
struct DivideArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, value_enum, default_value = "mconv")]
    op: OpArg,
    /// Branch of every square root; 0 is the principal branch.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    winding: i64,
    /// CSV `level,recomposition_error,n,re,im`; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[arg(long)]
    measure: PathBuf,
    /// Evaluation grid `START:END:COUNT`, both ends included (angles on the circle).
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    /// Distance from the real axis (half-line measures).
    #[arg(long, default_value_t = monomul_core::measures::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Radius of the Poisson smoothing (circle measures).
    #[arg(long, default_value_t = monomul_core::measures::DEFAULT_RADIUS)]
    radius: f64,
    /// Right factor: the density of `measure (op) rhs` is computed instead.
    #[arg(long)]
    rhs: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "mconv")]
    op: OpArg,
    /// CSV `x,density`; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Settings shared by all commands.
pub struct Global {
    pub seed: u64,
    pub order: usize,
    pub dim: usize,
    pub tol: Option<f64>,
}

/// A failed command: exit code 2 for bad input, 3 for numerical failures.
#[derive(Debug)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    pub code: u8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { kind: e.kind().to_string(), message: e.to_string(), code: if e.is_input_error() { 2 } else { 3 } }
    }
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { kind: "InvalidArgument".into(), message: message.into(), code: 2 }
    }

    pub fn numerical(kind: &str, message: impl Into<String>) -> Self {
        Failure { kind: kind.into(), message: message.into(), code: 3 }
    }
}

fn report(f: &Failure) -> ExitCode {
    let body = serde_json::json!({ "error": f.kind, "message": f.message, "exit_code": f.code });
    let _ = writeln!(std::io::stderr(), "{body}");
    ExitCode::from(f.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(&Failure::input(e.to_string().trim_end())),
    };
    let default_order = if matches!(cli.command, Command::Oracle(_)) { 8 } else { 32 };
    let order = cli.order.unwrap_or(default_order);
    if order == 0 {
        return report(&Failure::input("--order must be at least 1"));
    }
    if cli.dim < 2 {
        return report(&Failure::input("--dim must be at least 2"));
    }
    if cli.tol.is_some_and(|t| t.is_nan() || t <= 0.0) {
        return report(&Failure::input("--tol must be positive"));
    }
    let global = Global { seed: cli.seed.unwrap_or(DEFAULT_SEED), order, dim: cli.dim, tol: cli.tol };
    let result = match cli.command {
        Command::Convolve(args) => commands::convolve(&global, args),
        Command::Oracle(args) => commands::oracle(&global, args),
        Command::Flow(args) => commands::flow(&global, args),
        Command::Divide(args) => commands::divide(&global, args),
        Command::Density(args) => commands::density(&global, args),
        Command::Selftest => commands::selftest(&global),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(&f),
    }
}
