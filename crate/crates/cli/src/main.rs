//! `peakon-lab`: construct, certify and evolve peakons of the mixed
//! cubic/quadratic Camassa-Holm equation from the command line.

mod commands;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use peakon_core::{Branch, Domain, Error, ModelParams};

const DEFAULTS: &str = "\
Defaults:
  peakon    --samples 201        profile samples; line x in [-10, 10], circle x in [0, 1)
  certify   --tolerance 1e-6     strong residual and weak residual / scale
            --horizon 1          test-function time horizon
  convolve  --samples 101        line s in [-5, 5], circle s in [0, 1]; 1e-3 around kinks skipped
            --tolerance 1e-8     max |closed form - quadrature|
  evolve    --n 1024 --dt 1e-4 --t-end 0.5 --filter-strength 1.5
            --cfl-safety 0.3 --record-every 50, 2/3-rule dealiasing on
  sweep     --random 0 --seed 0  random rows draw (k1, k2, c) uniformly from [-3, 3]^3
  all       --out-dir out        or PEAKON_LAB_OUT_DIR

Exit codes: 0 success, 2 no amplitude exists, 3 oracle or certification mismatch,
4 non-finite state or CFL violation, 64 usage error, 74 I/O error.";

#[derive(Debug, Parser)]
#[command(name = "peakon-lab", version, about = "Peakon laboratory for the mixed cubic/quadratic Camassa-Holm equation", after_help = DEFAULTS)]
pub struct Cli {
    /// Directory for every file a command writes.
    #[arg(long, global = true, env = "PEAKON_LAB_OUT_DIR", default_value = "out")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the amplitude equation and sample the profile.
    Peakon(PeakonArgs),
    /// Run the strong and weak residual suite on a (perturbed) peakon.
    Certify(CertifyArgs),
    /// Compare a closed-form convolution identity with quadrature.
    Convolve(ConvolveArgs),
    /// Evolve a mollified periodic peakon with the pseudospectral solver.
    Evolve(EvolveArgs),
    /// Tabulate amplitude existence over a parameter grid.
    Sweep(SweepArgs),
    /// Re-run the command recorded in a manifest and compare output hashes.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub k1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub k2: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub c: f64,
}

impl ParamArgs {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        Ok(ModelParams::new(self.k1, self.k2, self.c)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Line,
    Circle,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Line => Domain::Line,
            DomainArg::Circle => Domain::Circle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

#[derive(Debug, Args)]
pub struct PeakonArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value = "line")]
    pub domain: DomainArg,
    #[arg(long, value_enum, default_value = "plus")]
    pub branch: BranchArg,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value = "circle")]
    pub domain: DomainArg,
    #[arg(long, value_enum, default_value = "plus")]
    pub branch: BranchArg,
    /// Relative amplitude perturbation: the candidate is `(1 + perturb) a`.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub perturb: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Identity {
    LineCubic,
    LineQuadratic,
    CircleCubic,
    CircleSh2,
    CircleQuadratic,
}

#[derive(Debug, Args)]
pub struct ConvolveArgs {
    #[arg(long, value_enum)]
    pub identity: Identity,
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    /// Peakon amplitude `A` or `a`.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub amplitude: f64,
    /// Coefficient `k1` or `k2` multiplying the identity.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub coeff: f64,
    /// Explicit sample points, replacing the uniform grid.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub points: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value = "plus")]
    pub branch: BranchArg,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.5)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1.5)]
    pub filter_strength: f64,
    #[arg(long, default_value_t = 0.3)]
    pub cfl_safety: f64,
    #[arg(long, default_value_t = 50)]
    pub record_every: usize,
    #[arg(long)]
    pub no_dealias: bool,
    /// With k1 = 0 or k2 = 0, also run the single-nonlinearity field and
    /// require agreement to 1e-12 at every snapshot.
    #[arg(long)]
    pub check_reduction: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub k1: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub k2: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub c: Vec<f64>,
    /// Extra rows drawn at random.
    #[arg(long, default_value_t = 0)]
    pub random: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    /// Outputs disagree with an oracle or with the expected verdict.
    Mismatch(String),
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::NoRealAmplitude { .. } | Error::DegenerateParams | Error::BranchUnavailable => 2,
                Error::ToleranceNotMet { .. }
                | Error::AtKink(_)
                | Error::PointOnKink { .. }
                | Error::InsufficientRecords(_) => 3,
                Error::NonFiniteState { .. } | Error::CflViolation { .. } => 4,
                Error::NonFiniteParams | Error::BadGrid(_) | Error::InvalidTolerance(_) | Error::InvalidConfig(_) => 64,
            },
            CliError::Mismatch(_) => 3,
            CliError::Usage(_) => 64,
            CliError::Io(_) => 74,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Mismatch(m) | CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

/// Arguments as recorded in manifests: everything after the program name
/// except the output directory.
pub fn recorded_arguments(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--out-dir" {
            skip = true;
        } else if !a.starts_with("--out-dir=") {
            out.push(a.clone());
        }
    }
    out
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match commands::dispatch(&cli, recorded_arguments(&argv[1..])) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
