//! Command-line front end.
//!
//! Flags are resolved into a [`RunConfig`] before anything is computed; a
//! `--config` document replaces the problem and task flags.

pub mod config;
pub mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::correspond::DEFAULT_MESH;
use crate::jacobi::Triplet;
use crate::linalg::CMat;
use crate::model::{CouplingFamily, GapFamily, HermitianMatrix};
use crate::spectral::Boundary;
use config::{CompareCheck, Format, MatrixKind, OutputSpec, Problem, RunConfig, Task, Values};

pub const WORKERS_ENV: &str = "DELTA_JACOBI_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] crate::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Io(_) => "IoError",
            CliError::Core(e) => e.kind(),
        }
    }

    /// 2 for invalid input, 3 for numerical non-stabilization, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                E::NonMonotone(_)
                | E::NonHermitian(_)
                | E::LengthMismatch(_)
                | E::BadParameters(_)
                | E::TruncationTooLarge { .. }
                | E::SplitInvalid(_)
                | E::MeshTooCoarse { .. } => 2,
                E::NotStabilized { .. } | E::Indeterminate { .. } | E::ProbeExhausted { .. } => 3,
                _ => 1,
            },
        }
    }
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

/// The JSON line written to stderr for an error.
pub fn diagnostic(kind: &str, message: String, exit_code: i32) -> String {
    serde_json::to_string(&Diagnostic { error: kind, message, exit_code }).expect("plain struct")
}

#[derive(Debug, Parser)]
#[command(name = "delta-jacobi", version, about = "Block Jacobi matrices for Schrödinger operators with δ-interactions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble a matrix truncation.
    Build(CommonArgs),
    /// Evaluate Weyl functions and run the Herglotz scan.
    Weyl(CommonArgs),
    /// Evaluate the deficiency and spectral criteria.
    Criteria(CommonArgs),
    /// Eigenvalue counts and lists of truncated H and B.
    Spectrum(CommonArgs),
    /// Operator against matrix comparisons.
    Compare(CommonArgs),
}

impl Command {
    fn parts(&self) -> (&'static str, &CommonArgs) {
        match self {
            Command::Build(a) => ("build", a),
            Command::Weyl(a) => ("weyl", a),
            Command::Criteria(a) => ("criteria", a),
            Command::Spectrum(a) => ("spectrum", a),
            Command::Compare(a) => ("compare", a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Constant,
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    /// p = 2, d_k = 1/k, α_{k,1} = −2k−1, α_{k,2} = −4k−4, split p1 = 1.
    KosmirPaper,
    /// p = 1, d_k = 1/k, α_k = −2k−1.
    KosmirScalar,
    /// p = 1, d_k = 1, Λ = 0.
    Free,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration; replaces the problem and task flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    pub emit: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for the comparison harness.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Random explicit data (p from --p, intervals from --N).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    pub dump_config: bool,
    /// Validate and print the plan without computing.
    #[arg(long)]
    pub dry_run: bool,

    #[arg(long, value_enum)]
    pub example: Option<Example>,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub gamma: f64,
    /// Couplings α_k = a k + b + ρ/k on every coordinate.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// A single coupling `value · I` at `--at` on `[0, --length]`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_scalar: Option<f64>,
    #[arg(long)]
    pub at: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub length: f64,

    /// Truncation levels (comma separated).
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, value_enum)]
    pub matrix: Option<MatrixKind>,
    #[arg(long, value_enum)]
    pub triplet: Option<TripletArg>,
    /// Spectral parameter as `re,im`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Vec<String>,
    /// Side of the Herglotz sample grid (0 skips).
    #[arg(long, default_value_t = 0)]
    pub scan: usize,
    #[arg(long)]
    pub split: Option<usize>,
    #[arg(long, value_enum)]
    pub left: Option<BoundaryArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Mesh sizes (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub h: Vec<f64>,
    #[arg(long = "task", value_enum)]
    pub check: Option<CompareCheck>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub probe_level: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TripletArg {
    Triplet1,
    Triplet2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Neumann,
    Dirichlet,
}

fn affine(p: usize, a: f64, b: f64, rho: f64) -> CouplingFamily {
    CouplingFamily::DiagonalAffine { a: vec![a; p], b: vec![b; p], rho: vec![rho; p] }
}

fn example_problem(e: Example) -> Problem {
    let power = GapFamily::PowerLaw { c: 1.0, gamma: 1.0 };
    match e {
        Example::KosmirPaper => Problem::Family {
            p: 2,
            gaps: power,
            couplings: CouplingFamily::DiagonalAffine { a: vec![-2.0, -4.0], b: vec![-1.0, -4.0], rho: vec![0.0, 0.0] },
        },
        Example::KosmirScalar => Problem::Family { p: 1, gaps: power, couplings: affine(1, -2.0, -1.0, 0.0) },
        Example::Free => Problem::Family { p: 1, gaps: GapFamily::Constant { c: 1.0 }, couplings: CouplingFamily::Zero },
    }
}

/// Explicit data with `d_k ∈ [0.1, 2]` and Hermitian couplings with entries
/// in `[−2, 2]`.
pub fn random_problem(seed: u64, p: usize, intervals: usize) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0];
    for _ in 0..intervals {
        let last = *x.last().expect("nonempty");
        x.push(last + rng.gen_range(0.1..2.0));
    }
    let lambda = (1..intervals)
        .map(|_| {
            let mut m = CMat::zeros(p, p);
            for i in 0..p {
                m[(i, i)] = rng.gen_range(-2.0..2.0f64).into();
                for j in i + 1..p {
                    let v = num_complex::Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                    m[(i, j)] = v;
                    m[(j, i)] = v.conj();
                }
            }
            HermitianMatrix::new(m).expect("hermitian by construction")
        })
        .collect();
    Problem::Explicit { p, x: Values::Inline(x), lambda }
}

fn parse_z(s: &str) -> Result<[f64; 2], CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| CliError::Config(format!("--z {s}: {e}")));
    match parts.as_slice() {
        [re] => Ok([num(re)?, 0.0]),
        [re, im] => Ok([num(re)?, num(im)?]),
        _ => Err(CliError::Config(format!("--z expects `re,im`, got {s}"))),
    }
}

fn resolve_problem(a: &CommonArgs) -> Result<Problem, CliError> {
    if let Some(e) = a.example {
        return Ok(example_problem(e));
    }
    if let Some(seed) = a.seed {
        let intervals = a.n.iter().copied().max().unwrap_or(10);
        return Ok(random_problem(seed, a.p, intervals.max(2)));
    }
    if let Some(strength) = a.lambda_scalar {
        let at = a.at.ok_or_else(|| CliError::Config("--lambda-scalar needs --at".into()))?;
        return Ok(Problem::SingleDelta { p: a.p, at, length: a.length, strength });
    }
    let gaps = match a.family.unwrap_or(FamilyKind::Constant) {
        FamilyKind::Constant => GapFamily::Constant { c: a.c },
        FamilyKind::PowerLaw => GapFamily::PowerLaw { c: a.c, gamma: a.gamma },
    };
    let couplings = if a.a.is_some() || a.b.is_some() || a.rho.is_some() {
        affine(a.p, a.a.unwrap_or(0.0), a.b.unwrap_or(0.0), a.rho.unwrap_or(0.0))
    } else {
        CouplingFamily::Zero
    };
    Ok(Problem::Family { p: a.p, gaps, couplings })
}

fn resolve_task(name: &str, a: &CommonArgs) -> Result<Task, CliError> {
    let first_n = |default: usize| a.n.first().copied().unwrap_or(default);
    let mesh = if a.h.is_empty() { DEFAULT_MESH.to_vec() } else { a.h.clone() };
    let left = match a.left.unwrap_or(BoundaryArg::Neumann) {
        BoundaryArg::Neumann => Boundary::Neumann,
        BoundaryArg::Dirichlet => Boundary::Dirichlet,
    };
    let split = a.split.or(matches!(a.example, Some(Example::KosmirPaper)).then_some(1));
    Ok(match name {
        "build" => Task::Build { n: first_n(10), matrix: a.matrix.unwrap_or(MatrixKind::B2) },
        "weyl" => Task::Weyl {
            n: first_n(10),
            triplet: match a.triplet.unwrap_or(TripletArg::Triplet2) {
                TripletArg::Triplet1 => Triplet::Triplet1,
                TripletArg::Triplet2 => Triplet::Triplet2,
            },
            z: if a.z.is_empty() { vec![[0.0, 1.0]] } else { a.z.iter().map(|s| parse_z(s)).collect::<Result<_, _>>()? },
            scan: a.scan,
        },
        "criteria" => Task::Criteria { split, tilde_couplings: None },
        "spectrum" => Task::Spectrum {
            n: first_n(8),
            left,
            lo: a.lo.unwrap_or(-5.0),
            hi: a.hi.unwrap_or(5.0),
            count: a.count.unwrap_or(20),
            mesh,
        },
        _ => Task::Compare {
            check: a.check.unwrap_or(CompareCheck::Kappa),
            n: if a.n.is_empty() { vec![4, 8, 16] } else { a.n.clone() },
            mesh,
            horizon: a.horizon.unwrap_or(400),
            split,
            probe_level: a.probe_level.unwrap_or(1.0),
        },
    })
}

fn default_format(task: &Task) -> Format {
    match task {
        Task::Criteria { .. } => Format::Pretty,
        _ => Format::Json,
    }
}

/// Builds the run configuration from a subcommand's flags, or loads it from
/// `--config` and applies the output overrides.
pub fn resolve_config(name: &str, a: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let cfg = RunConfig::from_json(&text)?;
            if cfg.task.name() != name {
                return Err(CliError::Config(format!("config task is `{}` but the subcommand is `{name}`", cfg.task.name())));
            }
            cfg
        }
        None => {
            let task = resolve_task(name, a)?;
            let format = default_format(&task);
            RunConfig { problem: resolve_problem(a)?, task, output: OutputSpec { format, emit: None } }
        }
    };
    if let Some(f) = a.format {
        cfg.output.format = f;
    }
    if a.emit.is_some() {
        cfg.output.emit = a.emit.clone();
    }
    Ok(cfg)
}

/// Worker count: the environment variable, then `--workers`, then the number
/// of logical cores.
pub fn resolve_workers(flag: Option<usize>) -> Result<usize, CliError> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        return v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`")));
    }
    if let Some(n) = flag {
        if n == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        return Ok(n);
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", diagnostic("UsageError", e.to_string().trim().to_string(), 2));
            return 2;
        }
    };
    let (name, args) = cli.command.parts();
    match run::execute(name, args) {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            eprintln!("{}", diagnostic(e.kind(), e.to_string(), code));
            code
        }
    }
}
