//! The run configuration document.
//!
//! Every field is explicit after resolution, so `--dump-config` output
//! reproduces a run exactly. Unknown fields are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::correspond::{SingleDelta, TruncationSource};
use crate::jacobi::Triplet;
use crate::model::{generate, single_delta_partition, CouplingFamily, GapFamily, HermitianMatrix, InteractionData, SequenceFamily};
use crate::spectral::Boundary;

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    pub task: Task,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Format,
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

/// Numbers given inline or as a file with one value per line (`#` starts a
/// comment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    Inline(Vec<f64>),
    File(FileRef),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileRef {
    pub file: PathBuf,
}

impl Values {
    pub fn resolve(&self, base: &Path) -> Result<Vec<f64>, CliError> {
        match self {
            Values::Inline(v) => Ok(v.clone()),
            Values::File(FileRef { file }) => {
                let path = if file.is_absolute() { file.clone() } else { base.join(file) };
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                parse_values(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
            }
        }
    }
}

pub fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let content = line.split('#').next().unwrap_or("").trim();
            (!content.is_empty()).then(|| content.parse::<f64>().map_err(|e| format!("line {}: {e}", i + 1)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Problem {
    Family {
        p: usize,
        gaps: GapFamily,
        couplings: CouplingFamily,
    },
    Explicit {
        p: usize,
        x: Values,
        lambda: Vec<HermitianMatrix>,
    },
    /// `Λ_1 = strength · I` at `x_1 = at` on `[0, length]`.
    SingleDelta {
        p: usize,
        at: f64,
        length: f64,
        strength: f64,
    },
}

/// A problem with file references resolved.
pub enum Resolved {
    Family(SequenceFamily),
    Data(InteractionData),
    Single(SingleDelta),
}

impl Problem {
    pub fn resolve(&self, base: &Path) -> Result<Resolved, CliError> {
        Ok(match self {
            Problem::Family { p, gaps, couplings } => Resolved::Family(SequenceFamily::new(*p, gaps.clone(), couplings.clone())?),
            Problem::Explicit { p, x, lambda } => Resolved::Data(InteractionData::from_hermitian(x.resolve(base)?, lambda.clone(), *p)?),
            Problem::SingleDelta { p, at, length, strength } => {
                let s = SingleDelta { at: *at, length: *length, strength: HermitianMatrix::scalar(*p, *strength) };
                // validates the geometry
                single_delta_partition(s.at, s.length, 2, s.strength.clone())?;
                Resolved::Single(s)
            }
        })
    }
}

impl Resolved {
    pub fn source(&self) -> &dyn TruncationSource {
        match self {
            Resolved::Family(f) => f,
            Resolved::Data(d) => d,
            Resolved::Single(s) => s,
        }
    }

    /// Data with `n` intervals.
    pub fn data(&self, n: usize) -> Result<InteractionData, CliError> {
        Ok(match self {
            Resolved::Family(f) => generate(f, n)?,
            Resolved::Data(d) => d.prefix(n)?,
            Resolved::Single(s) => s.data(n)?,
        })
    }

    pub fn family(&self) -> Option<&SequenceFamily> {
        match self {
            Resolved::Family(f) => Some(f),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    /// `B₂` as built from the second triplet.
    B2,
    /// `B₂` with the first block matched to `f'(0) = 0`.
    B2Neumann,
    TildeB,
    B1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CompareCheck {
    Kappa,
    Nonnegativity,
    Semiboundedness,
    Indices,
    Discreteness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    /// `n` is the block count for `B₂` and the interval count otherwise.
    Build { n: usize, matrix: MatrixKind },
    Weyl {
        n: usize,
        triplet: Triplet,
        z: Vec<[f64; 2]>,
        /// Side length of the Herglotz sample grid; 0 skips the scan.
        scan: usize,
    },
    Criteria {
        split: Option<usize>,
        tilde_couplings: Option<CouplingFamily>,
    },
    Spectrum {
        n: usize,
        left: Boundary,
        lo: f64,
        hi: f64,
        count: usize,
        mesh: Vec<f64>,
    },
    Compare {
        check: CompareCheck,
        n: Vec<usize>,
        mesh: Vec<f64>,
        horizon: usize,
        split: Option<usize>,
        probe_level: f64,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Build { .. } => "build",
            Task::Weyl { .. } => "weyl",
            Task::Criteria { .. } => "criteria",
            Task::Spectrum { .. } => "spectrum",
            Task::Compare { .. } => "compare",
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}
