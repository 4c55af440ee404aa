use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Interval and coupling indices carried by variants are 1-based, matching
/// `d_k` and `Λ_k` in the documentation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid points are not strictly increasing from x_0 = 0 (first violation at index {0})")]
    NonMonotone(usize),

    #[error("coupling matrix Λ_{0} is not Hermitian")]
    NonHermitian(usize),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error("truncation order {requested} exceeds the available {available}")]
    TruncationTooLarge { requested: usize, available: usize },

    #[error("spectral parameter z = {re}{im:+}i is within the pole tolerance on interval {k}")]
    NearPole { k: usize, re: f64, im: f64 },

    #[error("uniform decay probe did not reach the level -{a} within x = -2^{max_exponent}")]
    ProbeExhausted { a: f64, max_exponent: i32 },

    #[error("series tail cannot be classified: {0}")]
    TailUnclassifiable(String),

    #[error("invalid block split: {0}")]
    SplitInvalid(String),

    #[error("pivot breakdown in block {0} of the LDL recursion")]
    PivotBreakdown(usize),

    #[error("mesh too coarse: h = {h} exceeds min d_k / 4 = {limit}")]
    MeshTooCoarse { h: f64, limit: f64 },

    #[error("negative count not stabilized: last two refinement levels gave {previous} and {last}")]
    NotStabilized { previous: usize, last: usize },

    #[error("deficiency estimate indeterminate: exponent gap {gap:.3} below threshold (tentative count {count})")]
    Indeterminate { count: usize, gap: f64 },

    #[error("singular matrix")]
    Singular,
}

impl Error {
    /// Short machine-readable tag used in structured diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonMonotone(_) => "NonMonotone",
            Error::NonHermitian(_) => "NonHermitian",
            Error::LengthMismatch(_) => "LengthMismatch",
            Error::BadParameters(_) => "BadParameters",
            Error::TruncationTooLarge { .. } => "TruncationTooLarge",
            Error::NearPole { .. } => "NearPole",
            Error::ProbeExhausted { .. } => "ProbeExhausted",
            Error::TailUnclassifiable(_) => "TailUnclassifiable",
            Error::SplitInvalid(_) => "SplitInvalid",
            Error::PivotBreakdown(_) => "PivotBreakdown",
            Error::MeshTooCoarse { .. } => "MeshTooCoarse",
            Error::NotStabilized { .. } => "NotStabilized",
            Error::Indeterminate { .. } => "Indeterminate",
            Error::Singular => "Singular",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
