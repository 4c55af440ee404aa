//! Point-interaction data `(X, Λ)` and the parametric families that generate it.
//!
//! Grid points start at `x_0 = 0`; interval `k` is `[x_{k-1}, x_k]` with
//! length `d_k`, and the coupling `Λ_k` sits at the interior point `x_k`.
//! All public accessors use these 1-based indices.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// A `p × p` matrix that is Hermitian bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    /// Wraps `m` if it is square and exactly Hermitian.
    pub fn new(m: CMat) -> Option<Self> {
        m.is_hermitian_exact().then_some(Self(m))
    }

    pub fn zeros(p: usize) -> Self {
        Self(CMat::zeros(p, p))
    }

    pub fn scalar(p: usize, value: f64) -> Self {
        Self(CMat::scalar(p, value))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self(CMat::diag_real(values))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }

    /// Spectral norm, computed from the eigenvalues.
    pub fn norm(&self) -> f64 {
        self.0.spectral_norm()
    }

    /// Leading principal `q × q` block.
    pub fn leading(&self, q: usize) -> Self {
        Self(self.0.block(0, 0, q, q))
    }

    /// Trailing principal block starting at row/column `from`.
    pub fn trailing(&self, from: usize) -> Self {
        let q = self.dim() - from;
        Self(self.0.block(from, from, q, q))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let re = (0..n).map(|i| (0..n).map(|j| self.0[(i, j)].re).collect()).collect();
        let has_im = self.0.as_slice().iter().any(|v| v.im != 0.0);
        let im = has_im.then(|| (0..n).map(|i| (0..n).map(|j| self.0[(i, j)].im).collect()).collect());
        MatrixRepr { re, im }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MatrixRepr::deserialize(d)?;
        let n = repr.re.len();
        if repr.re.iter().any(|row| row.len() != n) {
            return Err(D::Error::custom("matrix `re` part must be square"));
        }
        if let Some(im) = &repr.im {
            if im.len() != n || im.iter().any(|row| row.len() != n) {
                return Err(D::Error::custom("matrix `im` part must match `re`"));
            }
        }
        let m = CMat::from_fn(n, n, |i, j| {
            Complex64::new(repr.re[i][j], repr.im.as_ref().map_or(0.0, |im| im[i][j]))
        });
        HermitianMatrix::new(m).ok_or_else(|| D::Error::custom("matrix is not Hermitian"))
    }
}

/// Validated interaction data with cached gaps `d_k` and `r_k = √(d_k + d_{k+1})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionData {
    p: usize,
    x: Vec<f64>,
    lambda: Vec<HermitianMatrix>,
    #[serde(skip)]
    d: Vec<f64>,
    #[serde(skip)]
    r: Vec<f64>,
}

impl InteractionData {
    /// Validates grid points and couplings.
    ///
    /// `x` must start at 0 and increase strictly; `lambda` holds `Λ_1 … Λ_{N-1}`
    /// for the `N = x.len() - 1` intervals, each an exactly Hermitian `p × p`
    /// matrix.
    pub fn new(x: Vec<f64>, lambda: Vec<CMat>, p: usize) -> Result<Self> {
        let lambda = lambda
            .into_iter()
            .enumerate()
            .map(|(i, m)| {
                if m.rows() != p || m.cols() != p {
                    return Err(Error::LengthMismatch(format!(
                        "Λ_{} is {}×{}, expected {p}×{p}",
                        i + 1,
                        m.rows(),
                        m.cols()
                    )));
                }
                HermitianMatrix::new(m).ok_or(Error::NonHermitian(i + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_hermitian(x, lambda, p)
    }

    pub fn from_hermitian(x: Vec<f64>, lambda: Vec<HermitianMatrix>, p: usize) -> Result<Self> {
        validate_grid(&x)?;
        let d: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        Self::assemble(x, d, lambda, p)
    }

    fn assemble(x: Vec<f64>, d: Vec<f64>, lambda: Vec<HermitianMatrix>, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::BadParameters("block dimension p must be positive".into()));
        }
        if lambda.len() + 2 != x.len() {
            return Err(Error::LengthMismatch(format!(
                "{} grid points need {} couplings, got {}",
                x.len(),
                x.len().saturating_sub(2),
                lambda.len()
            )));
        }
        if let Some((i, m)) = lambda.iter().enumerate().find(|(_, m)| m.dim() != p) {
            return Err(Error::LengthMismatch(format!("Λ_{} has dimension {}, expected {p}", i + 1, m.dim())));
        }
        if let Some(k) = d.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::NonMonotone(k + 1));
        }
        let r = d.windows(2).map(|w| (w[0] + w[1]).sqrt()).collect();
        Ok(Self { p, x, lambda, d, r })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of intervals `N`.
    pub fn intervals(&self) -> usize {
        self.d.len()
    }

    /// Number of couplings, `N - 1`.
    pub fn couplings(&self) -> usize {
        self.lambda.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn gaps(&self) -> &[f64] {
        &self.d
    }

    pub fn lambdas(&self) -> &[HermitianMatrix] {
        &self.lambda
    }

    /// `d_k`, 1-based.
    pub fn d(&self, k: usize) -> f64 {
        self.d[k - 1]
    }

    /// `r_k = √(d_k + d_{k+1})`, 1-based, defined for `k < N`.
    pub fn r(&self, k: usize) -> f64 {
        self.r[k - 1]
    }

    /// `Λ_k`, 1-based, defined for `k < N`.
    pub fn lambda(&self, k: usize) -> &HermitianMatrix {
        &self.lambda[k - 1]
    }

    /// `d* = max_k d_k`.
    pub fn d_star(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    pub fn length(&self) -> f64 {
        *self.x.last().unwrap()
    }

    /// The data restricted to `[0, x_n]`: intervals `1..=n` and couplings
    /// `Λ_1 … Λ_{n-1}`.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.intervals() {
            return Err(Error::TruncationTooLarge {
                requested: n,
                available: self.intervals(),
            });
        }
        Self::assemble(
            self.x[..=n].to_vec(),
            self.d[..n].to_vec(),
            self.lambda[..n - 1].to_vec(),
            self.p,
        )
    }
}

fn validate_grid(x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::LengthMismatch("need at least two grid points".into()));
    }
    if x[0] != 0.0 {
        return Err(Error::NonMonotone(0));
    }
    if let Some(i) = x.windows(2).position(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::NonMonotone(i + 1));
    }
    Ok(())
}

/// Tail rule `d_k = c · k^{-γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLaw {
    pub c: f64,
    pub gamma: f64,
}

impl PowerLaw {
    pub fn at(&self, k: usize) -> f64 {
        self.c * (k as f64).powf(-self.gamma)
    }
}

/// Gap sequence `d_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GapFamily {
    Constant { c: f64 },
    PowerLaw { c: f64, gamma: f64 },
    /// An explicit prefix, optionally continued by a power law for
    /// `k > values.len()`.
    Explicit {
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail: Option<PowerLaw>,
    },
}

impl GapFamily {
    pub fn validate(&self) -> Result<()> {
        let check = |c: f64, gamma: f64| {
            if !(c > 0.0) || !c.is_finite() || !(gamma >= 0.0) || !gamma.is_finite() {
                Err(Error::BadParameters(format!("power law needs c > 0 and γ ≥ 0, got c = {c}, γ = {gamma}")))
            } else {
                Ok(())
            }
        };
        match self {
            GapFamily::Constant { c } => check(*c, 0.0),
            GapFamily::PowerLaw { c, gamma } => check(*c, *gamma),
            GapFamily::Explicit { values, tail } => {
                if let Some(k) = values.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
                    return Err(Error::BadParameters(format!("d_{} must be positive", k + 1)));
                }
                if let Some(t) = tail {
                    check(t.c, t.gamma)?;
                }
                Ok(())
            }
        }
    }

    /// `d_k`, or `None` past an explicit prefix with no tail rule.
    pub fn at(&self, k: usize) -> Option<f64> {
        match self {
            GapFamily::Constant { c } => Some(*c),
            GapFamily::PowerLaw { c, gamma } => Some(PowerLaw { c: *c, gamma: *gamma }.at(k)),
            GapFamily::Explicit { values, tail } => values.get(k - 1).copied().or_else(|| tail.map(|t| t.at(k))),
        }
    }

    /// The power law governing the tail, if the family declares one.
    pub fn tail(&self) -> Option<PowerLaw> {
        match self {
            GapFamily::Constant { c } => Some(PowerLaw { c: *c, gamma: 0.0 }),
            GapFamily::PowerLaw { c, gamma } => Some(PowerLaw { c: *c, gamma: *gamma }),
            GapFamily::Explicit { tail, .. } => *tail,
        }
    }

    /// Length of the explicit prefix (zero for purely parametric families).
    pub fn prefix_len(&self) -> usize {
        match self {
            GapFamily::Explicit { values, .. } => values.len(),
            _ => 0,
        }
    }
}

/// One term `coeff · k^{exponent}` of a diagonal coupling entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
    pub coeff: f64,
    pub exponent: f64,
}

/// Coupling sequence `Λ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CouplingFamily {
    Zero,
    /// `Λ_at = matrix`, all other couplings zero.
    SingleDelta { at: usize, matrix: HermitianMatrix },
    /// `Λ_k = diag(α_{k,j})` with `α_{k,j} = a_j k + b_j + ρ_j / k`.
    DiagonalAffine { a: Vec<f64>, b: Vec<f64>, rho: Vec<f64> },
    /// `Λ_k = diag(α_{k,j})` with `α_{k,j} = Σ_i c_{j,i} k^{e_{j,i}}`.
    DiagonalPowerSum { terms: Vec<Vec<PowerTerm>> },
    /// Explicit prefix `Λ_1, Λ_2, …` with no tail information.
    Explicit { matrices: Vec<HermitianMatrix> },
}

impl CouplingFamily {
    pub fn validate(&self, p: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::BadParameters(msg));
        match self {
            CouplingFamily::Zero => Ok(()),
            CouplingFamily::SingleDelta { at, matrix } => {
                if *at == 0 {
                    return bad("single-delta index is 1-based".into());
                }
                if matrix.dim() != p {
                    return bad(format!("single-delta matrix has dimension {}, expected {p}", matrix.dim()));
                }
                Ok(())
            }
            CouplingFamily::DiagonalAffine { a, b, rho } => {
                if a.len() != p || b.len() != p || rho.len() != p {
                    return bad(format!("diagonal-affine needs {p} values for each of a, b, rho"));
                }
                if a.iter().chain(b).chain(rho).any(|v| !v.is_finite()) {
                    return bad("diagonal-affine parameters must be finite".into());
                }
                Ok(())
            }
            CouplingFamily::DiagonalPowerSum { terms } => {
                if terms.len() != p {
                    return bad(format!("diagonal-power-sum needs {p} coordinate lists"));
                }
                if terms.iter().flatten().any(|t| !t.coeff.is_finite() || !t.exponent.is_finite()) {
                    return bad("power-sum terms must be finite".into());
                }
                Ok(())
            }
            CouplingFamily::Explicit { matrices } => {
                if let Some(i) = matrices.iter().position(|m| m.dim() != p) {
                    return bad(format!("Λ_{} has the wrong dimension", i + 1));
                }
                Ok(())
            }
        }
    }

    /// Per-coordinate power terms of a diagonal family. Finite-support
    /// families report their (zero) tail.
    pub fn diagonal_terms(&self, p: usize) -> Option<Vec<Vec<PowerTerm>>> {
        match self {
            CouplingFamily::Zero | CouplingFamily::SingleDelta { .. } => Some(vec![Vec::new(); p]),
            CouplingFamily::DiagonalAffine { a, b, rho } => Some(
                (0..p)
                    .map(|j| {
                        vec![
                            PowerTerm { coeff: a[j], exponent: 1.0 },
                            PowerTerm { coeff: b[j], exponent: 0.0 },
                            PowerTerm { coeff: rho[j], exponent: -1.0 },
                        ]
                    })
                    .collect(),
            ),
            CouplingFamily::DiagonalPowerSum { terms } => Some(terms.clone()),
            CouplingFamily::Explicit { .. } => None,
        }
    }

    /// Whether every `Λ_k` is diagonal.
    pub fn is_diagonal(&self) -> bool {
        match self {
            CouplingFamily::Zero | CouplingFamily::DiagonalAffine { .. } | CouplingFamily::DiagonalPowerSum { .. } => true,
            CouplingFamily::SingleDelta { matrix, .. } => is_diagonal(matrix.as_mat()),
            CouplingFamily::Explicit { matrices } => matrices.iter().all(|m| is_diagonal(m.as_mat())),
        }
    }

    /// `Λ_k`, or `None` past an explicit prefix.
    pub fn at(&self, k: usize, p: usize) -> Option<HermitianMatrix> {
        match self {
            CouplingFamily::Zero => Some(HermitianMatrix::zeros(p)),
            CouplingFamily::SingleDelta { at, matrix } => {
                Some(if k == *at { matrix.clone() } else { HermitianMatrix::zeros(p) })
            }
            CouplingFamily::DiagonalAffine { .. } | CouplingFamily::DiagonalPowerSum { .. } => {
                let terms = self.diagonal_terms(p)?;
                let kf = k as f64;
                let values: Vec<f64> = terms
                    .iter()
                    .map(|ts| ts.iter().map(|t| t.coeff * kf.powf(t.exponent)).sum())
                    .collect();
                Some(HermitianMatrix::diagonal(&values))
            }
            CouplingFamily::Explicit { matrices } => matrices.get(k - 1).cloned(),
        }
    }
}

fn is_diagonal(m: &CMat) -> bool {
    (0..m.rows()).all(|i| (0..m.cols()).all(|j| i == j || m[(i, j)] == Complex64::new(0.0, 0.0)))
}

/// A deterministic recipe for `(X, Λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFamily {
    pub p: usize,
    pub gaps: GapFamily,
    pub couplings: CouplingFamily,
}

impl SequenceFamily {
    pub fn new(p: usize, gaps: GapFamily, couplings: CouplingFamily) -> Result<Self> {
        let f = Self { p, gaps, couplings };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::BadParameters("block dimension p must be positive".into()));
        }
        self.gaps.validate()?;
        self.couplings.validate(self.p)
    }

    pub fn gap(&self, k: usize) -> Option<f64> {
        self.gaps.at(k)
    }

    pub fn coupling(&self, k: usize) -> Option<HermitianMatrix> {
        self.couplings.at(k, self.p)
    }

    /// The subfamily on the coordinates `range` (diagonal couplings only).
    pub fn coordinates(&self, range: std::ops::Range<usize>) -> Option<SequenceFamily> {
        let terms = self.couplings.diagonal_terms(self.p)?;
        if !self.couplings.is_diagonal() {
            return None;
        }
        let couplings = match &self.couplings {
            CouplingFamily::Zero => CouplingFamily::Zero,
            CouplingFamily::SingleDelta { at, matrix } => CouplingFamily::SingleDelta {
                at: *at,
                matrix: HermitianMatrix(matrix.as_mat().block(range.start, range.start, range.len(), range.len())),
            },
            CouplingFamily::Explicit { matrices } => CouplingFamily::Explicit {
                matrices: matrices
                    .iter()
                    .map(|m| HermitianMatrix(m.as_mat().block(range.start, range.start, range.len(), range.len())))
                    .collect(),
            },
            _ => CouplingFamily::DiagonalPowerSum {
                terms: terms[range.clone()].to_vec(),
            },
        };
        Some(SequenceFamily {
            p: range.len(),
            gaps: self.gaps.clone(),
            couplings,
        })
    }
}

/// Generates the data for the first `n` intervals of `family`.
///
/// `x_k` is accumulated as the running sum of the generated `d_k`, so the
/// cached gaps are exactly the generator's values.
pub fn generate(family: &SequenceFamily, n: usize) -> Result<InteractionData> {
    family.validate()?;
    if n < 2 {
        return Err(Error::BadParameters(format!("need at least 2 intervals, got {n}")));
    }
    let d = (1..=n)
        .map(|k| {
            family
                .gap(k)
                .ok_or_else(|| Error::BadParameters(format!("gap family has no value for d_{k}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let lambda = (1..n)
        .map(|k| {
            family
                .coupling(k)
                .ok_or_else(|| Error::BadParameters(format!("coupling family has no value for Λ_{k}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut x = Vec::with_capacity(n + 1);
    x.push(0.0);
    let mut acc = 0.0;
    for &dk in &d {
        acc += dk;
        x.push(acc);
    }
    InteractionData::assemble(x, d, lambda, family.p)
}

/// A single coupling at `x_1 = at` on `[0, length]`, with `[at, length]`
/// split into `n - 1` equal intervals carrying zero couplings.
///
/// Every `n` describes the same operator on `[0, length]`; only the
/// partition changes.
pub fn single_delta_partition(at: f64, length: f64, n: usize, strength: HermitianMatrix) -> Result<InteractionData> {
    if n < 2 {
        return Err(Error::BadParameters(format!("need at least 2 intervals, got {n}")));
    }
    if !(at > 0.0 && length > at) || !length.is_finite() {
        return Err(Error::BadParameters(format!("need 0 < at < length, got at = {at}, length = {length}")));
    }
    let p = strength.dim();
    let step = (length - at) / (n - 1) as f64;
    let mut x = vec![0.0, at];
    for i in 1..n - 1 {
        x.push(at + step * i as f64);
    }
    x.push(length);
    let mut lambda = vec![strength];
    lambda.extend((2..n).map(|_| HermitianMatrix::zeros(p)));
    InteractionData::from_hermitian(x, lambda, p)
}

/// Checks `d_k d_{k+2} ≥ d_{k+1}²` on a finite prefix and returns the first
/// violating (1-based) `k`.
pub fn log_convexity_violation(d: &[f64]) -> Option<usize> {
    d.windows(3).position(|w| w[0] * w[2] < w[1] * w[1]).map(|i| i + 1)
}
