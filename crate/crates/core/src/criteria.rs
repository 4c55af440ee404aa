//! Deficiency-index and spectral criteria, each returning a [`Verdict`] with
//! the quantities that decided it.
//!
//! Tails are classified symbolically for parametric families (power-law or
//! constant gaps, diagonal power-sum couplings). Explicit prefixes without a
//! tail rule only ever yield `Inconclusive`.

use serde::Serialize;

use crate::asymptotic::{Expansion, SeriesClass, Term, UpperTail};
use crate::error::{Error, Result};
use crate::jacobi::build_b2;
use crate::model::{log_convexity_violation, CouplingFamily, HermitianMatrix, InteractionData, SequenceFamily};

/// Number of terms used for prefix sums and suprema of parametric families.
pub const PREFIX_TERMS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

/// Outcome of a criterion. `status` refers to the criterion's hypotheses;
/// `conclusion` is filled only when they hold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub claim: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<String>,
    /// Deficiency index implied by the conclusion.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deficiency: Option<usize>,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub partial_sums: Vec<PartialSum>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bounds: Vec<Bound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tails: Vec<TailInfo>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSum {
    pub label: String,
    pub n: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailInfo {
    pub label: String,
    pub terms: Vec<Term>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub remainder: Option<f64>,
    pub classification: String,
}

impl TailInfo {
    fn new(label: &str, e: &Expansion, classification: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            terms: e.terms().to_vec(),
            remainder: e.remainder(),
            classification: classification.into(),
        }
    }
}

impl Verdict {
    fn new(claim: &str) -> Self {
        Self {
            claim: claim.into(),
            status: Status::Inconclusive,
            conclusion: None,
            deficiency: None,
            witness: Witness::default(),
        }
    }

    fn holds(mut self, conclusion: impl Into<String>, deficiency: Option<usize>) -> Self {
        self.status = Status::Holds;
        self.conclusion = Some(conclusion.into());
        self.deficiency = deficiency;
        self
    }

    fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    fn missing(mut self, what: impl Into<String>) -> Self {
        self.witness.missing.push(what.into());
        self
    }
}

/// Combines hypothesis statuses: any failure fails, then any gap is
/// inconclusive.
fn combine(statuses: impl IntoIterator<Item = Status>) -> Status {
    let mut out = Status::Holds;
    for s in statuses {
        match s {
            Status::Fails => return Status::Fails,
            Status::Inconclusive => out = Status::Inconclusive,
            Status::Holds => {}
        }
    }
    out
}

/// Partial sums at `10, 100, …` and at `n`.
fn partial_sums(label: &str, n: usize, term: impl Fn(usize) -> f64) -> Vec<PartialSum> {
    let mut out = Vec::new();
    let mut acc = 0.0;
    let mut next = 10;
    for k in 1..=n {
        acc += term(k);
        if k == next || k == n {
            out.push(PartialSum { label: label.into(), n: k, value: acc });
            if k == next {
                next *= 10;
            }
        }
    }
    out
}

/// Expansion of `d_k`, if the family declares a tail rule.
fn gap_expansion(family: &SequenceFamily) -> Option<Expansion> {
    family.gaps.tail().map(|t| Expansion::monomial(t.c, -t.gamma))
}

/// Expansions of the diagonal coupling entries `α_{k,j}`.
fn coupling_expansions(family: &SequenceFamily) -> Option<Vec<Expansion>> {
    let terms = family.couplings.diagonal_terms(family.p)?;
    Some(
        terms
            .iter()
            .map(|ts| {
                Expansion::from_terms(ts.iter().map(|t| Term { exponent: t.exponent, coeff: t.coeff }).collect(), None)
            })
            .collect(),
    )
}

/// Number of prefix terms available for numerical sums.
fn prefix_len(family: &SequenceFamily) -> usize {
    let gaps = if family.gaps.tail().is_some() { PREFIX_TERMS.max(family.gaps.prefix_len()) } else { family.gaps.prefix_len() };
    match &family.couplings {
        CouplingFamily::Explicit { matrices } => gaps.min(matrices.len()),
        _ => gaps,
    }
}

/// Prefix length for sums whose terms also read `d_{k+1}`.
fn shifted_len(family: &SequenceFamily) -> usize {
    let n = prefix_len(family);
    if family.gaps.tail().is_some() { n } else { n.saturating_sub(1) }
}

fn gap(family: &SequenceFamily, k: usize) -> f64 {
    family.gap(k).expect("prefix index within the declared gaps")
}

/// Sufficient test for self-adjointness: `Σ d_k² = ∞`.
pub fn carleman(family: &SequenceFamily) -> Verdict {
    let mut v = Verdict::new("carleman: sum d_k^2 = infinity implies H self-adjoint");
    let n = family.gaps.prefix_len().max(if family.gaps.tail().is_some() { PREFIX_TERMS } else { 0 });
    v.witness.partial_sums = partial_sums("sum d_k^2", n, |k| gap(family, k).powi(2));
    let Some(d) = gap_expansion(family) else {
        return v.missing("tail rule for d_k");
    };
    let summand = d.mul(&d);
    match summand.series() {
        Ok(SeriesClass::Diverges) => {
            v.witness.tails.push(TailInfo::new("d_k^2", &summand, "diverges"));
            v.holds("n_+ = n_- = 0 (self-adjoint)", Some(0))
        }
        Ok(SeriesClass::Converges) => {
            v.witness.tails.push(TailInfo::new("d_k^2", &summand, "converges"));
            v.with_status(Status::Fails)
        }
        Err(e) => v.missing(e.to_string()),
    }
}

/// Carleman check on explicit data: always inconclusive.
pub fn carleman_data(data: &InteractionData) -> Verdict {
    let mut v = Verdict::new("carleman: sum d_k^2 = infinity implies H self-adjoint");
    v.witness.partial_sums = partial_sums("sum d_k^2", data.intervals(), |k| data.d(k).powi(2));
    v.missing("tail of d_k (finite data)")
}

/// `{d_k} ∈ ℓ²`.
fn ell2(family: &SequenceFamily) -> Verdict {
    let mut v = Verdict::new("d in l^2");
    let n = prefix_len(family).max(family.gaps.prefix_len());
    v.witness.partial_sums = partial_sums("sum d_k^2", n, |k| gap(family, k).powi(2));
    let Some(d) = gap_expansion(family) else {
        return v.missing("tail rule for d_k");
    };
    let sq = d.mul(&d);
    match sq.series() {
        Ok(SeriesClass::Converges) => {
            v.witness.tails.push(TailInfo::new("d_k^2", &sq, "converges"));
            v.with_status(Status::Holds)
        }
        Ok(SeriesClass::Diverges) => {
            v.witness.tails.push(TailInfo::new("d_k^2", &sq, "diverges"));
            v.with_status(Status::Fails)
        }
        Err(e) => v.missing(e.to_string()),
    }
}

/// `d_k d_{k+2} ≥ d_{k+1}²` for all `k`; power-law tails satisfy it.
fn log_convex(family: &SequenceFamily) -> Verdict {
    let mut v = Verdict::new("log-convexity d_k d_{k+2} >= d_{k+1}^2");
    let explicit = family.gaps.prefix_len();
    // every window that touches the explicit prefix, plus a few tail windows
    let check = if family.gaps.tail().is_some() { explicit + 3 } else { explicit };
    let values: Vec<f64> = (1..=check).map(|k| gap(family, k)).collect();
    if let Some(k) = log_convexity_violation(&values) {
        v.witness.first_violation = Some(k);
        return v.with_status(Status::Fails);
    }
    if family.gaps.tail().is_none() {
        return v.missing("tail rule for d_k");
    }
    v.witness.bounds.push(Bound { label: "windows checked explicitly".into(), value: check.saturating_sub(2) as f64 });
    v.with_status(Status::Holds)
}

/// `d_{k+1} ≤ d_k` for all `k`.
fn nonincreasing(family: &SequenceFamily) -> Verdict {
    let mut v = Verdict::new("d_k nonincreasing");
    let explicit = family.gaps.prefix_len();
    let check = if family.gaps.tail().is_some() { explicit + 2 } else { explicit };
    if let Some(k) = (1..check).find(|&k| gap(family, k + 1) > gap(family, k)) {
        v.witness.first_violation = Some(k);
        return v.with_status(Status::Fails);
    }
    if family.gaps.tail().is_none() {
        return v.missing("tail rule for d_k");
    }
    v.with_status(Status::Holds)
}

/// The summability condition `Σ d_{k+1}‖Λ_k + (d_k⁻¹ + d_{k+1}⁻¹)I‖ < ∞` on the
/// leading `dims × dims` block.
fn alpha_condition(family: &SequenceFamily, dims: usize) -> Verdict {
    let mut v = Verdict::new("sum d_{k+1} ||Lambda_k + (1/d_k + 1/d_{k+1}) I|| < infinity");
    let n = shifted_len(family);
    v.witness.partial_sums = partial_sums("alpha series", n, |k| {
        let (dk, dk1) = (gap(family, k), gap(family, k + 1));
        let lam = family.coupling(k).expect("coupling within prefix").leading(dims);
        let mut m = lam.into_mat();
        for i in 0..dims {
            m[(i, i)] += 1.0 / dk + 1.0 / dk1;
        }
        dk1 * HermitianMatrix::new(m.hermitian_part()).expect("hermitian").norm()
    });
    let Some(d) = gap_expansion(family) else {
        return v.missing("tail rule for d_k");
    };
    let Some(alphas) = coupling_expansions(family) else {
        return v.missing("tail rule for Lambda_k");
    };
    let tail = (|| -> Result<Expansion> {
        let inv = d.recip()?;
        let shift = inv.add(&inv.shift());
        let mut norm = Expansion::zero();
        for a in &alphas[..dims] {
            norm = norm.max(&a.add(&shift).abs());
        }
        Ok(d.shift().mul(&norm))
    })();
    let summand = match tail {
        Ok(s) => s,
        Err(e) => return v.missing(e.to_string()),
    };
    match summand.series() {
        Ok(SeriesClass::Converges) => {
            v.witness.tails.push(TailInfo::new("alpha summand", &summand, "converges"));
            v.with_status(Status::Holds)
        }
        Ok(SeriesClass::Diverges) => {
            v.witness.tails.push(TailInfo::new("alpha summand", &summand, "diverges"));
            v.with_status(Status::Fails)
        }
        Err(e) => v.missing(e.to_string()),
    }
}

fn kosmir_on(family: &SequenceFamily, dims: usize) -> Verdict {
    let parts = vec![ell2(family), log_convex(family), alpha_condition(family, dims)];
    let status = combine(parts.iter().map(|p| p.status));
    let mut v = Verdict::new("kosmir: d in l^2, log-convex d, alpha series finite imply n_+ = n_- = p");
    v.witness.parts = parts;
    if status == Status::Holds {
        v.holds(format!("n_+ = n_- = {dims} (maximal)"), Some(dims))
    } else {
        v.with_status(status)
    }
}

/// Maximal deficiency indices `n_± = p`.
pub fn kosmir(family: &SequenceFamily) -> Verdict {
    kosmir_on(family, family.p)
}

/// Condition on one coordinate of the second block: divergence of
/// `Σ |α_{k,j}| d_k³`, or the bound `4/d_{k+1}² + α_{k,j}/d_{k+1} ≤ M`.
fn second_block_coordinate(family: &SequenceFamily, j: usize, d: &Expansion, alpha: &Expansion) -> Verdict {
    let mut v = Verdict::new(&format!("coordinate {}: sum |alpha| d^3 = infinity or 4/d_(k+1)^2 + alpha/d_(k+1) <= M", j + 1));
    let n = shifted_len(family);
    let alpha_at = |k: usize| family.coupling(k).expect("coupling within prefix").as_mat()[(j, j)].re;
    v.witness.partial_sums = partial_sums("sum |alpha| d^3", n, |k| alpha_at(k).abs() * gap(family, k).powi(3));

    let dw = d.mul(d).mul(d).mul(&alpha.abs());
    if let Ok(SeriesClass::Diverges) = dw.series() {
        v.witness.tails.push(TailInfo::new("|alpha| d^3", &dw, "diverges"));
        return v.holds("coordinate self-adjoint (divergent series)", Some(0));
    }
    let wouk = (|| -> Result<Expansion> {
        let inv = d.recip()?.shift();
        Ok(inv.mul(&inv).scale(4.0).add(&alpha.mul(&inv)))
    })();
    let wouk = match wouk {
        Ok(w) => w,
        Err(e) => return v.missing(e.to_string()),
    };
    let exact = wouk.remainder().is_none() && family.gaps.prefix_len() == 0;
    let value = |k: usize| {
        if exact {
            wouk.eval(k as f64)
        } else {
            let dk1 = gap(family, k + 1);
            4.0 / (dk1 * dk1) + alpha_at(k) / dk1
        }
    };
    let sup = (1..=n).map(value).fold(f64::NEG_INFINITY, f64::max);
    v.witness.bounds.push(Bound { label: format!("sup over k <= {n}"), value: sup });
    match wouk.upper_tail() {
        Ok(UpperTail::Unbounded) => {
            v.witness.tails.push(TailInfo::new("4/d^2 + alpha/d", &wouk, "unbounded above"));
            v.witness.tails.push(TailInfo::new("|alpha| d^3", &dw, "converges"));
            v.with_status(Status::Fails)
        }
        Ok(tail) => {
            let (label, limit) = match tail {
                UpperTail::Limit(l) => ("tends to a finite limit", l),
                _ => ("tends to -infinity", f64::NEG_INFINITY),
            };
            v.witness.tails.push(TailInfo::new("4/d^2 + alpha/d", &wouk, label));
            v.witness.bounds.push(Bound { label: "tail limit".into(), value: limit });
            v.witness.bounds.push(Bound { label: "M".into(), value: sup.max(limit) });
            v.holds("coordinate self-adjoint (upper bound M)", Some(0))
        }
        Err(e) => v.missing(e.to_string()),
    }
}

/// Mixed indices `n_± = p1` for the split `p = p1 + p2` of the coupling matrices.
pub fn var_indices(family: &SequenceFamily, p1: usize) -> Result<Verdict> {
    let p = family.p;
    if p1 == 0 || p1 > p {
        return Err(Error::SplitInvalid(format!("need 1 <= p1 <= p = {p}, got p1 = {p1}")));
    }
    if p1 == p {
        let mut v = kosmir(family);
        v.claim = format!("var_indices with empty second block: {}", v.claim);
        return Ok(v);
    }
    let mut v = Verdict::new("var_indices: kosmir on the 11-block plus self-adjoint 22-coordinates imply n_+ = n_- = p1");
    let mut parts = vec![ell2(family), nonincreasing(family), log_convex(family), kosmir_on(family, p1)];

    let d = gap_expansion(family);
    let alphas = coupling_expansions(family);
    let diagonal_tail = matches!(
        family.couplings,
        CouplingFamily::Zero
            | CouplingFamily::SingleDelta { .. }
            | CouplingFamily::DiagonalAffine { .. }
            | CouplingFamily::DiagonalPowerSum { .. }
    );
    let mut off = Verdict::new("||Lambda^12|| = O(d_k), ||tilde Lambda^22|| = O(d_k)");
    off = if diagonal_tail {
        off.with_status(Status::Holds)
    } else {
        off.missing("tail rule for the off-diagonal coupling blocks")
    };
    parts.push(off);
    match (d, alphas) {
        (Some(d), Some(alphas)) => {
            for (j, alpha) in alphas.iter().enumerate().skip(p1) {
                parts.push(second_block_coordinate(family, j, &d, alpha));
            }
        }
        _ => parts.push(Verdict::new("second block coordinates").missing("tail rules for d_k and Lambda_k")),
    }
    let status = combine(parts.iter().map(|p| p.status));
    v.witness.parts = parts;
    Ok(if status == Status::Holds {
        v.holds(format!("n_+ = n_- = {p1}"), Some(p1))
    } else {
        v.with_status(status)
    })
}

/// Necessary condition for discrete spectrum: `d_k → 0`.
pub fn discreteness_necessary(family: &SequenceFamily) -> Verdict {
    let mut v = Verdict::new("discreteness requires d_k -> 0");
    let Some(d) = gap_expansion(family) else {
        let last = family.gaps.prefix_len();
        if last > 0 {
            v.witness.bounds.push(Bound { label: format!("d_{last}"), value: gap(family, last) });
        }
        return v.missing("tail rule for d_k");
    };
    match d.tends_to_zero() {
        Ok(true) => {
            v.witness.tails.push(TailInfo::new("d_k", &d, "tends to 0"));
            v.holds("d_k -> 0 (necessary condition met)", None)
        }
        Ok(false) => {
            v.witness.tails.push(TailInfo::new("d_k", &d, "does not tend to 0"));
            v.conclusion = Some("spectrum is not discrete".into());
            v.with_status(Status::Fails)
        }
        Err(e) => v.missing(e.to_string()),
    }
}

pub fn discreteness_data(data: &InteractionData) -> Verdict {
    let mut v = Verdict::new("discreteness requires d_k -> 0");
    let n = data.intervals();
    v.witness.bounds.push(Bound { label: format!("d_{n}"), value: data.d(n) });
    v.missing("tail of d_k (finite data)")
}

/// `Σ ‖D_k‖` and `sup ‖D_k‖` for `D_k = (Λ_k − Λ̃_k)/(d_k + d_{k+1})`.
fn difference_class(
    label: &str,
    family: &SequenceFamily,
    diff: Option<Vec<Expansion>>,
    prefix: impl Fn(usize) -> f64,
) -> Verdict {
    let mut v = Verdict::new(label);
    let n = shifted_len(family);
    v.witness.partial_sums = partial_sums("sum ||D_k||", n, |k| prefix(k) / (gap(family, k) + gap(family, k + 1)));
    let Some(d) = gap_expansion(family) else {
        return v.missing("tail rule for d_k");
    };
    let Some(diff) = diff else {
        return v.missing("tail rule for Lambda_k");
    };
    let summand = (|| -> Result<Expansion> {
        let mut norm = Expansion::zero();
        for a in &diff {
            norm = norm.max(&a.abs());
        }
        if norm.is_zero() {
            return Ok(norm);
        }
        Ok(norm.mul(&d.add(&d.shift()).recip()?))
    })();
    let summand = match summand {
        Ok(s) => s,
        Err(e) => return v.missing(e.to_string()),
    };
    if let Ok(tail) = summand.upper_tail() {
        let bounded = tail.is_bounded();
        v.witness.bounds.push(Bound { label: "sup ||D_k|| finite".into(), value: if bounded { 1.0 } else { 0.0 } });
    }
    match summand.series() {
        Ok(SeriesClass::Converges) => {
            v.witness.tails.push(TailInfo::new("||D_k||", &summand, "converges"));
            v.with_status(Status::Holds)
        }
        Ok(SeriesClass::Diverges) => {
            v.witness.tails.push(TailInfo::new("||D_k||", &summand, "diverges"));
            v.with_status(Status::Fails)
        }
        Err(e) => v.missing(e.to_string()),
    }
}

/// `Σ ‖Λ_k‖/(d_k + d_{k+1}) < ∞`, under which the absolutely continuous part
/// of `H` matches the Neumann Laplacian's.
pub fn ac_trace_class(family: &SequenceFamily) -> Verdict {
    let v = difference_class(
        "ac trace class: sum ||Lambda_k||/(d_k + d_{k+1}) < infinity",
        family,
        coupling_expansions(family),
        |k| family.coupling(k).map_or(f64::NAN, |l| l.norm()),
    );
    if v.status == Status::Holds {
        v.holds("ac part of H unitarily equivalent to that of the Neumann Laplacian", None)
    } else {
        v
    }
}

/// Trace-class hypothesis for the resolvent difference of `B_{X,Λ}` and
/// `B_{X,Λ̃}` on the same partition.
pub fn resolvent_comparability(family: &SequenceFamily, other: &CouplingFamily) -> Result<Verdict> {
    other.validate(family.p)?;
    let tilde = SequenceFamily { p: family.p, gaps: family.gaps.clone(), couplings: other.clone() };
    let diff = match (coupling_expansions(family), coupling_expansions(&tilde)) {
        (Some(a), Some(b)) => Some(a.iter().zip(&b).map(|(x, y)| x.sub(y)).collect()),
        _ => None,
    };
    let v = difference_class(
        "resolvent difference trace class: sum ||Lambda_k - tilde Lambda_k||/(d_k + d_{k+1}) < infinity",
        family,
        diff,
        |k| match (family.coupling(k), tilde.coupling(k)) {
            (Some(a), Some(b)) => (a.as_mat() - b.as_mat()).spectral_norm(),
            _ => f64::NAN,
        },
    );
    Ok(if v.status == Status::Holds {
        v.holds("resolvent difference is trace class", None)
    } else {
        v
    })
}

/// Result of the index symmetrization rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Symmetrized {
    pub n_plus: Option<usize>,
    pub n_minus: Option<usize>,
    pub verdict: Verdict,
}

/// If either index equals `p`, both do.
pub fn max_defect_symmetrize(n_plus: Option<usize>, n_minus: Option<usize>, p: usize) -> Symmetrized {
    let v = Verdict::new("max defect: n_+ = p or n_- = p implies n_+ = n_- = p");
    if n_plus == Some(p) || n_minus == Some(p) {
        return Symmetrized {
            n_plus: Some(p),
            n_minus: Some(p),
            verdict: v.holds(format!("n_+ = n_- = {p}"), Some(p)),
        };
    }
    let status = if n_plus.is_some() && n_minus.is_some() { Status::Fails } else { Status::Inconclusive };
    Symmetrized { n_plus, n_minus, verdict: v.with_status(status) }
}

/// The scalars `c_k` with `C_k = c_k I_p`, and the sums controlled by them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CSequence {
    pub c: Vec<f64>,
    pub sum_norm_sq: f64,
    pub sum_cac: f64,
    /// `max_k ‖C_{k+1}‖/(d_{k+1} + d_{k+2})`.
    pub c_hat: f64,
}

impl CSequence {
    pub fn matrices(&self, p: usize) -> Vec<crate::linalg::CMat> {
        self.c.iter().map(|&v| crate::linalg::CMat::scalar(p, v)).collect()
    }
}

/// `C_1 = B_1⁻¹`, `C_2 = I`, `C_{k+1} = −B_k⁻¹ B_{k−1} C_{k−1}` for the blocks of `B₂`.
pub fn c_sequence(data: &InteractionData, k_max: usize) -> Result<CSequence> {
    if k_max < 2 {
        return Err(Error::BadParameters(format!("need K >= 2, got {k_max}")));
    }
    let b = build_b2(data, k_max)?;
    let mut c = vec![1.0 / b.b(1), 1.0];
    for k in 2..k_max {
        let next = -(b.b(k - 1) / b.b(k)) * c[k - 2];
        c.push(next);
    }
    let sum_norm_sq = c.iter().map(|v| v * v).sum();
    let sum_cac = c.iter().enumerate().map(|(i, v)| v * v * b.a(i + 1).norm()).sum();
    let c_hat = (1..k_max).map(|k| c[k].abs() / (data.d(k + 1) + data.d(k + 2))).fold(0.0, f64::max);
    Ok(CSequence { c, sum_norm_sq, sum_cac, c_hat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate, GapFamily, PowerLaw, PowerTerm};

    fn fam(p: usize, gaps: GapFamily, couplings: CouplingFamily) -> SequenceFamily {
        SequenceFamily::new(p, gaps, couplings).unwrap()
    }

    fn power(gamma: f64) -> GapFamily {
        GapFamily::PowerLaw { c: 1.0, gamma }
    }

    fn affine(a: &[f64], b: &[f64], rho: &[f64]) -> CouplingFamily {
        CouplingFamily::DiagonalAffine { a: a.to_vec(), b: b.to_vec(), rho: rho.to_vec() }
    }

    fn power_sum(terms: &[&[(f64, f64)]]) -> CouplingFamily {
        CouplingFamily::DiagonalPowerSum {
            terms: terms
                .iter()
                .map(|ts| ts.iter().map(|&(coeff, exponent)| PowerTerm { coeff, exponent }).collect())
                .collect(),
        }
    }

    #[test]
    fn carleman_examples() {
        let v = carleman(&fam(1, power(0.4), CouplingFamily::Zero));
        assert_eq!((v.status, v.deficiency), (Status::Holds, Some(0)));
        let v = carleman(&fam(1, power(1.0), CouplingFamily::Zero));
        assert_eq!(v.status, Status::Fails);
        assert!(v.conclusion.is_none());
        let data = InteractionData::new(vec![0.0, 1.0, 2.0, 3.0], vec![crate::linalg::CMat::zeros(1, 1); 2], 1).unwrap();
        let v = carleman_data(&data);
        assert_eq!(v.status, Status::Inconclusive);
        assert_eq!(v.witness.partial_sums.last().unwrap().value, 3.0);
    }

    #[test]
    fn kosmir_examples() {
        let v = kosmir(&fam(1, power(1.0), affine(&[-2.0], &[-1.0], &[0.0])));
        assert_eq!((v.status, v.deficiency), (Status::Holds, Some(1)));
        let alpha = &v.witness.parts[2];
        assert!(alpha.witness.partial_sums.last().unwrap().value.abs() < 1e-9);

        let v = kosmir(&fam(3, power(1.0), affine(&[-2.0; 3], &[-1.0; 3], &[1.0; 3])));
        assert_eq!((v.status, v.deficiency), (Status::Holds, Some(3)));

        let v = kosmir(&fam(1, power(1.0), CouplingFamily::Zero));
        assert_eq!(v.status, Status::Fails);
        let sums = &v.witness.parts[2].witness.partial_sums;
        let (a, b) = (sums[1].value, sums[2].value);
        assert!((b / a - 10.0).abs() < 0.2, "linear growth: {a} {b}");
    }

    #[test]
    fn kosmir_needs_summable_gaps() {
        let v = kosmir(&fam(1, power(0.5), affine(&[-2.0], &[-1.0], &[0.0])));
        assert_eq!(v.status, Status::Fails);
        assert_eq!(v.witness.parts[0].status, Status::Fails);
    }

    #[test]
    fn kosmir_explicit_prefix_is_inconclusive_or_reports_violation() {
        let gaps = GapFamily::Explicit { values: vec![1.0, 0.5, 0.4, 0.1], tail: None };
        let v = kosmir(&fam(1, gaps, CouplingFamily::Zero));
        assert_eq!(v.witness.parts[1].witness.first_violation, Some(2));
        assert_eq!(v.status, Status::Fails);

        let gaps = GapFamily::Explicit { values: vec![1.0, 0.5], tail: Some(PowerLaw { c: 1.0, gamma: 1.0 }) };
        let v = kosmir(&fam(1, gaps, affine(&[-2.0], &[-1.0], &[0.0])));
        assert_eq!(v.status, Status::Holds);
    }

    #[test]
    fn var_indices_paper_example() {
        let v = var_indices(&fam(2, power(1.0), affine(&[-2.0, -4.0], &[-1.0, -4.0], &[0.0, 0.0])), 1).unwrap();
        assert_eq!((v.status, v.deficiency), (Status::Holds, Some(1)), "{v:#?}");
        let coord = v.witness.parts.last().unwrap();
        let m = coord.witness.bounds.iter().find(|b| b.label == "M").unwrap().value;
        assert_eq!(m, 0.0);
    }

    #[test]
    fn var_indices_with_perturbations() {
        let v = var_indices(&fam(3, power(1.0), affine(&[-2.0, -4.0, -4.0], &[-1.0, -4.0, -4.0], &[0.5, 1.0, -1.0])), 1).unwrap();
        assert_eq!((v.status, v.deficiency), (Status::Holds, Some(1)));
    }

    #[test]
    fn var_indices_divergent_series_branch() {
        let c = power_sum(&[&[(-2.0, 1.0), (-1.0, 0.0)], &[(-1.0, 3.0)]]);
        let v = var_indices(&fam(2, power(1.0), c), 1).unwrap();
        assert_eq!(v.status, Status::Holds);
        let coord = v.witness.parts.last().unwrap();
        assert_eq!(coord.witness.tails[0].classification, "diverges");
    }

    #[test]
    fn var_indices_degenerate_and_invalid_split() {
        let f = fam(2, power(1.0), affine(&[-2.0, -2.0], &[-1.0, -1.0], &[0.0, 0.0]));
        assert_eq!(var_indices(&f, 2).unwrap().deficiency, kosmir(&f).deficiency);
        assert!(matches!(var_indices(&f, 0), Err(Error::SplitInvalid(_))));
        assert!(matches!(var_indices(&f, 3), Err(Error::SplitInvalid(_))));
    }

    #[test]
    fn var_indices_fails_for_unbounded_second_block() {
        // α = −k: 4(k+1)² − k(k+1) grows, and Σ k·k⁻³ converges
        let v = var_indices(&fam(2, power(1.0), power_sum(&[&[(-2.0, 1.0), (-1.0, 0.0)], &[(-1.0, 1.0)]])), 1).unwrap();
        assert_eq!(v.status, Status::Fails);
    }

    #[test]
    fn discreteness_examples() {
        assert_eq!(discreteness_necessary(&fam(1, power(0.3), CouplingFamily::Zero)).status, Status::Holds);
        assert_eq!(discreteness_necessary(&fam(1, GapFamily::Constant { c: 1.0 }, CouplingFamily::Zero)).status, Status::Fails);
        let v = discreteness_necessary(&fam(1, GapFamily::Explicit { values: vec![1.0, 0.5, 0.25], tail: None }, CouplingFamily::Zero));
        assert_eq!(v.status, Status::Inconclusive);
        assert_eq!(v.witness.bounds[0].value, 0.25);
    }

    #[test]
    fn ac_trace_class_examples() {
        assert_eq!(ac_trace_class(&fam(1, power(1.0), CouplingFamily::Zero)).status, Status::Holds);
        let v = ac_trace_class(&fam(1, GapFamily::Constant { c: 1.0 }, power_sum(&[&[(1.0, -2.0)]])));
        assert_eq!(v.status, Status::Holds);
        let v = ac_trace_class(&fam(1, power(1.0), power_sum(&[&[(1.0, 0.0)]])));
        assert_eq!(v.status, Status::Fails);
    }

    #[test]
    fn resolvent_examples() {
        let f = fam(1, power(1.0), affine(&[-2.0], &[-1.0], &[0.0]));
        assert_eq!(resolvent_comparability(&f, &f.couplings).unwrap().status, Status::Holds);
        let f = fam(1, GapFamily::Constant { c: 1.0 }, power_sum(&[&[(1.0, -2.0)]]));
        assert_eq!(resolvent_comparability(&f, &CouplingFamily::Zero).unwrap().status, Status::Holds);
        let f = fam(1, power(1.0), power_sum(&[&[(1.0, 0.0)]]));
        assert_eq!(resolvent_comparability(&f, &CouplingFamily::Zero).unwrap().status, Status::Fails);
    }

    #[test]
    fn symmetrize_rule() {
        let s = max_defect_symmetrize(Some(2), None, 2);
        assert_eq!((s.n_plus, s.n_minus, s.verdict.status), (Some(2), Some(2), Status::Holds));
        let s = max_defect_symmetrize(Some(0), Some(0), 2);
        assert_eq!((s.n_plus, s.n_minus, s.verdict.status), (Some(0), Some(0), Status::Fails));
        let s = max_defect_symmetrize(Some(1), None, 2);
        assert_eq!((s.n_plus, s.n_minus, s.verdict.status), (Some(1), None, Status::Inconclusive));
    }

    #[test]
    fn c_sequence_constant_gaps() {
        let data = generate(&fam(1, GapFamily::Constant { c: 1.0 }, CouplingFamily::Zero), 12).unwrap();
        let s = c_sequence(&data, 10).unwrap();
        assert!((s.c[0] + 2.0).abs() < 1e-14);
        for k in 2..10 {
            assert!((s.c[k] + s.c[k - 2]).abs() < 1e-15);
        }
        assert!((s.sum_norm_sq - (5.0 * 4.0 + 5.0)).abs() < 1e-12);
        let base = c_sequence(&data, 2).unwrap().matrices(1);
        assert_eq!(base[1], crate::linalg::CMat::identity(1));
    }

    #[test]
    fn c_sequence_matches_product_formula() {
        let data = generate(&fam(1, power(1.0), CouplingFamily::Zero), 205).unwrap();
        let s = c_sequence(&data, 201).unwrap();
        for k in 2..200 {
            // C_{k+1} from C_2 (k odd) or C_1 (k even) by the telescoped ratio
            let (mut ratio, mut i) = (1.0, k);
            while i >= 2 {
                ratio *= -data.r(i + 1) * data.d(i + 1) / (data.r(i - 1) * data.d(i));
                i -= 2;
            }
            let start = if k % 2 == 1 { 1.0 } else { s.c[0] };
            assert!((s.c[k] - ratio * start).abs() <= 1e-12 * s.c[k].abs());
        }
        let half = c_sequence(&data, 101).unwrap();
        assert!(s.c_hat.is_finite() && s.c_hat <= 1.05 * half.c_hat.max(1e-300) + 1e-12);
    }

    #[test]
    fn partial_sums_monotone_for_positive_terms() {
        let v = carleman(&fam(1, power(0.2), CouplingFamily::Zero));
        let sums: Vec<f64> = v.witness.partial_sums.iter().map(|p| p.value).collect();
        assert!(sums.windows(2).all(|w| w[0] <= w[1]));
    }
}
