//! Operator ↔ matrix comparisons on concrete families.
//!
//! Every report is truncation evidence. The `evidence_level` field says so
//! explicitly; nothing here certifies a statement about the infinite
//! operators.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{self, Status, Verdict};
use crate::error::{Error, Result};
use crate::jacobi::{build_b2, build_b2_with, BlockJacobi, Origin};
use crate::model::{generate, single_delta_partition, CouplingFamily, HermitianMatrix, InteractionData, SequenceFamily};
use crate::spectral::{
    assemble_fem, count_below, deficiency_estimate, eigenvalues_by_bisection, inertia_with_retry, kappa_minus_h,
    BlockTridiagonal, Boundary, DeficiencyEstimate, InertiaTriple, KappaTrace,
};
use crate::weyl::{uniform_decay_probe, DecayProbe};

pub const EVIDENCE_LEVEL: &str = "stabilized-truncation evidence, not a proof";

/// Shift used to separate nonnegativity from positive definiteness.
pub const DELTA0: f64 = 1e-8;

/// Default mesh schedule for the operator side.
pub const DEFAULT_MESH: [f64; 3] = [0.05, 0.02, 0.01];

/// Something that produces interaction data on `[0, x_n]` for a requested
/// number of intervals `n`.
pub trait TruncationSource: Sync {
    fn p(&self) -> usize;
    fn data(&self, n: usize) -> Result<InteractionData>;
    fn describe(&self) -> String;
}

impl TruncationSource for InteractionData {
    fn p(&self) -> usize {
        InteractionData::p(self)
    }

    fn data(&self, n: usize) -> Result<InteractionData> {
        self.prefix(n)
    }

    fn describe(&self) -> String {
        format!("explicit data, p = {}, {} intervals", InteractionData::p(self), self.intervals())
    }
}

impl TruncationSource for SequenceFamily {
    fn p(&self) -> usize {
        self.p
    }

    fn data(&self, n: usize) -> Result<InteractionData> {
        generate(self, n)
    }

    fn describe(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| "sequence family".into())
    }
}

/// One coupling at `x_1 = at` on the fixed interval `[0, length]`; `n` sets
/// how finely `[at, length]` is partitioned.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleDelta {
    pub at: f64,
    pub length: f64,
    pub strength: HermitianMatrix,
}

impl TruncationSource for SingleDelta {
    fn p(&self) -> usize {
        self.strength.dim()
    }

    fn data(&self, n: usize) -> Result<InteractionData> {
        single_delta_partition(self.at, self.length, n, self.strength.clone())
    }

    fn describe(&self) -> String {
        format!("single coupling at x = {} on [0, {}], p = {}", self.at, self.length, self.strength.dim())
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::BadParameters(format!("thread pool: {e}")))
}

fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::BadParameters("empty N list".into()));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadParameters("N list must be strictly increasing".into()));
    }
    if levels[0] < 2 {
        return Err(Error::BadParameters("every N must be at least 2".into()));
    }
    Ok(())
}

/// `κ₋` of one matched pair at one truncation level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaPair {
    pub kappa_b: usize,
    /// `None` when the mesh schedule did not stabilize.
    pub kappa_h: Option<usize>,
    pub trace: KappaTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaRow {
    pub n: usize,
    /// Couplings `Λ_1 … Λ_{n−1}` shared by both sides.
    pub couplings_used: usize,
    pub length: f64,
    /// `B₂` with the Neumann-origin first block against `H` with `f'(0) = 0`.
    pub neumann: KappaPair,
    /// The unmodified `B₂` against `H` with `f(0) = 0`.
    pub dirichlet: KappaPair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub task: String,
    pub evidence_level: String,
    pub family: String,
    pub mesh: Vec<f64>,
    pub rows: Vec<KappaRow>,
    /// Both columns stabilized over the last two levels and equal.
    pub agreement: bool,
    pub dirichlet_agreement: bool,
    pub notes: Vec<String>,
}

impl CorrespondenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,couplings,length,kappa_B,kappa_H,kappa_B_dirichlet,kappa_H_dirichlet\n");
        let opt = |v: Option<usize>| v.map_or_else(String::new, |c| c.to_string());
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.16e},{},{},{},{}\n",
                r.n,
                r.couplings_used,
                r.length,
                r.neumann.kappa_b,
                opt(r.neumann.kappa_h),
                r.dirichlet.kappa_b,
                opt(r.dirichlet.kappa_h)
            ));
        }
        out
    }
}

fn pair_agrees(rows: &[KappaRow], pick: impl Fn(&KappaRow) -> &KappaPair) -> bool {
    match rows {
        [.., a, b] => {
            let (a, b) = (pick(a), pick(b));
            a.kappa_b == b.kappa_b && a.kappa_h == b.kappa_h && b.kappa_h == Some(b.kappa_b)
        }
        _ => false,
    }
}

/// Compares `κ₋` of matched `B₂` truncations with `κ₋` of the finite-element
/// Hamiltonian on `[0, x_N]` (Dirichlet at `x_N`) for each `N`.
pub fn verify_kappa(source: &dyn TruncationSource, levels: &[usize], mesh: &[f64], workers: usize) -> Result<CorrespondenceReport> {
    check_levels(levels)?;
    if mesh.is_empty() {
        return Err(Error::BadParameters("empty mesh schedule".into()));
    }
    let rows = pool(workers)?.install(|| {
        levels
            .par_iter()
            .map(|&n| {
                let data = source.data(n)?;
                if !data.d_star().is_finite() {
                    return Err(Error::BadParameters("unbounded gaps".into()));
                }
                let pair = |origin: Origin, left: Boundary| -> Result<KappaPair> {
                    let b = build_b2_with(&data, n - 1, origin)?;
                    let kappa_b = count_below(&BlockTridiagonal::from_jacobi(&b), 0.0)?;
                    let trace = kappa_minus_h(&data, n, left, Boundary::Dirichlet, mesh)?;
                    Ok(KappaPair { kappa_b, kappa_h: trace.stabilized, trace })
                };
                Ok(KappaRow {
                    n,
                    couplings_used: n - 1,
                    length: data.length(),
                    neumann: pair(Origin::Neumann, Boundary::Neumann)?,
                    dirichlet: pair(Origin::Dirichlet, Boundary::Dirichlet)?,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let agreement = pair_agrees(&rows, |r| &r.neumann);
    let dirichlet_agreement = pair_agrees(&rows, |r| &r.dirichlet);
    let mut notes = Vec::new();
    for r in &rows {
        if let Err(e) = r.neumann.trace.count() {
            notes.push(format!("N = {}: {e}", r.n));
        }
    }
    if rows.len() < 2 {
        notes.push("a single level cannot show stabilization".into());
    }
    Ok(CorrespondenceReport {
        task: "kappa".into(),
        evidence_level: EVIDENCE_LEVEL.into(),
        family: source.describe(),
        mesh: mesh.to_vec(),
        rows,
        agreement,
        dirichlet_agreement,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonnegativityRow {
    pub n: usize,
    pub b_at_zero: InertiaTriple,
    pub b_nonnegative: bool,
    pub b_positive_definite: bool,
    pub h_nonnegative: bool,
    pub h_positive_definite: bool,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonnegativityReport {
    pub evidence_level: String,
    pub family: String,
    pub delta0: f64,
    pub rows: Vec<NonnegativityRow>,
    /// Nonnegativity flags equal on every level.
    pub agreement: bool,
}

/// `B ⪰ 0` against `H ⪰ 0` on matched truncations, with `±δ₀` probes for
/// the definite case. The operator side uses the finest mesh.
pub fn verify_nonnegativity(source: &dyn TruncationSource, levels: &[usize], mesh: &[f64], workers: usize) -> Result<NonnegativityReport> {
    check_levels(levels)?;
    let h = mesh.iter().copied().fold(f64::INFINITY, f64::min);
    if !h.is_finite() {
        return Err(Error::BadParameters("empty mesh schedule".into()));
    }
    let rows = pool(workers)?.install(|| {
        levels
            .par_iter()
            .map(|&n| {
                let data = source.data(n)?;
                let b = BlockTridiagonal::from_jacobi(&build_b2_with(&data, n - 1, Origin::Neumann)?);
                let (b_at_zero, _) = inertia_with_retry(&b, 0.0)?;
                let fem = assemble_fem(&data, n, Boundary::Neumann, Boundary::Dirichlet, h)?;
                Ok(NonnegativityRow {
                    n,
                    b_at_zero,
                    b_nonnegative: count_below(&b, -DELTA0)? == 0,
                    b_positive_definite: count_below(&b, DELTA0)? == 0,
                    h_nonnegative: fem.count_below(-DELTA0)? == 0,
                    h_positive_definite: fem.count_below(DELTA0)? == 0,
                    h,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let agreement = rows.iter().all(|r| r.b_nonnegative == r.h_nonnegative);
    Ok(NonnegativityReport { evidence_level: EVIDENCE_LEVEL.into(), family: source.describe(), delta0: DELTA0, rows, agreement })
}

/// Gershgorin bounds for the spectrum of a block Jacobi matrix.
pub fn gershgorin(b: &BlockJacobi) -> (f64, f64) {
    let n = b.n();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 1..=n {
        let a = b.a(k).as_mat();
        let left = if k > 1 { b.b(k - 1).abs() } else { 0.0 };
        let right = if k < n { b.b(k).abs() } else { 0.0 };
        for i in 0..a.rows() {
            let off: f64 = (0..a.cols()).filter(|&j| j != i).map(|j| a[(i, j)].norm()).sum();
            lo = lo.min(a[(i, i)].re - off - left - right);
            hi = hi.max(a[(i, i)].re + off + left + right);
        }
    }
    (lo, hi)
}

/// Smallest eigenvalue of a block Jacobi matrix by bisection.
pub fn lower_edge(b: &BlockJacobi) -> Result<f64> {
    let (lo, hi) = gershgorin(b);
    let t = BlockTridiagonal::from_jacobi(b);
    let tol = 1e-10 * (1.0 + lo.abs().max(hi.abs()));
    let eig = eigenvalues_by_bisection(&t, lo - 1.0, hi + 1.0, 1, Some(tol))?;
    eig.first().copied().ok_or(Error::Singular)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeTrend {
    Nonnegative,
    Bounded,
    Diverging,
    Insufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiboundednessReport {
    pub evidence_level: String,
    pub family: String,
    pub levels: Vec<usize>,
    pub lower_edges: Vec<f64>,
    pub trend: EdgeTrend,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_probe: Option<DecayProbe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_probe_error: Option<String>,
}

fn classify_edges(edges: &[f64]) -> EdgeTrend {
    if edges.iter().all(|&e| e >= -DELTA0) {
        return EdgeTrend::Nonnegative;
    }
    let [.., a, b, c] = edges else {
        return EdgeTrend::Insufficient;
    };
    let (first, second) = (a - b, b - c);
    if second > 1e-9 * (1.0 + c.abs()) && second >= first {
        EdgeTrend::Diverging
    } else {
        EdgeTrend::Bounded
    }
}

/// Lower spectral edge of `B₂` truncations against `N`, with the decay
/// probe of the regularized Weyl functions on the largest level.
pub fn verify_semiboundedness_probe(source: &dyn TruncationSource, levels: &[usize], probe_level: f64, workers: usize) -> Result<SemiboundednessReport> {
    check_levels(levels)?;
    let lower_edges = pool(workers)?.install(|| {
        levels
            .par_iter()
            .map(|&n| lower_edge(&build_b2_with(&source.data(n)?, n - 1, Origin::Neumann)?))
            .collect::<Result<Vec<_>>>()
    })?;
    let last = source.data(*levels.last().expect("nonempty"))?;
    let (decay_probe, decay_probe_error) = match uniform_decay_probe(&last, probe_level) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SemiboundednessReport {
        evidence_level: EVIDENCE_LEVEL.into(),
        family: source.describe(),
        levels: levels.to_vec(),
        trend: classify_edges(&lower_edges),
        lower_edges,
        decay_probe,
        decay_probe_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicesReport {
    pub evidence_level: String,
    pub family: String,
    pub verdicts: Vec<Verdict>,
    /// Index implied by the first criterion whose hypotheses hold.
    pub criteria_index: Option<usize>,
    pub symmetrized: criteria::Symmetrized,
    pub estimate: DeficiencyEstimate,
    pub estimator_index: Option<usize>,
    pub agreement: bool,
    pub flagged: bool,
}

/// Criteria verdicts against the growth-exponent estimator at `z = i`.
pub fn verify_indices(family: &SequenceFamily, split: Option<usize>, horizon: usize) -> Result<IndicesReport> {
    let mut verdicts = vec![criteria::carleman(family), criteria::kosmir(family)];
    if let Some(p1) = split {
        verdicts.push(criteria::var_indices(family, p1)?);
    }
    let criteria_index = verdicts.iter().find(|v| v.status == Status::Holds).and_then(|v| v.deficiency);
    let symmetrized = criteria::max_defect_symmetrize(criteria_index, criteria_index, family.p);
    let data = generate(family, horizon + 2)?;
    let estimate = deficiency_estimate(&build_b2(&data, horizon + 1)?, Complex64::i(), horizon)?;
    let estimator_index = estimate.count().ok();
    let agreement = criteria_index.is_some() && criteria_index == estimator_index;
    let flagged = matches!((criteria_index, estimator_index), (Some(a), Some(b)) if a != b);
    Ok(IndicesReport {
        evidence_level: EVIDENCE_LEVEL.into(),
        family: family.describe(),
        verdicts,
        criteria_index,
        symmetrized,
        estimate,
        estimator_index,
        agreement,
        flagged,
    })
}

/// Trace-class hypothesis for the resolvent difference of two coupling
/// families on the same partition.
pub fn resolvent_comparability_hypothesis(family: &SequenceFamily, tilde: &CouplingFamily) -> Result<Verdict> {
    criteria::resolvent_comparability(family, tilde)
}

/// Gap growth of the lowest eigenvalues of `B₂` truncations, paired with
/// the `d_k → 0` verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretenessDiagnostic {
    pub evidence_level: String,
    pub verdict: Verdict,
    pub levels: Vec<usize>,
    /// Lowest eigenvalues per level.
    pub eigenvalues: Vec<Vec<f64>>,
}

pub fn discreteness_diagnostic(family: &SequenceFamily, levels: &[usize], count: usize, workers: usize) -> Result<DiscretenessDiagnostic> {
    check_levels(levels)?;
    let eigenvalues = pool(workers)?.install(|| {
        levels
            .par_iter()
            .map(|&n| {
                let b = build_b2_with(&generate(family, n)?, n - 1, Origin::Neumann)?;
                let (lo, hi) = gershgorin(&b);
                let tol = 1e-10 * (1.0 + lo.abs().max(hi.abs()));
                eigenvalues_by_bisection(&BlockTridiagonal::from_jacobi(&b), lo - 1.0, hi + 1.0, count, Some(tol))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(DiscretenessDiagnostic {
        evidence_level: EVIDENCE_LEVEL.into(),
        verdict: criteria::discreteness_necessary(family),
        levels: levels.to_vec(),
        eigenvalues,
    })
}
