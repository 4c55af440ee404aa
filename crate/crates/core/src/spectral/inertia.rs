use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi::BlockJacobi;
use crate::linalg::{hermitian_eigenvalues, CMat};

/// Relative size below which an eigenvalue of a pivot block counts as zero.
pub const PIVOT_TOL: f64 = 1e-13;

/// Maximum number of shift perturbations after a pivot breakdown.
pub const MAX_RETRIES: usize = 3;

/// Hermitian block-tridiagonal matrix with general off-diagonal blocks.
///
/// `upper[k]` sits at block position `(k, k+1)`; the block below the
/// diagonal is its adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagonal {
    p: usize,
    diag: Vec<CMat>,
    upper: Vec<CMat>,
}

impl BlockTridiagonal {
    pub fn new(diag: Vec<CMat>, upper: Vec<CMat>) -> Result<Self> {
        let p = diag.first().map(CMat::rows).unwrap_or(0);
        if p == 0 {
            return Err(Error::BadParameters("need at least one diagonal block".into()));
        }
        if upper.len() + 1 != diag.len() {
            return Err(Error::LengthMismatch(format!(
                "{} diagonal blocks need {} off-diagonal blocks, got {}",
                diag.len(),
                diag.len() - 1,
                upper.len()
            )));
        }
        if diag.iter().chain(&upper).any(|b| b.rows() != p || b.cols() != p) {
            return Err(Error::LengthMismatch(format!("all blocks must be {p}×{p}")));
        }
        if let Some(k) = diag.iter().position(|a| !a.is_hermitian_exact()) {
            return Err(Error::NonHermitian(k + 1));
        }
        Ok(Self { p, diag, upper })
    }

    pub fn from_jacobi(b: &BlockJacobi) -> Self {
        let p = b.p();
        Self {
            p,
            diag: b.diag_blocks().iter().map(|a| a.as_mat().clone()).collect(),
            upper: b.offdiag_scalars().iter().map(|&s| CMat::scalar(p, s)).collect(),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn order(&self) -> usize {
        self.p * self.n()
    }

    pub fn diag(&self) -> &[CMat] {
        &self.diag
    }

    pub fn upper(&self) -> &[CMat] {
        &self.upper
    }

    /// `self − σ·other`, block by block.
    pub fn minus_scaled(&self, sigma: f64, other: &BlockTridiagonal) -> Result<Self> {
        if other.p != self.p || other.n() != self.n() {
            return Err(Error::LengthMismatch("block structures differ".into()));
        }
        let diag = self.diag.iter().zip(&other.diag).map(|(a, m)| (a - &m.scale(sigma)).hermitian_part()).collect();
        let upper = self.upper.iter().zip(&other.upper).map(|(a, m)| a - &m.scale(sigma)).collect();
        Ok(Self { p: self.p, diag, upper })
    }

    pub fn to_dense(&self) -> CMat {
        let p = self.p;
        let mut m = CMat::zeros(self.order(), self.order());
        for (k, a) in self.diag.iter().enumerate() {
            m.set_block(k * p, k * p, a);
        }
        for (k, b) in self.upper.iter().enumerate() {
            m.set_block(k * p, (k + 1) * p, b);
            m.set_block((k + 1) * p, k * p, &b.adjoint());
        }
        m
    }

    fn scale(&self) -> f64 {
        self.diag.iter().chain(&self.upper).map(CMat::max_abs).fold(0.0, f64::max)
    }
}

/// Counts of negative, zero and positive eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct InertiaTriple {
    pub n_minus: usize,
    pub n_zero: usize,
    pub n_plus: usize,
}

impl InertiaTriple {
    pub fn total(&self) -> usize {
        self.n_minus + self.n_zero + self.n_plus
    }
}

/// Inertia of `B − shift·I` by block LDL*.
///
/// A singular pivot block before the last one raises `PivotBreakdown(k)`;
/// zero eigenvalues of the last pivot are counted in `n_zero`.
pub fn inertia(b: &BlockTridiagonal, shift: f64) -> Result<InertiaTriple> {
    let p = b.p;
    let tol = PIVOT_TOL * (b.scale() + shift.abs()).max(f64::MIN_POSITIVE);
    let mut out = InertiaTriple::default();
    let mut d = b.diag[0].clone();
    for i in 0..p {
        d[(i, i)] -= shift;
    }
    for k in 0..b.n() {
        let last = k + 1 == b.n();
        let eig = hermitian_eigenvalues(&d);
        for &e in &eig {
            if e.abs() <= tol {
                if !last {
                    return Err(Error::PivotBreakdown(k + 1));
                }
                out.n_zero += 1;
            } else if e < 0.0 {
                out.n_minus += 1;
            } else {
                out.n_plus += 1;
            }
        }
        if last {
            break;
        }
        let bk = &b.upper[k];
        let inv = d.inverse().map_err(|_| Error::PivotBreakdown(k + 1))?;
        let schur = &(&bk.adjoint() * &inv) * bk;
        let mut next = &b.diag[k + 1] - &schur;
        for i in 0..p {
            next[(i, i)] -= shift;
        }
        d = next.hermitian_part();
    }
    Ok(out)
}

/// Inertia at `shift`, moving the shift by `ε = 1e−10·(1+|shift|)` up to
/// three times (alternating sides) after a pivot breakdown. Returns the
/// triple and the shift actually used.
pub fn inertia_with_retry(b: &BlockTridiagonal, shift: f64) -> Result<(InertiaTriple, f64)> {
    let eps = 1e-10 * (1.0 + shift.abs());
    let mut current = shift;
    let mut last_err = None;
    for attempt in 0..=MAX_RETRIES {
        match inertia(b, current) {
            Ok(t) => return Ok((t, current)),
            Err(e @ Error::PivotBreakdown(_)) => {
                last_err = Some(e);
                let step = (attempt / 2 + 1) as f64 * eps;
                current = if attempt % 2 == 0 { shift + step } else { shift - step };
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Number of eigenvalues strictly below `shift`.
pub fn count_below(b: &BlockTridiagonal, shift: f64) -> Result<usize> {
    inertia_with_retry(b, shift).map(|(t, _)| t.n_minus)
}

/// Default bisection tolerance for an interval ending at `b`.
pub fn default_tolerance(b: f64) -> f64 {
    1e-10 * (1.0 + b.abs())
}

/// Locates up to `m` eigenvalues in `[a, b)` of an operator whose
/// eigenvalue-counting function is `count`, each to absolute tolerance `tol`.
pub fn bisect_with<F>(count: F, a: f64, b: f64, m: usize, tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<usize>,
{
    if !(a < b) {
        return Err(Error::BadParameters(format!("need a < b, got [{a}, {b}]")));
    }
    if m == 0 || !(tol > 0.0) {
        return Err(Error::BadParameters("need m ≥ 1 and a positive tolerance".into()));
    }
    let (ca, cb) = (count(a)?, count(b)?);
    let mut out = Vec::new();
    for j in ca..cb.min(ca + m) {
        let (mut lo, mut hi) = (a, b);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count(mid)? > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

/// Eigenvalues of `b` in `[lo, hi)` by bisection on the negative count.
/// `tol` defaults to `1e−10·(1+|hi|)`.
pub fn eigenvalues_by_bisection(b: &BlockTridiagonal, lo: f64, hi: f64, m: usize, tol: Option<f64>) -> Result<Vec<f64>> {
    bisect_with(|s| count_below(b, s), lo, hi, m, tol.unwrap_or_else(|| default_tolerance(hi)))
}

/// Inertia of a block Jacobi matrix.
pub fn jacobi_inertia(b: &BlockJacobi, shift: f64) -> Result<InertiaTriple> {
    inertia_with_retry(&BlockTridiagonal::from_jacobi(b), shift).map(|(t, _)| t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::build_b2;
    use crate::model::{generate, CouplingFamily, GapFamily, HermitianMatrix, SequenceFamily};

    fn free(n: usize) -> BlockJacobi {
        let fam = SequenceFamily::new(1, GapFamily::Constant { c: 1.0 }, CouplingFamily::Zero).unwrap();
        build_b2(&generate(&fam, n + 1).unwrap(), n).unwrap()
    }

    #[test]
    fn single_negative_block() {
        let b = BlockTridiagonal::new(vec![CMat::scalar(1, -1.0)], vec![]).unwrap();
        assert_eq!(inertia(&b, 0.0).unwrap(), InertiaTriple { n_minus: 1, n_zero: 0, n_plus: 0 });
        assert_eq!(eigenvalues_by_bisection(&BlockTridiagonal::new(vec![CMat::scalar(1, -5.0)], vec![]).unwrap(), -10.0, 0.0, 5, None).unwrap().len(), 1);
    }

    #[test]
    fn free_truncation_counts() {
        let b = free(5);
        assert_eq!(jacobi_inertia(&b, 0.0).unwrap(), InertiaTriple { n_minus: 0, n_zero: 0, n_plus: 5 });
        assert_eq!(jacobi_inertia(&b, 2.1).unwrap(), InertiaTriple { n_minus: 5, n_zero: 0, n_plus: 0 });
    }

    #[test]
    fn free_truncation_eigenvalues() {
        let b = BlockTridiagonal::from_jacobi(&free(3));
        let eig = eigenvalues_by_bisection(&b, -1.0, 3.0, 10, Some(1e-13)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (got, want) in eig.iter().zip([1.0 - h, 1.0, 1.0 + h]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(eigenvalues_by_bisection(&b, 2.0, 3.0, 10, None).unwrap().is_empty());
    }

    #[test]
    fn zero_in_last_block_counts_as_zero() {
        let b = BlockTridiagonal::new(vec![CMat::scalar(1, 1.0), CMat::scalar(1, 1.0)], vec![CMat::scalar(1, 1.0)]).unwrap();
        assert_eq!(inertia(&b, 0.0).unwrap(), InertiaTriple { n_minus: 0, n_zero: 1, n_plus: 1 });
    }

    #[test]
    fn breakdown_then_retry() {
        let b = BlockTridiagonal::new(
            vec![CMat::scalar(1, 0.0), CMat::scalar(1, 0.0)],
            vec![CMat::scalar(1, 1.0)],
        )
        .unwrap();
        assert_eq!(inertia(&b, 0.0), Err(Error::PivotBreakdown(1)));
        let (t, used) = inertia_with_retry(&b, 0.0).unwrap();
        assert_eq!(t.n_minus, 1);
        assert!(used != 0.0 && used.abs() <= 1e-9);
    }

    #[test]
    fn shift_of_couplings_moves_diagonal() {
        let fam = SequenceFamily::new(
            2,
            GapFamily::PowerLaw { c: 1.0, gamma: 0.5 },
            CouplingFamily::SingleDelta { at: 2, matrix: HermitianMatrix::diagonal(&[-3.0, 4.0]) },
        )
        .unwrap();
        let b = build_b2(&generate(&fam, 6).unwrap(), 5).unwrap();
        let t = jacobi_inertia(&b, 0.0).unwrap();
        assert_eq!(t.total(), 10);
    }
}
