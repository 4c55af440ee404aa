//! Block matrices attached to interaction data: the three-diagonal `B₂`, the
//! raw matrix `B̃_Λ`, the regularizers `R_X`, `Q_X`, and `B₁` obtained from
//! them.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::model::{HermitianMatrix, InteractionData};

/// Boundary condition at the origin encoded by the first diagonal block of `B₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    /// `A_1 = I/(d_1 d_2) + Λ_1/(d_1 + d_2)`, the matrix as built from the
    /// second boundary triplet. Its nodal form vanishes at `x_0`.
    #[default]
    Dirichlet,
    /// `A_1 = (I/d_2 + Λ_1)/(d_1 + d_2)`: the first interval carries no
    /// energy, matching `f'(0) = 0`.
    Neumann,
}

/// Hermitian block-tridiagonal matrix whose off-diagonal blocks are real
/// multiples of the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockJacobi {
    p: usize,
    diag: Vec<HermitianMatrix>,
    offdiag: Vec<f64>,
}

impl BlockJacobi {
    pub fn new(diag: Vec<HermitianMatrix>, offdiag: Vec<f64>) -> Result<Self> {
        let p = diag.first().map(HermitianMatrix::dim).unwrap_or(0);
        if p == 0 {
            return Err(Error::BadParameters("block Jacobi matrix needs at least one block".into()));
        }
        if diag.iter().any(|a| a.dim() != p) {
            return Err(Error::LengthMismatch("diagonal blocks differ in size".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::LengthMismatch(format!(
                "{} diagonal blocks need {} off-diagonal scalars, got {}",
                diag.len(),
                diag.len() - 1,
                offdiag.len()
            )));
        }
        Ok(Self { p, diag, offdiag })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of block rows.
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn order(&self) -> usize {
        self.p * self.n()
    }

    /// `A_k`, 1-based.
    pub fn a(&self, k: usize) -> &HermitianMatrix {
        &self.diag[k - 1]
    }

    /// The scalar `β_k` with `B_k = β_k I_p`, 1-based.
    pub fn b(&self, k: usize) -> f64 {
        self.offdiag[k - 1]
    }

    pub fn diag_blocks(&self) -> &[HermitianMatrix] {
        &self.diag
    }

    pub fn offdiag_scalars(&self) -> &[f64] {
        &self.offdiag
    }

    /// Leading `n` block rows (a principal submatrix).
    pub fn leading(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n() {
            return Err(Error::TruncationTooLarge { requested: n, available: self.n() });
        }
        Self::new(self.diag[..n].to_vec(), self.offdiag[..n - 1].to_vec())
    }

    pub fn to_dense(&self) -> CMat {
        let p = self.p;
        let mut m = CMat::zeros(self.order(), self.order());
        for (k, a) in self.diag.iter().enumerate() {
            m.set_block(k * p, k * p, a.as_mat());
        }
        for (k, &b) in self.offdiag.iter().enumerate() {
            for i in 0..p {
                m[(k * p + i, (k + 1) * p + i)] = Complex64::new(b, 0.0);
                m[((k + 1) * p + i, k * p + i)] = Complex64::new(b, 0.0);
            }
        }
        m
    }

    /// Matrix Market coordinate format (lower triangle, `real symmetric` or
    /// `complex hermitian`).
    pub fn to_matrix_market(&self) -> String {
        let dense = self.to_dense();
        let n = dense.rows();
        let complex = dense.as_slice().iter().any(|v| v.im != 0.0);
        let mut entries = Vec::new();
        for j in 0..n {
            for i in j..n {
                let v = dense[(i, j)];
                if v != Complex64::new(0.0, 0.0) {
                    entries.push((i, j, v));
                }
            }
        }
        let mut out = String::new();
        let field = if complex { "complex hermitian" } else { "real symmetric" };
        let _ = writeln!(out, "%%MatrixMarket matrix coordinate {field}");
        let _ = writeln!(out, "{n} {n} {}", entries.len());
        for (i, j, v) in entries {
            if complex {
                let _ = writeln!(out, "{} {} {:.16e} {:.16e}", i + 1, j + 1, v.re, v.im);
            } else {
                let _ = writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v.re);
            }
        }
        out
    }
}

impl Serialize for BlockJacobi {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[allow(non_snake_case)]
        struct Repr<'a> {
            p: usize,
            N: usize,
            diag: &'a [HermitianMatrix],
            offdiag_scalars: &'a [f64],
        }
        Repr { p: self.p, N: self.n(), diag: &self.diag, offdiag_scalars: &self.offdiag }.serialize(s)
    }
}

fn check_blocks(data: &InteractionData, n: usize) -> Result<()> {
    if n == 0 || n > data.couplings() {
        return Err(Error::TruncationTooLarge { requested: n, available: data.couplings() });
    }
    Ok(())
}

fn check_intervals(data: &InteractionData, n: usize) -> Result<()> {
    if n == 0 || n > data.intervals() {
        return Err(Error::TruncationTooLarge { requested: n, available: data.intervals() });
    }
    Ok(())
}

/// The `n × n` block truncation of `B₂`, built from `Λ_1 … Λ_n` and
/// `d_1 … d_{n+1}`. It needs `n ≤ N − 1`; the largest truncation corresponds to
/// the operator on `[0, x_N]` with a Dirichlet condition at `x_N`.
pub fn build_b2(data: &InteractionData, n: usize) -> Result<BlockJacobi> {
    build_b2_with(data, n, Origin::Dirichlet)
}

pub fn build_b2_with(data: &InteractionData, n: usize, origin: Origin) -> Result<BlockJacobi> {
    check_blocks(data, n)?;
    let p = data.p();
    let diag = (1..=n)
        .map(|k| {
            let (dk, dk1) = (data.d(k), data.d(k + 1));
            let sum = dk + dk1;
            let lead = match (origin, k) {
                (Origin::Neumann, 1) => 1.0 / (dk1 * sum),
                _ => 1.0 / (dk * dk1),
            };
            let mut a = data.lambda(k).as_mat().scale(1.0 / sum);
            for i in 0..p {
                a[(i, i)] += lead;
            }
            HermitianMatrix::new(a).expect("hermitian by construction")
        })
        .collect();
    let offdiag = (1..n).map(|k| -1.0 / (data.r(k) * data.r(k + 1) * data.d(k + 1))).collect();
    BlockJacobi::new(diag, offdiag)
}

/// `B̃_Λ` of order `2np` for the first `n` intervals: zero first block row,
/// and the cell `[[0, I], [I, Λ_k]]` at block rows/columns `(2k, 2k+1)`.
pub fn build_tilde_b(data: &InteractionData, n: usize) -> Result<CMat> {
    check_intervals(data, n)?;
    let p = data.p();
    let mut m = CMat::zeros(2 * n * p, 2 * n * p);
    for k in 1..n {
        let (r0, r1) = ((2 * k - 1) * p, 2 * k * p);
        for i in 0..p {
            m[(r0 + i, r1 + i)] = Complex64::new(1.0, 0.0);
            m[(r1 + i, r0 + i)] = Complex64::new(1.0, 0.0);
        }
        m.set_block(r1, r1, data.lambda(k).as_mat());
    }
    Ok(m)
}

/// Which boundary triplet a regularizer or Weyl function belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Triplet {
    Triplet1,
    Triplet2,
}

/// Block-diagonal regularizers `R_X` (stored by its diagonal) and `Q_X`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePair {
    pub triplet: Triplet,
    pub p: usize,
    /// Diagonal of `R_X`, length `2np`.
    pub r: Vec<f64>,
    /// `Q_1 … Q_n`, each `2p × 2p`.
    pub q: Vec<CMat>,
}

impl GaugePair {
    pub fn r_dense(&self) -> CMat {
        CMat::diag_real(&self.r)
    }

    pub fn q_dense(&self) -> CMat {
        let b = 2 * self.p;
        let mut m = CMat::zeros(b * self.q.len(), b * self.q.len());
        for (k, qk) in self.q.iter().enumerate() {
            m.set_block(k * b, k * b, qk);
        }
        m
    }
}

/// Per-interval factors `(R_k diagonal in scalar form, Q_k in scalar form)`.
pub fn gauge_block(d: f64, triplet: Triplet) -> ([f64; 2], [[f64; 2]; 2]) {
    match triplet {
        Triplet::Triplet1 => ([d.sqrt(), d * d.sqrt()], [[0.0, 1.0], [1.0, d]]),
        Triplet::Triplet2 => ([d.sqrt(), d.sqrt()], [[-1.0 / d, -1.0 / d], [-1.0 / d, -1.0 / d]]),
    }
}

pub fn build_gauge(data: &InteractionData, n: usize, triplet: Triplet) -> Result<GaugePair> {
    check_intervals(data, n)?;
    let p = data.p();
    let mut r = Vec::with_capacity(2 * n * p);
    let mut q = Vec::with_capacity(n);
    for k in 1..=n {
        let (rk, qk) = gauge_block(data.d(k), triplet);
        for v in rk {
            r.extend(std::iter::repeat(v).take(p));
        }
        q.push(CMat::from_fn(2, 2, |i, j| Complex64::new(qk[i][j], 0.0)).kron_identity(p));
    }
    Ok(GaugePair { triplet, p, r, q })
}

/// `B₁ = R⁻¹(B̃_Λ − Q)R⁻¹` of order `2np` for the first triplet.
pub fn build_b1(data: &InteractionData, n: usize) -> Result<CMat> {
    let tilde = build_tilde_b(data, n)?;
    let gauge = build_gauge(data, n, Triplet::Triplet1)?;
    let p = data.p();
    let b = 2 * p;
    let mut m = tilde;
    for (k, qk) in gauge.q.iter().enumerate() {
        for i in 0..b {
            for j in 0..b {
                m[(k * b + i, k * b + j)] -= qk[(i, j)];
            }
        }
    }
    let order = m.rows();
    Ok(CMat::from_fn(order, order, |i, j| m[(i, j)] / (gauge.r[i] * gauge.r[j])))
}
