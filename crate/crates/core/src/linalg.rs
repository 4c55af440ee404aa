//! Small dense complex matrices.
//!
//! Everything in this crate works with blocks of size `p` or `2p`, so a
//! plain row-major `Vec<Complex64>` is all that is needed. Hermitian
//! eigenvalues use a closed form for orders 1 and 2 and cyclic Jacobi
//! rotations otherwise.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Off-diagonal Frobenius norm (relative to the full norm) at which cyclic
/// Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    /// `value · I_n`.
    pub fn scalar(n: usize, value: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(value, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols, "value count does not match shape");
        Self {
            rows,
            cols,
            data: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    /// `self ⊗ I_p`.
    pub fn kron_identity(&self, p: usize) -> Self {
        let mut out = Self::zeros(self.rows * p, self.cols * p);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self[(i, j)];
                if v == ZERO {
                    continue;
                }
                for a in 0..p {
                    out[(i * p + a, j * p + a)] = v;
                }
            }
        }
        out
    }

    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(row + i, col + j)])
    }

    pub fn set_block(&mut self, row: usize, col: usize, block: &CMat) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(row + i, col + j)] = block[(i, j)];
            }
        }
    }

    /// Exact Hermiticity: `a_ij == conj(a_ji)` bit for bit.
    pub fn is_hermitian_exact(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        (0..self.rows).all(|i| (i..self.cols).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `(A − A*) / (2i)`, the imaginary part of a square matrix.
    pub fn imag_part(&self) -> Self {
        let half_over_i = Complex64::new(0.0, -0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] - self[(j, i)].conj()) * half_over_i)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm. Hermitian input goes through its eigenvalues directly,
    /// anything else through `A* A`.
    pub fn spectral_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        if self.is_hermitian_exact() {
            return hermitian_eigenvalues(self)
                .into_iter()
                .map(f64::abs)
                .fold(0.0, f64::max);
        }
        let gram = (&self.adjoint() * self).hermitian_part();
        hermitian_eigenvalues(&gram)
            .last()
            .map(|&v| v.max(0.0).sqrt())
            .unwrap_or(0.0)
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
                .unwrap();
            if a[(pivot, col)].norm() <= 1e-300_f64.max(scale * f64::EPSILON * 1e-3) {
                return Err(Error::Singular);
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let d = ONE / a[(col, col)];
            for j in 0..n {
                a[(col, j)] *= d;
                inv[(col, j)] *= d;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let aj = a[(col, j)];
                    let ij = inv[(col, j)];
                    a[(i, j)] -= f * aj;
                    inv[(i, j)] -= f * ij;
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
                .unwrap();
            if a[(pivot, col)] == ZERO {
                return ZERO;
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                det = -det;
            }
            let d = a[(col, col)];
            det *= d;
            for i in col + 1..n {
                let f = a[(i, col)] / d;
                if f == ZERO {
                    continue;
                }
                for j in col..n {
                    let v = a[(col, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMat {
    type Output = CMat;

    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMat {
    type Output = CMat;

    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sum");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;

    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in difference");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMat {
    type Output = CMat;

    fn neg(self) -> CMat {
        self.scale(-1.0)
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// Only the Hermitian part of `a` is looked at. Orders 1 and 2 are solved in
/// closed form; larger orders use cyclic complex Jacobi rotations until the
/// off-diagonal Frobenius norm drops below `JACOBI_TOL` relative to the
/// matrix norm.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    assert!(a.is_square(), "eigenvalues of a non-square matrix");
    let n = a.rows();
    let mut ev = match n {
        0 => Vec::new(),
        1 => vec![a[(0, 0)].re],
        2 => {
            let p = a[(0, 0)].re;
            let q = a[(1, 1)].re;
            let b = (a[(0, 1)] + a[(1, 0)].conj()) * 0.5;
            let mid = 0.5 * (p + q);
            let rad = (0.5 * (p - q)).hypot(b.norm());
            vec![mid - rad, mid + rad]
        }
        _ => jacobi_eigenvalues(a.hermitian_part()),
    };
    ev.sort_by(f64::total_cmp);
    ev
}

fn jacobi_eigenvalues(mut a: CMat) -> Vec<f64> {
    let n = a.rows();
    let total = a.frobenius();
    if total == 0.0 {
        return vec![0.0; n];
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * total {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let b = a[(p, q)];
                let modulus = b.norm();
                if modulus <= f64::MIN_POSITIVE {
                    continue;
                }
                // Phase e^{iφ} of a_pq; J = diag(1, e^{-iφ}) · R(θ) makes
                // the (p, q) entry of J* A J vanish.
                let phase = b / modulus;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * (2.0 * modulus).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let j_pp = Complex64::new(c, 0.0);
                let j_pq = Complex64::new(s, 0.0);
                let j_qp = -phase.conj() * s;
                let j_qq = phase.conj() * c;
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * j_pp + aiq * j_qp;
                    a[(i, q)] = aip * j_pq + aiq * j_qq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = j_pp.conj() * apj + j_qp.conj() * aqj;
                    a[(q, j)] = j_pq.conj() * apj + j_qq.conj() * aqj;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
            }
        }
    }
    (0..n).map(|i| a[(i, i)].re).collect()
}

/// Thin QR of a tall matrix by modified Gram–Schmidt with one
/// reorthogonalisation pass. Returns `Q` (same shape as `a`) and the
/// positive diagonal of `R`; a column that collapses to zero gets a zero
/// diagonal and a zero `Q` column.
pub fn thin_qr(a: &CMat) -> (CMat, Vec<f64>) {
    let (m, n) = (a.rows(), a.cols());
    let mut q = a.clone();
    let mut r_diag = vec![0.0; n];
    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let mut dot = ZERO;
                for r in 0..m {
                    dot += q[(r, i)].conj() * q[(r, j)];
                }
                for r in 0..m {
                    let qi = q[(r, i)];
                    q[(r, j)] -= dot * qi;
                }
            }
        }
        let norm = (0..m).map(|r| q[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        r_diag[j] = norm;
        if norm > 0.0 {
            for r in 0..m {
                q[(r, j)] /= norm;
            }
        }
    }
    (q, r_diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_by_two_closed_form() {
        let a = CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(1.0, 0.0),
            (1, 1) => c(1.0, 0.0),
            (0, 1) => c(0.0, 2.0),
            _ => c(0.0, -2.0),
        });
        let ev = hermitian_eigenvalues(&a);
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_on_complex_hermitian() {
        // diag(1, 2, 3) conjugated by a unitary built from a 3-cycle and phases
        let u = CMat::from_fn(3, 3, |i, j| {
            let theta = 0.3 * (i as f64) + 0.7 * (j as f64);
            c(theta.cos(), theta.sin()) * (1.0 / 3f64.sqrt())
                * if (i + j) % 2 == 0 { 1.0 } else { -1.0 }
        });
        let (q, _) = thin_qr(&u);
        let d = CMat::diag_real(&[1.0, 2.0, 3.0]);
        let a = &(&q * &d) * &q.adjoint();
        let ev = hermitian_eigenvalues(&a);
        for (got, want) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn inverse_and_determinant() {
        let a = CMat::from_fn(3, 3, |i, j| c((i * 3 + j) as f64 + if i == j { 5.0 } else { 0.0 }, (i as f64) - (j as f64)));
        let inv = a.inverse().unwrap();
        let prod = &a * &inv;
        assert!((&prod - &CMat::identity(3)).max_abs() < 1e-13);
        let d = a.determinant();
        let d_inv = inv.determinant();
        assert!(((d * d_inv) - ONE).norm() < 1e-12);
        assert_eq!(CMat::zeros(2, 2).inverse(), Err(Error::Singular));
    }

    #[test]
    fn spectral_norm_general() {
        let a = CMat::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        assert!((a.spectral_norm() - 2.0).abs() < 1e-14);
        let h = CMat::from_real(2, 2, &[-3.0, 0.0, 0.0, 1.0]);
        assert_eq!(h.spectral_norm(), 3.0);
    }

    #[test]
    fn kron_places_scalar_blocks() {
        let a = CMat::from_real(2, 2, &[0.0, 1.0, 1.0, 5.0]);
        let k = a.kron_identity(2);
        assert_eq!(k[(0, 2)], ONE);
        assert_eq!(k[(1, 3)], ONE);
        assert_eq!(k[(0, 3)], ZERO);
        assert_eq!(k[(3, 3)], c(5.0, 0.0));
    }
}
