use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi::BlockJacobi;
use crate::linalg::{hermitian_eigenvalues, thin_qr, CMat};

/// Exponents closer than this to the `ℓ²` threshold `−1/2` make the estimate
/// indeterminate.
pub const GAP_THRESHOLD: f64 = 0.1;

/// Growth exponents of the solutions of `B u = z u` that start from `u_1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficiencyEstimate {
    pub z: Complex64,
    pub horizon: usize,
    /// Per QR column: slope of `ln‖u_k‖` against `ln k` over `[K/2, K]`,
    /// dominant direction first.
    pub exponents: Vec<f64>,
    /// Directions with exponent below `−1/2` (square-summable).
    pub decaying: usize,
    /// `min_j |β_j + 1/2|`.
    pub gap: f64,
    /// Singular values of the position block of the normalized terminal frame.
    pub terminal_singular_values: Vec<f64>,
}

impl DeficiencyEstimate {
    pub fn confident(&self) -> bool {
        self.gap >= GAP_THRESHOLD
    }

    /// The decaying count, or `Indeterminate` when the gap is too small.
    pub fn count(&self) -> Result<usize> {
        if self.confident() {
            Ok(self.decaying)
        } else {
            Err(Error::Indeterminate { count: self.decaying, gap: self.gap })
        }
    }
}

/// Runs `β_k u_{k+1} = (z − A_k) u_k − β_{k−1} u_{k−1}` from `u_1 = e_j`
/// (no `u_0` term) up to `u_{K+1}` on a QR-renormalized frame
/// `[U_k; U_{k+1}]`, and fits growth exponents from the accumulated
/// `ln R_jj`.
pub fn deficiency_estimate(b: &BlockJacobi, z: Complex64, horizon: usize) -> Result<DeficiencyEstimate> {
    if horizon < 8 {
        return Err(Error::BadParameters(format!("horizon must be at least 8, got {horizon}")));
    }
    if b.n() <= horizon {
        return Err(Error::TruncationTooLarge { requested: horizon + 1, available: b.n() });
    }
    let p = b.p();
    let shifted = |k: usize| {
        let mut m = b.a(k).as_mat().scale(-1.0);
        for i in 0..p {
            m[(i, i)] += z;
        }
        m
    };

    // frame [U_1; U_2]
    let mut frame = CMat::zeros(2 * p, p);
    frame.set_block(0, 0, &CMat::identity(p));
    frame.set_block(p, 0, &shifted(1).scale(1.0 / b.b(1)));
    let (q, r) = thin_qr(&frame);
    frame = q;
    let mut log_norms = vec![r.iter().map(|v| v.ln()).collect::<Vec<f64>>()];

    for k in 1..horizon {
        // [U_{k+1}; U_{k+2}] from [U_k; U_{k+1}]
        let (bk, bk1) = (b.b(k), b.b(k + 1));
        let top = frame.block(0, 0, p, p);
        let bottom = frame.block(p, 0, p, p);
        let next = &(&shifted(k + 1) * &bottom).scale(1.0 / bk1) - &top.scale(bk / bk1);
        let mut stacked = CMat::zeros(2 * p, p);
        stacked.set_block(0, 0, &bottom);
        stacked.set_block(p, 0, &next);
        let (q, r) = thin_qr(&stacked);
        if r.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Singular);
        }
        frame = q;
        let prev = log_norms.last().unwrap();
        log_norms.push(prev.iter().zip(&r).map(|(a, v)| a + v.ln()).collect());
    }

    // log_norms[i] belongs to k = i + 1
    let from = horizon / 2;
    let exponents: Vec<f64> = (0..p)
        .map(|j| {
            let pts: Vec<(f64, f64)> = (from..=horizon).map(|k| ((k as f64).ln(), log_norms[k - 1][j])).collect();
            slope(&pts)
        })
        .collect();
    let decaying = exponents.iter().filter(|&&e| e < -0.5).count();
    let gap = exponents.iter().map(|e| (e + 0.5).abs()).fold(f64::INFINITY, f64::min);
    let pos = frame.block(0, 0, p, p);
    let mut terminal_singular_values: Vec<f64> = hermitian_eigenvalues(&(&pos.adjoint() * &pos).hermitian_part())
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    terminal_singular_values.reverse();
    Ok(DeficiencyEstimate { z, horizon, exponents, decaying, gap, terminal_singular_values })
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    sxy / sxx
}
