//! Weyl functions of the two interval boundary triplets.
//!
//! Everything is expressed through the entire functions
//! `c(z) = cos(√z d)` and `s(z) = sin(√z d)/√z`, so no branch of `√z` leaks
//! into the results. Where a square root is needed internally it is taken
//! with `Im √z ≥ 0`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi::{gauge_block, Triplet};
use crate::linalg::{hermitian_eigenvalues, CMat};
use crate::model::InteractionData;

/// Pole tolerance on `|c(z)|` (first triplet) or `|s(z)|` (second triplet).
pub const POLE_TOL: f64 = 1e-12;

/// Below this value of `|z| d²` the Taylor series are used.
pub const SERIES_SWITCH: f64 = 1e-2;

const SERIES_TERMS: usize = 12;

pub const BRANCH_NOTE: &str = "sqrt(z) principal with Im >= 0; values built from entire functions cos(sqrt(z)d) and sin(sqrt(z)d)/sqrt(z)";

type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `√z` with `Im √z ≥ 0`.
pub fn sqrt_upper(z: Complex64) -> Complex64 {
    let w = z.sqrt();
    if w.im < 0.0 || (w.im == 0.0 && w.re < 0.0) {
        -w
    } else {
        w
    }
}

/// `(Σ_{n≥from} (−1)^n t^n/(2n)!, Σ_{n≥from} (−1)^n t^n/(2n+1)!)` for `t = z d²`.
fn even_odd_series(t: Complex64, from: usize) -> (Complex64, Complex64) {
    let mut even = c(0.0);
    let mut odd = c(0.0);
    let mut power = c(1.0);
    let mut fact = 1.0;
    for n in 0..SERIES_TERMS {
        if n > 0 {
            power *= -t;
            fact *= (2 * n - 1) as f64 * (2 * n) as f64;
        }
        if n >= from {
            even += power / fact;
            odd += power / (fact * (2 * n + 1) as f64);
        }
    }
    (even, odd)
}

/// `(c(z), s(z))` for an interval of length `d`.
pub fn entire_cs(z: Complex64, d: f64) -> (Complex64, Complex64) {
    if z.norm() * d * d <= SERIES_SWITCH {
        let (even, odd) = even_odd_series(z * d * d, 0);
        (even, odd * d)
    } else {
        let w = sqrt_upper(z);
        ((w * d).cos(), (w * d).sin() / w)
    }
}

/// `u = e^{i√z d}` with `|u| ≤ 1`.
fn phase(z: Complex64, d: f64) -> (Complex64, Complex64) {
    let w = sqrt_upper(z);
    (w, (Complex64::i() * w * d).exp())
}

fn near_pole(k: usize, z: Complex64) -> Error {
    Error::NearPole { k, re: z.re, im: z.im }
}

/// Scalar factor of `M̃_k(z)`; the full value is this `2 × 2` matrix tensored
/// with `I_p`.
pub fn tilde_m_scalar(d: f64, z: Complex64, triplet: Triplet, k: usize) -> Result<Mat2> {
    let diff = regularized_difference(d, z, triplet, k)?;
    let (_, q) = gauge_block(d, triplet);
    Ok([
        [diff[0][0] + q[0][0], diff[0][1] + q[0][1]],
        [diff[1][0] + q[1][0], diff[1][1] + q[1][1]],
    ])
}

/// `M̃_k(z) − Q_k` in scalar form.
fn regularized_difference(d: f64, z: Complex64, triplet: Triplet, k: usize) -> Result<Mat2> {
    let t = z * d * d;
    if z.norm() * d * d <= SERIES_SWITCH {
        let (cc, s) = entire_cs(z, d);
        let (even1, odd1) = even_odd_series(t, 1);
        // s − d·c, with the cancelling constant terms removed
        let s_minus_dc = (odd1 - even1) * d;
        return Ok(match triplet {
            Triplet::Triplet1 => {
                if cc.norm() < POLE_TOL {
                    return Err(near_pole(k, z));
                }
                let off = -even1 / cc;
                [[z * s / cc, off], [off, s_minus_dc / cc]]
            }
            Triplet::Triplet2 => {
                if s.norm() < POLE_TOL {
                    return Err(near_pole(k, z));
                }
                let diag = s_minus_dc / (s * d);
                let off = odd1 / s;
                [[diag, off], [off, diag]]
            }
        });
    }
    let (w, u) = phase(z, d);
    let u2 = u * u;
    let (_, q) = gauge_block(d, triplet);
    let raw = match triplet {
        Triplet::Triplet1 => {
            let den = c(1.0) + u2;
            if den.norm() < 2.0 * POLE_TOL * u.norm() {
                return Err(near_pole(k, z));
            }
            let tan = -Complex64::i() * (u2 - 1.0) / den;
            let sec = u * 2.0 / den;
            [[w * tan, sec], [sec, tan / w]]
        }
        Triplet::Triplet2 => {
            let den = u2 - 1.0;
            if den.norm() < 2.0 * POLE_TOL * u.norm() * w.norm() {
                return Err(near_pole(k, z));
            }
            let cot = Complex64::i() * (u2 + 1.0) / den;
            let csc = Complex64::i() * u * 2.0 / den;
            [[-w * cot, -w * csc], [-w * csc, -w * cot]]
        }
    };
    Ok([
        [raw[0][0] - q[0][0], raw[0][1] - q[0][1]],
        [raw[1][0] - q[1][0], raw[1][1] - q[1][1]],
    ])
}

/// Scalar factor of `M_k(z) = R_k⁻¹(M̃_k(z) − Q_k)R_k⁻¹`.
pub fn m_regularized_scalar(d: f64, z: Complex64, triplet: Triplet, k: usize) -> Result<Mat2> {
    let diff = regularized_difference(d, z, triplet, k)?;
    let (r, _) = gauge_block(d, triplet);
    Ok([
        [diff[0][0] / (r[0] * r[0]), diff[0][1] / (r[0] * r[1])],
        [diff[1][0] / (r[1] * r[0]), diff[1][1] / (r[1] * r[1])],
    ])
}

/// `‖M_k'(0)‖`; the same for every `d_k`.
pub fn derivative_constant(triplet: Triplet) -> f64 {
    match triplet {
        Triplet::Triplet1 => (4.0 + 13f64.sqrt()) / 6.0,
        Triplet::Triplet2 => 0.5,
    }
}

fn to_cmat(m: &Mat2) -> CMat {
    CMat::from_fn(2, 2, |i, j| m[i][j])
}

/// A Weyl function value with its metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylValue {
    pub z: Complex64,
    pub k: usize,
    pub triplet: Triplet,
    pub regularized: bool,
    pub value: CMat,
    pub branch_note: &'static str,
}

impl WeylValue {
    /// `(M − M*)/(2i)`.
    pub fn imag_part(&self) -> CMat {
        self.value.imag_part()
    }
}

fn check_k(data: &InteractionData, k: usize) -> Result<()> {
    if k == 0 || k > data.intervals() {
        return Err(Error::TruncationTooLarge { requested: k, available: data.intervals() });
    }
    Ok(())
}

fn wrap(data: &InteractionData, k: usize, z: Complex64, triplet: Triplet, regularized: bool, m: Mat2) -> WeylValue {
    WeylValue {
        z,
        k,
        triplet,
        regularized,
        value: to_cmat(&m).kron_identity(data.p()),
        branch_note: BRANCH_NOTE,
    }
}

/// `M̃_k(z)` of the first triplet.
pub fn tilde_m1(data: &InteractionData, k: usize, z: Complex64) -> Result<WeylValue> {
    check_k(data, k)?;
    let m = tilde_m_scalar(data.d(k), z, Triplet::Triplet1, k)?;
    Ok(wrap(data, k, z, Triplet::Triplet1, false, m))
}

/// `M̃_k(z)` of the second triplet.
pub fn tilde_m2(data: &InteractionData, k: usize, z: Complex64) -> Result<WeylValue> {
    check_k(data, k)?;
    let m = tilde_m_scalar(data.d(k), z, Triplet::Triplet2, k)?;
    Ok(wrap(data, k, z, Triplet::Triplet2, false, m))
}

pub fn m_regularized(data: &InteractionData, k: usize, z: Complex64, triplet: Triplet) -> Result<WeylValue> {
    check_k(data, k)?;
    let m = m_regularized_scalar(data.d(k), z, triplet, k)?;
    Ok(wrap(data, k, z, triplet, true, m))
}

/// One sample of a Herglotz scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HerglotzSample {
    pub k: usize,
    pub z: Complex64,
    /// Scalar factor of `M_k(z)`; `None` when `z` hits a pole.
    pub value: Option<[[Complex64; 2]; 2]>,
    /// Smallest eigenvalue of `sign(Im z)·Im M_k(z)`.
    pub min_eig: Option<f64>,
    /// `max |M_k(z) − M_k(z̄)*|`.
    pub symmetry_error: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HerglotzReport {
    pub triplet: Triplet,
    pub tolerance: f64,
    pub samples: Vec<HerglotzSample>,
    pub failures: usize,
    pub worst_min_eig: f64,
    pub worst_symmetry_error: f64,
}

impl HerglotzReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    /// One row per sample: `k, Re z, Im z`, the scalar entries of `M_k(z)` and
    /// the smallest eigenvalue of `Im M_k(z)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,re_z,im_z,m11_re,m11_im,m12_re,m12_im,m21_re,m21_im,m22_re,m22_im,min_eig_im\n");
        for s in &self.samples {
            let _ = write!(out, "{},{:.16e},{:.16e}", s.k, s.z.re, s.z.im);
            match &s.value {
                Some(m) => {
                    for v in m.iter().flatten() {
                        let _ = write!(out, ",{:.16e},{:.16e}", v.re, v.im);
                    }
                }
                None => out.push_str(",,,,,,,,"),
            }
            match s.min_eig {
                Some(e) => {
                    let _ = writeln!(out, ",{e:.16e}");
                }
                None => out.push_str(",\n"),
            }
        }
        out
    }
}

/// Evaluates `M_k` at every grid point for every interval and checks
/// `Im z · Im M_k(z) ⪰ 0` and `M_k(z̄) = M_k(z)*`.
pub fn herglotz_scan(data: &InteractionData, triplet: Triplet, grid: &[Complex64]) -> HerglotzReport {
    let tolerance = 1e-10;
    let mut samples = Vec::with_capacity(grid.len() * data.intervals());
    for k in 1..=data.intervals() {
        let d = data.d(k);
        for &z in grid {
            let here = m_regularized_scalar(d, z, triplet, k);
            let mirror = m_regularized_scalar(d, z.conj(), triplet, k);
            let sample = match (here, mirror) {
                (Ok(m), Ok(mc)) => {
                    let mat = to_cmat(&m);
                    let sign = if z.im < 0.0 { -1.0 } else { 1.0 };
                    let min_eig = hermitian_eigenvalues(&mat.imag_part().scale(sign))[0];
                    let symmetry_error = (&mat - &to_cmat(&mc).adjoint()).max_abs();
                    let scale = 1.0 + mat.max_abs();
                    HerglotzSample {
                        k,
                        z,
                        value: Some(m),
                        min_eig: Some(min_eig),
                        symmetry_error: Some(symmetry_error),
                        passed: min_eig >= -tolerance && symmetry_error <= 1e-12 * scale,
                    }
                }
                _ => HerglotzSample { k, z, value: None, min_eig: None, symmetry_error: None, passed: false },
            };
            samples.push(sample);
        }
    }
    let failures = samples.iter().filter(|s| !s.passed).count();
    let worst_min_eig = samples.iter().filter_map(|s| s.min_eig).fold(f64::INFINITY, f64::min);
    let worst_symmetry_error = samples.iter().filter_map(|s| s.symmetry_error).fold(0.0, f64::max);
    HerglotzReport { triplet, tolerance, samples, failures, worst_min_eig, worst_symmetry_error }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProbe {
    pub a: f64,
    /// The first grid point `x = −2^m` where every `M_k(x)` lies below `−a`.
    pub x_a: f64,
    pub exponent: i32,
    /// Largest eigenvalue of `M_k(x_a)` maximized over `k`.
    pub max_eig: f64,
}

pub const PROBE_MIN_EXPONENT: i32 = -40;
pub const PROBE_MAX_EXPONENT: i32 = 60;

/// Walks `x = −2^m`, `m = −40, …, 60`, for the second triplet and stops at the
/// first point where `λ_max(M_k(x)) < −a` holds for every interval.
pub fn uniform_decay_probe(data: &InteractionData, a: f64) -> Result<DecayProbe> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::BadParameters(format!("probe level must be positive, got {a}")));
    }
    for m in PROBE_MIN_EXPONENT..=PROBE_MAX_EXPONENT {
        let x = -(2f64.powi(m));
        let mut worst = f64::NEG_INFINITY;
        for k in 1..=data.intervals() {
            let v = m_regularized_scalar(data.d(k), c(x), Triplet::Triplet2, k)?;
            let eig = hermitian_eigenvalues(&to_cmat(&v).hermitian_part());
            worst = worst.max(eig[1]);
            if worst >= -a {
                break;
            }
        }
        if worst < -a {
            return Ok(DecayProbe { a, x_a: x, exponent: m, max_eig: worst });
        }
    }
    Err(Error::ProbeExhausted { a, max_exponent: PROBE_MAX_EXPONENT })
}

/// Real poles of `M̃_k` in `(0, upper)`: zeros of `c` for the first triplet,
/// of `s` for the second, located by a sign-change scan plus bisection.
pub fn real_poles(d: f64, triplet: Triplet, upper: f64, samples: usize) -> Vec<f64> {
    let f = |z: f64| {
        let (cc, s) = entire_cs(c(z), d);
        match triplet {
            Triplet::Triplet1 => cc.re,
            Triplet::Triplet2 => s.re,
        }
    };
    // sample in √z so that the zeros are evenly spread
    let top = upper.sqrt();
    let mut roots = Vec::new();
    let mut prev_w = 0.0;
    let mut prev_f = f(0.0);
    for i in 1..=samples {
        let w = top * i as f64 / samples as f64;
        let fw = f(w * w);
        if prev_f == 0.0 && prev_w > 0.0 {
            roots.push(prev_w * prev_w);
        } else if prev_f * fw < 0.0 {
            let (mut lo, mut hi, mut flo) = (prev_w, w, prev_f);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = f(mid * mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            if root * root < upper {
                roots.push(root * root);
            }
        }
        prev_w = w;
        prev_f = fw;
    }
    roots
}
