use num_complex::Complex64;
use serde::Serialize;

use super::Boundary;
use crate::error::{Error, Result};
use crate::linalg::{thin_qr, CMat};
use crate::model::InteractionData;
use crate::weyl::entire_cs;

/// Propagator of `(f, f')` across an interval of length `d`, followed by the
/// jump `[[I, 0], [Λ, I]]` when a coupling is given.
pub fn transfer_step(d: f64, lambda: Option<&CMat>, z: Complex64, p: usize) -> CMat {
    let (c, s) = entire_cs(z, d);
    let t = CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) | (1, 1) => c,
        (0, 1) => s,
        _ => -z * s,
    })
    .kron_identity(p);
    match lambda {
        Some(l) => &jump(l) * &t,
        None => t,
    }
}

/// `[[I, 0], [Λ, I]]`.
pub fn jump(lambda: &CMat) -> CMat {
    let p = lambda.rows();
    let mut j = CMat::identity(2 * p);
    j.set_block(p, 0, lambda);
    j
}

/// `mantissa · e^{log_modulus}`, kept apart to avoid overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecularValue {
    pub mantissa: Complex64,
    pub log_modulus: f64,
}

impl SecularValue {
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_modulus.exp()
    }
}

/// Determinant of the position block at `x_n` of the solution frame started
/// with `(f, f')(0) = (I, 0)` (Neumann start) or `(0, I)` (Dirichlet start).
///
/// Zeros in `z` are the eigenvalues of the Hamiltonian on `[0, x_n]` with a
/// Dirichlet condition at `x_n`. The frame is re-orthonormalized after every
/// interval and the discarded triangular factors are tracked in log form.
pub fn secular(data: &InteractionData, n: usize, z: Complex64, start: Boundary) -> Result<SecularValue> {
    if n == 0 || n > data.intervals() {
        return Err(Error::TruncationTooLarge { requested: n, available: data.intervals() });
    }
    let p = data.p();
    let mut frame = CMat::zeros(2 * p, p);
    let offset = match start {
        Boundary::Neumann => 0,
        Boundary::Dirichlet => p,
    };
    for i in 0..p {
        frame[(offset + i, i)] = Complex64::new(1.0, 0.0);
    }
    let mut log_modulus = 0.0;
    for k in 1..=n {
        let lambda = (k < n).then(|| data.lambda(k).as_mat());
        frame = &transfer_step(data.d(k), lambda, z, p) * &frame;
        let (q, r) = thin_qr(&frame);
        if r.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Singular);
        }
        log_modulus += r.iter().map(|v| v.ln()).sum::<f64>();
        frame = q;
    }
    let mantissa = frame.block(0, 0, p, p).determinant();
    Ok(SecularValue { mantissa, log_modulus })
}

/// Real zeros of the secular function in `[lo, hi]`, found by sign changes on
/// a uniform grid of `samples` points and refined by bisection.
///
/// Needs real symmetric couplings so that the function is real on the real
/// axis. Zeros of even multiplicity are not detected.
pub fn secular_real_roots(data: &InteractionData, n: usize, start: Boundary, lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>> {
    if data.lambdas().iter().any(|l| l.as_mat().as_slice().iter().any(|v| v.im != 0.0)) {
        return Err(Error::BadParameters("real-root scan needs real couplings".into()));
    }
    if !(lo < hi) || samples < 2 {
        return Err(Error::BadParameters("need lo < hi and at least two samples".into()));
    }
    let f = |z: f64| secular(data, n, Complex64::new(z, 0.0), start).map(|v| v.mantissa.re);
    let mut roots = Vec::new();
    let step = (hi - lo) / (samples - 1) as f64;
    let mut a = lo;
    let mut fa = f(a)?;
    for i in 1..samples {
        let b = if i + 1 == samples { hi } else { lo + step * i as f64 };
        let fb = f(b)?;
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut l, mut r, mut fl) = (a, b, fa);
            while r - l > 1e-14 * (1.0 + l.abs().max(r.abs())) {
                let mid = 0.5 * (l + r);
                if mid <= l || mid >= r {
                    break;
                }
                let fm = f(mid)?;
                if fm == 0.0 {
                    l = mid;
                    r = mid;
                    break;
                }
                if (fm < 0.0) == (fl < 0.0) {
                    l = mid;
                    fl = fm;
                } else {
                    r = mid;
                }
            }
            roots.push(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        roots.push(a);
    }
    Ok(roots)
}
