use serde::Serialize;

use super::fem::assemble_fem;
use super::inertia::{eigenvalues_by_bisection, inertia_with_retry, BlockTridiagonal, InertiaTriple};
use super::transfer::secular_real_roots;
use super::Boundary;
use crate::error::{Error, Result};
use crate::jacobi::{build_b2_with, Origin};
use crate::model::InteractionData;
use crate::output::fmt_f64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumParams {
    pub intervals: usize,
    pub left: Boundary,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mesh: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshLevel {
    pub h: f64,
    pub dofs: usize,
    pub count_below_lo: usize,
    pub count_below_hi: usize,
    pub eigenvalues: Vec<f64>,
}

/// Eigenvalue counts and lists for the truncated Hamiltonian on `[0, x_n]`
/// (Dirichlet at `x_n`) and for the matched `B₂` truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub kind: String,
    pub params: SpectrumParams,
    pub b_inertia_lo: InertiaTriple,
    pub b_inertia_hi: InertiaTriple,
    pub b_eigenvalues: Vec<f64>,
    pub levels: Vec<MeshLevel>,
    /// Zeros of the secular function in `[lo, hi]`; empty for complex couplings.
    pub secular_roots: Vec<f64>,
    /// Finest-mesh eigenvalue minus the nearest secular zero.
    pub residuals: Vec<f64>,
}

impl SpectralReport {
    /// `(h, j, λ_j)` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,j,lambda\n");
        for l in &self.levels {
            for (j, v) in l.eigenvalues.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", fmt_f64(l.h), j + 1, fmt_f64(*v)));
            }
        }
        out
    }
}

pub fn spectrum_report(
    data: &InteractionData,
    n: usize,
    left: Boundary,
    lo: f64,
    hi: f64,
    count: usize,
    mesh: &[f64],
) -> Result<SpectralReport> {
    if mesh.is_empty() {
        return Err(Error::BadParameters("empty mesh schedule".into()));
    }
    if n < 2 {
        return Err(Error::BadParameters(format!("need at least 2 intervals, got {n}")));
    }
    let origin = match left {
        Boundary::Neumann => Origin::Neumann,
        Boundary::Dirichlet => Origin::Dirichlet,
    };
    let b = BlockTridiagonal::from_jacobi(&build_b2_with(data, n - 1, origin)?);
    let (b_inertia_lo, _) = inertia_with_retry(&b, lo)?;
    let (b_inertia_hi, _) = inertia_with_retry(&b, hi)?;
    let b_eigenvalues = eigenvalues_by_bisection(&b, lo, hi, count, None)?;

    let levels = mesh
        .iter()
        .map(|&h| {
            let fem = assemble_fem(data, n, left, Boundary::Dirichlet, h)?;
            Ok(MeshLevel {
                h,
                dofs: fem.dofs(),
                count_below_lo: fem.count_below(lo)?,
                count_below_hi: fem.count_below(hi)?,
                eigenvalues: fem.eigenvalues(lo, hi, count, None)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let real = data.lambdas().iter().all(|l| l.as_mat().as_slice().iter().all(|v| v.im == 0.0));
    let secular_roots = if real && data.p() == 1 {
        secular_real_roots(data, n, left, lo, hi, 2000)?
    } else {
        Vec::new()
    };
    let residuals = match (levels.last(), secular_roots.is_empty()) {
        (Some(l), false) => l
            .eigenvalues
            .iter()
            .map(|&e| {
                let near = secular_roots.iter().copied().min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs())).expect("nonempty");
                e - near
            })
            .collect(),
        _ => Vec::new(),
    };
    Ok(SpectralReport {
        kind: "spectrum".into(),
        params: SpectrumParams { intervals: n, left, lo, hi, count, mesh: mesh.to_vec() },
        b_inertia_lo,
        b_inertia_hi,
        b_eigenvalues,
        levels,
        secular_roots,
        residuals,
    })
}
