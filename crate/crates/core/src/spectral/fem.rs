use serde::Serialize;

use super::inertia::{bisect_with, count_below, default_tolerance, BlockTridiagonal, InertiaTriple};
use super::Boundary;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::model::InteractionData;

/// Piecewise-linear Galerkin realization of the δ-interaction Hamiltonian on
/// `[0, x_n]`.
///
/// Every `x_k` is a mesh node, so the couplings enter the form exactly.
#[derive(Debug, Clone)]
pub struct TruncatedHamiltonian {
    pub intervals: usize,
    pub left: Boundary,
    pub right: Boundary,
    /// Elements per interval.
    pub elements: Vec<usize>,
    /// Stiffness plus coupling, `K + P`.
    pub form: BlockTridiagonal,
    pub mass: BlockTridiagonal,
}

impl TruncatedHamiltonian {
    /// Number of degrees of freedom (block rows).
    pub fn dofs(&self) -> usize {
        self.form.n()
    }

    /// Inertia of `K + P − σM`; its negative count is the number of pencil
    /// eigenvalues below `σ`.
    pub fn pencil_inertia(&self, sigma: f64) -> Result<InertiaTriple> {
        let shifted = self.form.minus_scaled(sigma, &self.mass)?;
        super::inertia::inertia_with_retry(&shifted, 0.0).map(|(t, _)| t)
    }

    pub fn count_below(&self, sigma: f64) -> Result<usize> {
        let shifted = self.form.minus_scaled(sigma, &self.mass)?;
        count_below(&shifted, 0.0)
    }

    /// Number of negative eigenvalues; `M ≻ 0`, so this is the negative count
    /// of `K + P`.
    pub fn kappa_minus(&self) -> Result<usize> {
        count_below(&self.form, 0.0)
    }

    /// Up to `m` pencil eigenvalues in `[lo, hi)`.
    pub fn eigenvalues(&self, lo: f64, hi: f64, m: usize, tol: Option<f64>) -> Result<Vec<f64>> {
        bisect_with(|s| self.count_below(s), lo, hi, m, tol.unwrap_or_else(|| default_tolerance(hi)))
    }
}

fn check_intervals(data: &InteractionData, n: usize) -> Result<()> {
    if n == 0 || n > data.intervals() {
        return Err(Error::TruncationTooLarge { requested: n, available: data.intervals() });
    }
    Ok(())
}

/// Mesh with `ceil(d_k / h)` elements on interval `k`; needs `h ≤ min d_k / 4`.
pub fn assemble_fem(data: &InteractionData, n: usize, left: Boundary, right: Boundary, h: f64) -> Result<TruncatedHamiltonian> {
    check_intervals(data, n)?;
    let min_d = data.gaps()[..n].iter().copied().fold(f64::INFINITY, f64::min);
    let limit = min_d / 4.0;
    if !(h > 0.0) || h > limit {
        return Err(Error::MeshTooCoarse { h, limit });
    }
    let elements = data.gaps()[..n].iter().map(|&d| ((d / h).ceil() as usize).max(1)).collect();
    assemble_fem_elements(data, n, left, right, elements)
}

/// Mesh with an explicit element count per interval (each at least 4).
pub fn assemble_fem_elements(
    data: &InteractionData,
    n: usize,
    left: Boundary,
    right: Boundary,
    elements: Vec<usize>,
) -> Result<TruncatedHamiltonian> {
    check_intervals(data, n)?;
    if elements.len() != n {
        return Err(Error::LengthMismatch(format!("{n} intervals need {n} element counts")));
    }
    if let Some(k) = elements.iter().position(|&e| e < 4) {
        let h = data.d(k + 1) / elements[k].max(1) as f64;
        return Err(Error::MeshTooCoarse { h, limit: data.d(k + 1) / 4.0 });
    }
    let p = data.p();

    // scalar element contributions on the full node set
    let nodes = elements.iter().sum::<usize>() + 1;
    let mut k_diag = vec![0.0; nodes];
    let mut k_off = vec![0.0; nodes - 1];
    let mut m_diag = vec![0.0; nodes];
    let mut m_off = vec![0.0; nodes - 1];
    let mut coupling_node = Vec::with_capacity(n.saturating_sub(1));
    let mut node = 0;
    for (k, &e) in elements.iter().enumerate() {
        let he = data.d(k + 1) / e as f64;
        for _ in 0..e {
            k_diag[node] += 1.0 / he;
            k_diag[node + 1] += 1.0 / he;
            k_off[node] -= 1.0 / he;
            m_diag[node] += he / 3.0;
            m_diag[node + 1] += he / 3.0;
            m_off[node] += he / 6.0;
            node += 1;
        }
        if k + 1 < n {
            coupling_node.push(node);
        }
    }

    let first = usize::from(left == Boundary::Dirichlet);
    let last = nodes - usize::from(right == Boundary::Dirichlet);
    if last <= first {
        return Err(Error::BadParameters("no free nodes left".into()));
    }
    let mut form_diag: Vec<CMat> = (first..last).map(|i| CMat::scalar(p, k_diag[i])).collect();
    for (k, &node) in coupling_node.iter().enumerate() {
        let blk = &mut form_diag[node - first];
        *blk = &*blk + data.lambda(k + 1).as_mat();
    }
    let form = BlockTridiagonal::new(form_diag, (first..last - 1).map(|i| CMat::scalar(p, k_off[i])).collect())?;
    let mass = BlockTridiagonal::new(
        (first..last).map(|i| CMat::scalar(p, m_diag[i])).collect(),
        (first..last - 1).map(|i| CMat::scalar(p, m_off[i])).collect(),
    )?;
    Ok(TruncatedHamiltonian { intervals: n, left, right, elements, form, mass })
}

/// Negative counts along a mesh schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaTrace {
    pub levels: Vec<KappaLevel>,
    /// The count when the last two levels agree.
    pub stabilized: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaLevel {
    pub h: f64,
    pub dofs: usize,
    pub n_minus: usize,
}

impl KappaTrace {
    pub fn count(&self) -> Result<usize> {
        match (self.stabilized, self.levels.as_slice()) {
            (Some(c), _) => Ok(c),
            (None, [.., a, b]) => Err(Error::NotStabilized { previous: a.n_minus, last: b.n_minus }),
            (None, [a]) => Err(Error::NotStabilized { previous: a.n_minus, last: a.n_minus }),
            (None, []) => Err(Error::BadParameters("empty mesh schedule".into())),
        }
    }
}

/// `κ₋` of the truncated Hamiltonian on `[0, x_n]` for each `h` in the
/// schedule. Stabilized means the last two levels agree.
pub fn kappa_minus_h(data: &InteractionData, n: usize, left: Boundary, right: Boundary, schedule: &[f64]) -> Result<KappaTrace> {
    let levels = schedule
        .iter()
        .map(|&h| {
            let fem = assemble_fem(data, n, left, right, h)?;
            Ok(KappaLevel { h, dofs: fem.dofs(), n_minus: fem.kappa_minus()? })
        })
        .collect::<Result<Vec<_>>>()?;
    let stabilized = match levels.as_slice() {
        [.., a, b] if a.n_minus == b.n_minus => Some(b.n_minus),
        _ => None,
    };
    Ok(KappaTrace { levels, stabilized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{single_delta_partition, HermitianMatrix};
    use std::f64::consts::PI;

    fn one_interval(len: f64) -> InteractionData {
        InteractionData::new(vec![0.0, len], vec![], 1).unwrap()
    }

    #[test]
    fn dirichlet_interval_of_length_pi() {
        let fem = assemble_fem_elements(&one_interval(PI), 1, Boundary::Dirichlet, Boundary::Dirichlet, vec![1000]).unwrap();
        let eig = fem.eigenvalues(0.0, 10.0, 3, Some(1e-12)).unwrap();
        assert_eq!(eig.len(), 3);
        for (e, j) in eig.iter().zip(1..) {
            let exact = (j * j) as f64;
            assert!((e - exact).abs() / exact < 1e-4, "{e}");
        }
    }

    #[test]
    fn neumann_dirichlet_interval() {
        let len = 3.0;
        let fem = assemble_fem(&one_interval(len), 1, Boundary::Neumann, Boundary::Dirichlet, 0.005).unwrap();
        let eig = fem.eigenvalues(0.0, 8.0, 4, Some(1e-12)).unwrap();
        for (e, j) in eig.iter().zip(1..) {
            let exact = ((j as f64 - 0.5) * PI / len).powi(2);
            assert!((e - exact).abs() / exact < 1e-4, "{e} vs {exact}");
        }
    }

    #[test]
    fn diagonal_couplings_decouple() {
        let lam = HermitianMatrix::diagonal(&[-1.0, 2.0]);
        let data = single_delta_partition(1.0, 4.0, 3, lam).unwrap();
        let fem = assemble_fem(&data, 3, Boundary::Neumann, Boundary::Dirichlet, 0.05).unwrap();
        let eig2 = fem.eigenvalues(-2.0, 3.0, 20, Some(1e-11)).unwrap();
        let mut scalar = Vec::new();
        for l in [-1.0, 2.0] {
            let d1 = single_delta_partition(1.0, 4.0, 3, HermitianMatrix::scalar(1, l)).unwrap();
            let f1 = assemble_fem(&d1, 3, Boundary::Neumann, Boundary::Dirichlet, 0.05).unwrap();
            scalar.extend(f1.eigenvalues(-2.0, 3.0, 20, Some(1e-11)).unwrap());
        }
        scalar.sort_by(f64::total_cmp);
        assert_eq!(eig2.len(), scalar.len());
        for (a, b) in eig2.iter().zip(&scalar) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn kappa_examples() {
        let free = single_delta_partition(1.0, 10.0, 4, HermitianMatrix::scalar(1, 0.0)).unwrap();
        let t = kappa_minus_h(&free, 4, Boundary::Neumann, Boundary::Dirichlet, &[0.05, 0.02]).unwrap();
        assert_eq!(t.count(), Ok(0));

        let single = single_delta_partition(1.0, 10.0, 4, HermitianMatrix::scalar(1, -1.0)).unwrap();
        let t = kappa_minus_h(&single, 4, Boundary::Neumann, Boundary::Dirichlet, &[0.05, 0.02, 0.01]).unwrap();
        assert_eq!(t.count(), Ok(1));

        let x: Vec<f64> = (0..=10).map(f64::from).collect();
        let two = InteractionData::new(
            x,
            (1..10).map(|k| CMat::scalar(1, if k <= 2 { -10.0 } else { 0.0 })).collect(),
            1,
        )
        .unwrap();
        let t = kappa_minus_h(&two, 10, Boundary::Neumann, Boundary::Dirichlet, &[0.05, 0.02]).unwrap();
        assert_eq!(t.count(), Ok(2));
    }

    #[test]
    fn coarse_mesh_rejected() {
        let data = one_interval(1.0);
        assert!(matches!(
            assemble_fem(&data, 1, Boundary::Neumann, Boundary::Dirichlet, 0.3),
            Err(Error::MeshTooCoarse { .. })
        ));
    }

    #[test]
    fn trace_without_agreement() {
        let trace = KappaTrace {
            levels: vec![KappaLevel { h: 0.1, dofs: 10, n_minus: 1 }, KappaLevel { h: 0.05, dofs: 20, n_minus: 2 }],
            stabilized: None,
        };
        assert_eq!(trace.count(), Err(Error::NotStabilized { previous: 1, last: 2 }));
    }
}
