//! Spectral engines: block LDL* inertia and bisection for block Jacobi
//! matrices, a finite-element realization and a transfer-matrix secular
//! function for the truncated Hamiltonian, and a growth-exponent estimator
//! for deficiency indices.

pub mod deficiency;
pub mod fem;
pub mod inertia;
pub mod report;
pub mod transfer;

use serde::{Deserialize, Serialize};

pub use deficiency::{deficiency_estimate, DeficiencyEstimate};
pub use fem::{assemble_fem, assemble_fem_elements, kappa_minus_h, KappaLevel, KappaTrace, TruncatedHamiltonian};
pub use inertia::{
    count_below, eigenvalues_by_bisection, inertia, inertia_with_retry, jacobi_inertia, BlockTridiagonal, InertiaTriple,
};
pub use report::{spectrum_report, MeshLevel, SpectralReport, SpectrumParams};
pub use transfer::{secular, secular_real_roots, transfer_step, SecularValue};

/// Boundary condition at an end of the truncated interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Neumann,
    Dirichlet,
}
