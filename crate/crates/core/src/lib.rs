//! Block Jacobi matrices for matrix Schrödinger operators with δ-interactions.

pub mod asymptotic;
pub mod cli;
pub mod correspond;
pub mod criteria;
pub mod error;
pub mod linalg;
pub mod jacobi;
pub mod model;
pub mod output;
pub mod spectral;
pub mod weyl;

pub use error::{Error, Result};
