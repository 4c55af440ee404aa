#![allow(dead_code)]

use delta_jacobi::linalg::CMat;
use delta_jacobi::model::InteractionData;
use delta_jacobi::spectral::BlockTridiagonal;
use nalgebra::{Complex, DMatrix};
use rand::Rng;

pub type C64 = Complex<f64>;

pub fn random_hermitian<R: Rng>(rng: &mut R, p: usize, scale: f64) -> CMat {
    let mut m = CMat::zeros(p, p);
    for i in 0..p {
        m[(i, i)] = C64::new(rng.gen_range(-scale..scale), 0.0);
        for j in i + 1..p {
            let v = C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    m
}

pub fn random_general<R: Rng>(rng: &mut R, p: usize, scale: f64) -> CMat {
    CMat::from_fn(p, p, |_, _| C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
}

/// Data with `n` intervals, gaps in `[0.1, 2]` and random Hermitian couplings.
pub fn random_data<R: Rng>(rng: &mut R, p: usize, n: usize) -> InteractionData {
    let mut x = vec![0.0];
    for _ in 0..n {
        let last = *x.last().unwrap();
        x.push(last + rng.gen_range(0.1..2.0));
    }
    let lambda = (1..n).map(|_| random_hermitian(rng, p, 3.0)).collect();
    InteractionData::new(x, lambda, p).unwrap()
}

pub fn random_block_tridiagonal<R: Rng>(rng: &mut R, p: usize, n: usize) -> BlockTridiagonal {
    let diag = (0..n).map(|_| random_hermitian(rng, p, 2.0)).collect();
    let upper = (1..n).map(|_| random_general(rng, p, 1.0)).collect();
    BlockTridiagonal::new(diag, upper).unwrap()
}

pub fn to_nalgebra(m: &CMat) -> DMatrix<C64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Ascending eigenvalues from nalgebra's Hermitian eigensolver.
pub fn dense_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut e: Vec<f64> = to_nalgebra(m).symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}
