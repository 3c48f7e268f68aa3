#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use shiftproj::linalg::{
    gaussian_matrix, orthonormal_complement, random_orthonormal, seeded_rng, SubspaceBasis,
};

/// `k` distinct values from a grid on `[−0.9, 0.9]` with spacing 0.1.
pub fn spread_values(k: usize, seed: u64) -> Vec<f64> {
    assert!(k <= 19);
    let mut grid: Vec<f64> = (-9..=9).map(|i| i as f64 / 10.0).collect();
    grid.shuffle(&mut seeded_rng(seed));
    grid.truncate(k);
    grid
}

/// `S = U∥ A U∥ᵀ + U⊥ B U⊥ᵀ` with `eig(A) = par`, `eig(B) = perp` in random
/// eigenbases. Needs `1 ≤ r < n`.
pub fn invariant_shift(
    basis: &SubspaceBasis,
    par: &[f64],
    perp: &[f64],
    seed: u64,
) -> DMatrix<f64> {
    let complement = orthonormal_complement(basis).unwrap();
    let block = |u: &DMatrix<f64>, vals: &[f64], seed: u64| {
        let v = random_orthonormal(vals.len(), seed);
        let inner = &v * DMatrix::from_diagonal(&DVector::from_row_slice(vals)) * v.transpose();
        u * inner * u.transpose()
    };
    let s =
        block(basis.columns(), par, seed) + block(complement.columns(), perp, seed.wrapping_add(7));
    (&s + s.transpose()) * 0.5
}

pub fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let g = gaussian_matrix(n, n, &mut seeded_rng(seed));
    (&g + g.transpose()) * 0.5
}

pub fn random_signal(n: usize, seed: u64) -> DVector<f64> {
    gaussian_matrix(n, 1, &mut seeded_rng(seed))
        .column(0)
        .into_owned()
}
