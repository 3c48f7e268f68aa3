//! One-sided Jacobi SVD.
//!
//! Used for every rank, least-squares and null-space computation in the
//! crate: it is accurate for the tall, clustered-spectrum matrices that power
//! bases and design constraint systems produce.

use nalgebra::{DMatrix, DVector};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(σ) Vᵀ` with `σ` sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m × k`, `k = min(m, n)`. Columns for zero singular values are zero.
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    /// `n × k`, orthonormal columns.
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (m, n) = a.shape();
        if m >= n {
            let (u, s, v) = jacobi_tall(a.clone());
            Svd {
                u,
                singular_values: s,
                v,
            }
        } else {
            let (u, s, v) = jacobi_tall(a.transpose());
            Svd {
                u: v,
                singular_values: s,
                v: u,
            }
        }
    }

    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.iter().copied().fold(0.0, f64::max)
    }
}

/// Jacobi iteration on the columns of a tall `a`; returns `(U, σ, V)` with
/// `V` square.
fn jacobi_tall(mut a: DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let n = a.ncols();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if alpha == 0.0
                    || beta == 0.0
                    || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut a, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u = DMatrix::zeros(a.nrows(), n);
    let mut vs = DMatrix::zeros(n, n);
    let mut sigma = DVector::zeros(n);
    for (out, &k) in order.iter().enumerate() {
        sigma[out] = norms[k];
        if norms[k] > 0.0 {
            u.set_column(out, &(a.column(k) / norms[k]));
        }
        vs.set_column(out, &v.column(k));
    }
    (u, sigma, vs)
}

fn rotate_columns(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let (x, y) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = c * x - s * y;
        m[(i, q)] = s * x + c * y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, random_orthonormal, seeded_rng};

    fn check(a: &DMatrix<f64>) {
        let svd = Svd::new(a);
        let k = a.nrows().min(a.ncols());
        assert_eq!(svd.singular_values.len(), k);
        let rec = &svd.u * DMatrix::from_diagonal(&svd.singular_values) * svd.v.transpose();
        assert!((rec - a).norm() < 1e-13 * (1.0 + a.norm()));
        assert!((svd.v.transpose() * &svd.v - DMatrix::<f64>::identity(k, k)).norm() < 1e-13);
        assert!(svd
            .singular_values
            .as_slice()
            .windows(2)
            .all(|w| w[0] >= w[1]));
    }

    #[test]
    fn tall_wide_and_square() {
        let mut rng = seeded_rng(4);
        for (m, n) in [(64, 9), (25, 15), (9, 4), (4, 9), (6, 6), (1, 3), (3, 1)] {
            for _ in 0..10 {
                check(&gaussian_matrix(m, n, &mut rng));
            }
        }
    }

    #[test]
    fn clustered_singular_values() {
        let u = random_orthonormal(25, 1).columns(0, 15).into_owned();
        let v = random_orthonormal(15, 2);
        let s = DVector::from_fn(15, |i, _| if i < 10 { 2f64.sqrt() } else { 1.0 });
        check(&(u * DMatrix::from_diagonal(&s) * v.transpose()));
    }

    #[test]
    fn zero_and_rank_one() {
        check(&DMatrix::zeros(3, 2));
        let svd = Svd::new(&DMatrix::from_element(3, 3, 1.0));
        assert!((svd.singular_values[0] - 3.0).abs() < 1e-14);
        assert!(svd.singular_values[1] < 1e-15);
    }
}
