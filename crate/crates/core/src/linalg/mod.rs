//! Dense numerical kernels shared by the rest of the crate.
//!
//! Matrices are `nalgebra::DMatrix<f64>`. Vectorization is column-major
//! throughout: `vec(A)` stacks the columns of `A`, which is also nalgebra's
//! storage order.

mod power;
mod schur;
mod subspace;
mod svd;

pub use power::{power_basis, PowerBasisMatrix};
pub use schur::{schur_decompose, SchurForm, SUBDIAGONAL_TOL};
pub use subspace::{orthonormal_complement, projector, Projector, SubspaceBasis, ORTHONORMAL_TOL};
pub use svd::Svd;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Relative singular-value threshold used by [`numerical_rank`] when no
/// other tolerance is requested.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Deterministic generator used for every seeded draw in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard normal entries, filled column by column.
pub fn gaussian_matrix<R: rand::Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = StandardNormal.sample(rng);
        }
    }
    m
}

/// Seeded random `n × n` orthogonal matrix.
///
/// Obtained from the QR factorization of a Gaussian matrix with the signs of
/// `R`'s diagonal folded into `Q`, which makes the output Haar distributed and
/// a deterministic function of `seed`.
pub fn random_orthonormal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = seeded_rng(seed);
    let g = gaussian_matrix(n, n, &mut rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Column-major vectorization.
pub fn vec(a: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vec`] for square matrices.
pub fn unvec(v: &DVector<f64>, n: usize) -> Result<DMatrix<f64>> {
    if v.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: format!("vector of length {}", n * n),
            actual: format!("length {}", v.len()),
        });
    }
    Ok(DMatrix::from_column_slice(n, n, v.as_slice()))
}

/// Number of singular values above `rtol · σ_max`.
pub fn numerical_rank(a: &DMatrix<f64>, rtol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let svd = Svd::new(a);
    let smax = svd.max_singular_value();
    if smax == 0.0 || !smax.is_finite() {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > rtol * smax)
        .count()
}

/// Minimum-norm least-squares solution of `a x ≈ b`.
///
/// Singular values below `rtol · σ_max` are treated as zero, so rank-deficient
/// systems are solved rather than rejected.
pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>, rtol: f64) -> DVector<f64> {
    let cols = a.ncols();
    if a.is_empty() {
        return DVector::zeros(cols);
    }
    let svd = Svd::new(a);
    let smax = svd.max_singular_value();
    let mut x = DVector::zeros(cols);
    if smax == 0.0 {
        return x;
    }
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > rtol * smax {
            let coef = svd.u.column(k).dot(b) / s;
            x.axpy(coef, &svd.v.column(k), 1.0);
        }
    }
    x
}

/// Orthonormal basis (as columns) of the null space of `a`.
///
/// Singular values at or below `rtol · max(σ_max, 1)` count as zero.
pub fn null_space(a: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let cols = a.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad with zero rows so the SVD returns a full set of right singular vectors.
    let rows = a.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
    let svd = Svd::new(&padded);
    let cutoff = rtol * svd.max_singular_value().max(1.0);
    let kept: Vec<usize> = (0..cols)
        .filter(|&k| svd.singular_values[k] <= cutoff)
        .collect();
    svd.v.select_columns(&kept)
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn symmetric_eigen(s: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = s.nrows();
    let eig = SymmetricEigen::new(s.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (out, &k) in order.iter().enumerate() {
        vectors.set_column(out, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// `‖A − Aᵀ‖_F`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).norm()
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    Svd::new(a).max_singular_value()
}

pub(crate) fn ensure_square(a: &DMatrix<f64>, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput(format!(
            "{what} must be square, got {}×{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

pub(crate) fn ensure_finite(a: &DMatrix<f64>, what: &str) -> Result<()> {
    if let Some(pos) = a.iter().position(|x| !x.is_finite()) {
        let (i, j) = (pos % a.nrows(), pos / a.nrows());
        return Err(Error::InvalidInput(format!(
            "{what} has a non-finite entry at ({i}, {j})"
        )));
    }
    Ok(())
}
