use nalgebra::{DMatrix, DVector};

use super::{ensure_finite, random_orthonormal, symmetric_eigen};
use crate::{Error, Result};

/// Maximum entry of `|UᵀU − I|` accepted for an orthonormal basis.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Orthonormal `n × r` basis `U∥` of the target subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    columns: DMatrix<f64>,
}

impl SubspaceBasis {
    /// Wraps `columns` after checking `1 ≤ r ≤ n` and `UᵀU = I` entrywise
    /// within [`ORTHONORMAL_TOL`].
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let (n, r) = columns.shape();
        if n == 0 || r == 0 || r > n {
            return Err(Error::InvalidInput(format!(
                "basis must be n×r with 1 ≤ r ≤ n, got {n}×{r}"
            )));
        }
        ensure_finite(&columns, "basis")?;
        let gram = columns.transpose() * &columns;
        let max_deviation = (gram - DMatrix::<f64>::identity(r, r)).amax();
        if max_deviation > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { max_deviation });
        }
        Ok(Self { columns })
    }

    /// The first `r` canonical vectors `e₁, …, e_r` of `Rⁿ`.
    pub fn canonical(n: usize, r: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, r))
    }

    /// The consensus subspace `span(1)`, normalized as `1/√n`.
    pub fn consensus(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("consensus basis needs n ≥ 1".into()));
        }
        Self::new(DMatrix::from_element(n, 1, 1.0 / (n as f64).sqrt()))
    }

    /// First `r` columns of [`random_orthonormal`]`(n, seed)`.
    pub fn random(n: usize, r: usize, seed: u64) -> Result<Self> {
        if r == 0 || r > n {
            return Err(Error::InvalidInput(format!(
                "need 1 ≤ r ≤ n, got r={r}, n={n}"
            )));
        }
        Self::new(random_orthonormal(n, seed).columns(0, r).into_owned())
    }

    pub fn n(&self) -> usize {
        self.columns.nrows()
    }

    pub fn r(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.columns
    }
}

/// Orthogonal projector `P = U∥U∥ᵀ` onto the span of a [`SubspaceBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: DMatrix<f64>,
    rank: usize,
}

impl Projector {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }
}

/// `U∥U∥ᵀ`. Orthonormality was checked when the basis was built.
pub fn projector(basis: &SubspaceBasis) -> Projector {
    let u = basis.columns();
    let mut matrix = u * u.transpose();
    // Remove roundoff asymmetry so that P = Pᵀ holds to the last bit.
    let sym = (&matrix + matrix.transpose()) * 0.5;
    matrix.copy_from(&sym);
    Projector {
        matrix,
        rank: basis.r(),
    }
}

/// Orthonormal basis `U⊥` of the orthogonal complement of `span(U∥)`.
///
/// Taken from the eigenvectors of `I − P` for its `n − r` unit eigenvalues.
pub fn orthonormal_complement(basis: &SubspaceBasis) -> Result<SubspaceBasis> {
    let (n, r) = (basis.n(), basis.r());
    if r == n {
        return Err(Error::EmptyComplement(n));
    }
    let complement_projector = DMatrix::<f64>::identity(n, n) - projector(basis).matrix;
    let (_, vectors) = symmetric_eigen(&complement_projector);
    // Eigenvalues are sorted ascending: r zeros followed by n − r ones.
    SubspaceBasis::new(vectors.columns(r, n - r).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{numerical_rank, DEFAULT_RANK_TOL};
    use approx::assert_abs_diff_eq;

    #[test]
    fn canonical_projector() {
        let p = projector(&SubspaceBasis::canonical(4, 2).unwrap());
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]));
        assert_eq!(p.matrix(), &expected);

        let p = projector(&SubspaceBasis::canonical(2, 1).unwrap());
        assert_eq!(
            p.matrix(),
            &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])
        );
    }

    #[test]
    fn random_projector_invariants() {
        let basis = SubspaceBasis::random(5, 2, 3).unwrap();
        let p = projector(&basis);
        let m = p.matrix();
        assert!((m * m - m).norm() < 1e-10);
        assert!((m - m.transpose()).norm() < 1e-12);
        assert_eq!(numerical_rank(m, DEFAULT_RANK_TOL), 2);
    }

    #[test]
    fn non_orthonormal_basis_names_deviation() {
        let cols = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 0.0, 1.0, 0.0, 0.0]);
        match SubspaceBasis::new(cols) {
            Err(Error::NotOrthonormal { max_deviation }) => {
                assert_abs_diff_eq!(max_deviation, 0.5, epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SubspaceBasis::new(DMatrix::zeros(3, 0)).is_err());
        assert!(SubspaceBasis::new(DMatrix::identity(2, 3)).is_err());
        assert!(SubspaceBasis::random(3, 4, 0).is_err());
    }

    #[test]
    fn complement_of_canonical_basis() {
        let basis = SubspaceBasis::canonical(4, 2).unwrap();
        let perp = orthonormal_complement(&basis).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 0.0, 1.0, 1.0]));
        assert!((projector(&perp).matrix() - expected).norm() < 1e-12);

        let perp = orthonormal_complement(&SubspaceBasis::canonical(2, 1).unwrap()).unwrap();
        assert_abs_diff_eq!(perp.columns()[(0, 0)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(perp.columns()[(1, 0)].abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn complement_of_random_basis() {
        let basis = SubspaceBasis::random(6, 3, 5).unwrap();
        let perp = orthonormal_complement(&basis).unwrap();
        assert_eq!(perp.r(), 3);
        assert!((perp.columns().transpose() * basis.columns()).amax() < 1e-10);
        let sum = projector(&basis).matrix() + projector(&perp).matrix();
        assert!((sum - DMatrix::<f64>::identity(6, 6)).norm() < 1e-9);
    }

    #[test]
    fn full_basis_has_empty_complement() {
        let basis = SubspaceBasis::canonical(3, 3).unwrap();
        assert_eq!(
            orthonormal_complement(&basis),
            Err(Error::EmptyComplement(3))
        );
    }

    #[test]
    fn projector_invariant_under_basis_rotation() {
        for trial in 0..20 {
            let basis = SubspaceBasis::random(6, 3, trial).unwrap();
            let q = crate::linalg::random_orthonormal(3, 1000 + trial);
            let rotated = SubspaceBasis::new(basis.columns() * q).unwrap();
            let diff = projector(&basis).matrix() - projector(&rotated).matrix();
            assert!(diff.amax() < 1e-10);
        }
    }
}
