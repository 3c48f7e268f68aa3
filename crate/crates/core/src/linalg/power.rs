use nalgebra::DMatrix;

use super::{ensure_square, numerical_rank, vec};
use crate::{Error, Result};

/// `n² × (m+1)` matrix whose column `l` is `vec(Zˡ)`.
///
/// By Cayley–Hamilton every power `Z^{n+k}` is a combination of lower ones, so
/// the rank of this matrix never exceeds `n`, however large `m` is.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerBasisMatrix {
    columns: DMatrix<f64>,
    source_dim: usize,
}

impl PowerBasisMatrix {
    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    /// Highest power `m` stored.
    pub fn max_exponent(&self) -> usize {
        self.columns.ncols() - 1
    }

    pub fn rank(&self, rtol: f64) -> usize {
        numerical_rank(&self.columns, rtol)
    }

    /// The submatrix keeping only `rows` (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Result<DMatrix<f64>> {
        let n2 = self.columns.nrows();
        if let Some(&bad) = rows.iter().find(|&&r| r >= n2) {
            return Err(Error::InvalidInput(format!(
                "row {bad} out of range 0..{n2}"
            )));
        }
        Ok(self.columns.select_rows(rows))
    }

    /// Indices of `vec` rows that hold upper-triangular entries `(i, j)`, `i ≤ j`.
    pub fn upper_triangular_rows(&self) -> Vec<usize> {
        let n = self.source_dim;
        (0..n)
            .flat_map(|j| (0..=j).map(move |i| j * n + i))
            .collect()
    }
}

/// Stacks `vec(Z⁰), …, vec(Zᵐ)`, computing powers by repeated multiplication.
pub fn power_basis(z: &DMatrix<f64>, m: usize) -> Result<PowerBasisMatrix> {
    let n = ensure_square(z, "Z")?;
    let mut columns = DMatrix::zeros(n * n, m + 1);
    let mut power = DMatrix::<f64>::identity(n, n);
    columns.set_column(0, &vec(&power));
    for l in 1..=m {
        power = &power * z;
        if power.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericOverflow { power: l });
        }
        columns.set_column(l, &vec(&power));
    }
    Ok(PowerBasisMatrix {
        columns,
        source_dim: n,
    })
}
