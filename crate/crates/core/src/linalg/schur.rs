//! Real Schur form `S = W (D + Q) Wᵀ`.
//!
//! The Francis iteration comes from `nalgebra::linalg::Schur`. Its output is
//! post-processed so that every 2×2 diagonal block is in standard form (equal
//! diagonal entries, off-diagonal entries of opposite sign), which makes `D`
//! carry the real parts of the eigenvalues.

use nalgebra::{Complex, DMatrix, DVector};

use super::{ensure_finite, ensure_square};
use crate::{Error, Result};

/// Absolute threshold under which a subdiagonal entry of `D + Q` counts as zero
/// when detecting 2×2 blocks.
pub const SUBDIAGONAL_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 10_000;

/// Orthogonal `W` and quasi-upper-triangular `T = D + Q` with `S = W T Wᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurForm {
    pub w: DMatrix<f64>,
    /// Diagonal part of `T`, stored as a full diagonal matrix.
    pub d: DMatrix<f64>,
    /// `T` with its diagonal removed.
    pub q: DMatrix<f64>,
}

/// A diagonal block of the quasi-triangular factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagonalBlock {
    pub start: usize,
    pub size: usize,
}

impl SchurForm {
    /// Builds a form from explicit factors, e.g. a hand-made construction.
    pub fn from_parts(w: DMatrix<f64>, d: DMatrix<f64>, q: DMatrix<f64>) -> Result<Self> {
        let n = ensure_square(&w, "W")?;
        for (m, name) in [(&d, "D"), (&q, "Q")] {
            if m.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    expected: format!("{n}×{n} {name}"),
                    actual: format!("{}×{}", m.nrows(), m.ncols()),
                });
            }
        }
        Ok(Self { w, d, q })
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    /// `T = D + Q`.
    pub fn t(&self) -> DMatrix<f64> {
        &self.d + &self.q
    }

    pub fn diagonal(&self) -> DVector<f64> {
        self.d.diagonal()
    }

    /// `W (D + Q) Wᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.w * self.t() * self.w.transpose()
    }

    /// `max |WᵀW − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.n();
        (self.w.transpose() * &self.w - DMatrix::<f64>::identity(n, n)).amax()
    }

    /// Zero below the first subdiagonal, and no two consecutive nonzero
    /// subdiagonal entries (each nonzero one opens an isolated 2×2 block).
    pub fn is_quasi_upper_triangular(&self, tol: f64) -> bool {
        let t = self.t();
        let n = self.n();
        for j in 0..n {
            for i in (j + 2)..n {
                if t[(i, j)].abs() > tol {
                    return false;
                }
            }
        }
        (1..n.saturating_sub(1)).all(|k| !(t[(k, k - 1)].abs() > tol && t[(k + 1, k)].abs() > tol))
    }

    /// Diagonal blocks in order, using [`SUBDIAGONAL_TOL`].
    pub fn blocks(&self) -> Vec<DiagonalBlock> {
        let t = self.t();
        let n = self.n();
        let mut blocks = Vec::new();
        let mut k = 0;
        while k < n {
            let size = if k + 1 < n && t[(k + 1, k)].abs() > SUBDIAGONAL_TOL {
                2
            } else {
                1
            };
            blocks.push(DiagonalBlock { start: k, size });
            k += size;
        }
        blocks
    }

    /// Eigenvalues read off the diagonal blocks.
    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        let t = self.t();
        let mut out = Vec::with_capacity(self.n());
        for b in self.blocks() {
            let k = b.start;
            if b.size == 1 {
                out.push(Complex::new(t[(k, k)], 0.0));
            } else {
                let (a, bb, c, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
                let mean = 0.5 * (a + d);
                let disc = 0.25 * (a - d) * (a - d) + bb * c;
                if disc >= 0.0 {
                    out.push(Complex::new(mean + disc.sqrt(), 0.0));
                    out.push(Complex::new(mean - disc.sqrt(), 0.0));
                } else {
                    out.push(Complex::new(mean, (-disc).sqrt()));
                    out.push(Complex::new(mean, -(-disc).sqrt()));
                }
            }
        }
        out
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Real Schur decomposition of a square matrix.
pub fn schur_decompose(s: &DMatrix<f64>) -> Result<SchurForm> {
    let n = ensure_square(s, "matrix")?;
    if n == 0 {
        return Err(Error::InvalidInput("matrix must be non-empty".into()));
    }
    ensure_finite(s, "matrix")?;

    let schur = nalgebra::linalg::Schur::try_new(s.clone(), f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::NoConvergence("Schur iteration"))?;
    let (mut w, mut t) = schur.unpack();

    let scale = t.norm().max(f64::MIN_POSITIVE);
    for j in 0..n {
        for i in (j + 1)..n {
            if i > j + 1 || t[(i, j)].abs() <= f64::EPSILON * scale {
                t[(i, j)] = 0.0;
            }
        }
    }

    let mut k = 0;
    while k + 1 < n {
        if t[(k + 1, k)] == 0.0 {
            k += 1;
            continue;
        }
        let complex_pair = standardize_block(&mut t, &mut w, k);
        k += if complex_pair { 2 } else { 1 };
    }

    let d = DMatrix::from_diagonal(&t.diagonal());
    let q = &t - &d;
    let form = SchurForm { w, d, q };
    if !form.is_quasi_upper_triangular(SUBDIAGONAL_TOL * (1.0 + scale)) {
        return Err(Error::NoConvergence(
            "Schur iteration (quasi-triangular structure)",
        ));
    }
    Ok(form)
}

/// Rotates the 2×2 block at `(k, k)` into standard form, updating `t` and `w`
/// in place. Returns `true` when the block holds a complex-conjugate pair and
/// `false` when it was split into two real 1×1 blocks.
fn standardize_block(t: &mut DMatrix<f64>, w: &mut DMatrix<f64>, k: usize) -> bool {
    let (a, b, c, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
    let std = standardize_2x2(a, b, c, d);
    rotate(t, w, k, std.cs, std.sn);
    t[(k, k)] = std.a;
    t[(k, k + 1)] = std.b;
    t[(k + 1, k)] = std.c;
    t[(k + 1, k + 1)] = std.d;
    std.c != 0.0
}

/// `t ← Gᵀ t G` and `w ← w G`, with `G` the plane rotation
/// `[[cs, −sn], [sn, cs]]` acting on coordinates `k, k+1`.
fn rotate(t: &mut DMatrix<f64>, w: &mut DMatrix<f64>, k: usize, cs: f64, sn: f64) {
    let n = t.nrows();
    for j in 0..n {
        let (x, y) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = cs * x + sn * y;
        t[(k + 1, j)] = -sn * x + cs * y;
    }
    for m in [&mut *t, &mut *w] {
        for i in 0..n {
            let (x, y) = (m[(i, k)], m[(i, k + 1)]);
            m[(i, k)] = cs * x + sn * y;
            m[(i, k + 1)] = -sn * x + cs * y;
        }
    }
}

struct Standardized {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    cs: f64,
    sn: f64,
}

/// Standardization of a real 2×2 block, following LAPACK's `dlanv2`.
///
/// Returns the rotation `(cs, sn)` and the new block with
/// `[[a, b], [c, d]]_old = R [[a, b], [c, d]]_new Rᵀ`, `R = [[cs, −sn], [sn, cs]]`.
fn standardize_2x2(mut a: f64, mut b: f64, mut c: f64, mut d: f64) -> Standardized {
    let eps = f64::EPSILON;
    let (mut cs, mut sn);
    if c == 0.0 {
        cs = 1.0;
        sn = 0.0;
    } else if b == 0.0 {
        cs = 0.0;
        sn = 1.0;
        std::mem::swap(&mut a, &mut d);
        b = -c;
        c = 0.0;
    } else if a - d == 0.0 && b.signum() != c.signum() {
        cs = 1.0;
        sn = 0.0;
    } else {
        let temp = a - d;
        let mut p = 0.5 * temp;
        let bcmax = b.abs().max(c.abs());
        let bcmis = b.abs().min(c.abs()) * b.signum() * c.signum();
        let scale = p.abs().max(bcmax);
        let mut z = p / scale * p + bcmax / scale * bcmis;
        if z >= 4.0 * eps {
            // Real eigenvalues: rotate to upper triangular.
            z = p + p.signum() * scale.sqrt() * z.sqrt();
            a = d + z;
            d -= bcmax / z * bcmis;
            let tau = c.hypot(z);
            cs = z / tau;
            sn = c / tau;
            b -= c;
            c = 0.0;
        } else {
            // Complex or nearly equal real eigenvalues: equalize the diagonal.
            let sigma = b + c;
            let tau = sigma.hypot(temp);
            cs = (0.5 * (1.0 + sigma.abs() / tau)).sqrt();
            sn = -(p / (tau * cs)) * sigma.signum();

            let aa = a * cs + b * sn;
            let bb = -a * sn + b * cs;
            let cc = c * cs + d * sn;
            let dd = -c * sn + d * cs;

            a = aa * cs + cc * sn;
            b = bb * cs + dd * sn;
            c = -aa * sn + cc * cs;
            d = -bb * sn + dd * cs;

            let mid = 0.5 * (a + d);
            a = mid;
            d = mid;

            if c != 0.0 {
                if b != 0.0 {
                    if b.signum() == c.signum() {
                        let sab = b.abs().sqrt();
                        let sac = c.abs().sqrt();
                        p = c.signum() * sab * sac;
                        let tau = 1.0 / (b + c).abs().sqrt();
                        a = mid + p;
                        d = mid - p;
                        b -= c;
                        c = 0.0;
                        let cs1 = sab * tau;
                        let sn1 = sac * tau;
                        let t = cs * cs1 - sn * sn1;
                        sn = cs * sn1 + sn * cs1;
                        cs = t;
                    }
                } else {
                    b = -c;
                    c = 0.0;
                    let t = cs;
                    cs = -sn;
                    sn = t;
                }
            }
        }
    }
    Standardized { a, b, c, d, cs, sn }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, seeded_rng, symmetric_eigen};
    use approx::assert_abs_diff_eq;

    fn check_invariants(s: &DMatrix<f64>, f: &SchurForm) {
        assert!(f.orthogonality_error() < 1e-10);
        assert!(f.is_quasi_upper_triangular(SUBDIAGONAL_TOL));
        let err = (f.reconstruct() - s).norm();
        assert!(err < 1e-9 * (1.0 + s.norm()), "reconstruction error {err}");
        for b in f.blocks().iter().filter(|b| b.size == 2) {
            let t = f.t();
            let k = b.start;
            assert_eq!(t[(k, k)], t[(k + 1, k + 1)]);
            assert!(t[(k, k + 1)] * t[(k + 1, k)] < 0.0);
        }
    }

    #[test]
    fn symmetric_input_gives_diagonal_eigenvalues() {
        let mut rng = seeded_rng(2);
        let g = gaussian_matrix(5, 5, &mut rng);
        let s = &g + g.transpose();
        let f = schur_decompose(&s).unwrap();
        check_invariants(&s, &f);
        assert!(f.blocks().iter().all(|b| b.size == 1));
        for j in 0..5 {
            for i in (j + 1)..5 {
                assert!(f.q[(i, j)].abs() < 1e-10);
            }
        }
        let mut from_schur: Vec<f64> = f.diagonal().iter().copied().collect();
        from_schur.sort_by(f64::total_cmp);
        let (expected, _) = symmetric_eigen(&s);
        for (a, b) in from_schur.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn rotation_gives_single_standard_block() {
        let s = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let f = schur_decompose(&s).unwrap();
        check_invariants(&s, &f);
        assert_eq!(f.blocks(), vec![DiagonalBlock { start: 0, size: 2 }]);
        assert_abs_diff_eq!(f.d[(0, 0)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.d[(1, 1)], 0.0, epsilon = 1e-14);
        let eig = f.eigenvalues();
        assert_abs_diff_eq!(eig[0].im.abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn random_matrices_round_trip() {
        for seed in 0..100u64 {
            let n = 1 + (seed % 8) as usize;
            let mut rng = seeded_rng(seed);
            let s = gaussian_matrix(n, n, &mut rng);
            let f = schur_decompose(&s).unwrap();
            check_invariants(&s, &f);
        }
    }

    #[test]
    fn standardize_real_pair_triangularizes() {
        let (a, b, c, d) = (1.0, 2.0, 3.0, 4.0);
        let s = standardize_2x2(a, b, c, d);
        assert_eq!(s.c, 0.0);
        let r = DMatrix::from_row_slice(2, 2, &[s.cs, -s.sn, s.sn, s.cs]);
        let new = DMatrix::from_row_slice(2, 2, &[s.a, s.b, s.c, s.d]);
        let old = &r * new * r.transpose();
        assert!((old - DMatrix::from_row_slice(2, 2, &[a, b, c, d])).norm() < 1e-12);
    }

    #[test]
    fn standardize_complex_pair_equalizes_diagonal() {
        let (a, b, c, d) = (1.0, -5.0, 2.0, 3.0);
        let s = standardize_2x2(a, b, c, d);
        assert_eq!(s.a, s.d);
        assert!(s.b * s.c < 0.0);
        let r = DMatrix::from_row_slice(2, 2, &[s.cs, -s.sn, s.sn, s.cs]);
        let new = DMatrix::from_row_slice(2, 2, &[s.a, s.b, s.c, s.d]);
        let old = &r * new * r.transpose();
        assert!((old - DMatrix::from_row_slice(2, 2, &[a, b, c, d])).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(matches!(
            schur_decompose(&DMatrix::zeros(2, 3)),
            Err(Error::InvalidInput(_))
        ));
        let mut s = DMatrix::zeros(2, 2);
        s[(0, 1)] = f64::INFINITY;
        assert!(schur_decompose(&s).is_err());
    }

    #[test]
    fn spectral_radius_of_companion() {
        // x² + 1: eigenvalues ±i.
        let s = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.5]);
        let f = schur_decompose(&s).unwrap();
        assert_abs_diff_eq!(f.spectral_radius(), 1.0, epsilon = 1e-12);
    }
}
