//! Executable counterexamples to the Schur-based feasibility conditions for
//! asymmetric polynomial shifts.
//!
//! Each builder returns the constructed matrices together with a
//! [`CounterexampleReport`] whose claims are measured, not asserted.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::linalg::{
    asymmetry, gaussian_matrix, lstsq_min_norm, numerical_rank, power_basis, projector,
    random_orthonormal, schur_decompose, seeded_rng, vec, SchurForm, SubspaceBasis,
    DEFAULT_RANK_TOL, SUBDIAGONAL_TOL,
};
use crate::polynomial::{
    is_polynomial_shift, FilterCoefficients, ShiftMatrix, DEFAULT_POLYNOMIAL_TOL,
};
use crate::report::{CounterexampleReport, Relation};
use crate::{Error, Result};

/// Default threshold for identities that hold exactly in real arithmetic.
pub const DEFAULT_IDENTITY_TOL: f64 = 1e-10;

/// Choice of the orthonormal vectors `u₁, …, u₄`, which the construction
/// leaves arbitrary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// `uᵢ = eᵢ`.
    Canonical,
    /// Columns of [`random_orthonormal`]`(4, seed)`.
    Seeded(u64),
}

impl Frame {
    fn vectors(self) -> DMatrix<f64> {
        match self {
            Frame::Canonical => DMatrix::identity(4, 4),
            Frame::Seeded(seed) => random_orthonormal(4, seed),
        }
    }

    pub fn label(self) -> String {
        match self {
            Frame::Canonical => "canonical".into(),
            Frame::Seeded(seed) => format!("seed {seed}"),
        }
    }
}

/// A hand-assembled shift `S = W (D + Q) Wᵀ` with its target subspace.
#[derive(Debug, Clone)]
pub struct Construction {
    pub schur: SchurForm,
    pub s: ShiftMatrix,
    pub basis: SubspaceBasis,
    pub complement: SubspaceBasis,
    pub report: CounterexampleReport,
}

impl Construction {
    pub fn w(&self) -> &DMatrix<f64> {
        &self.schur.w
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.schur.d
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.schur.q
    }

    /// Leading `r × r` diagonal block of `D`.
    pub fn d1(&self) -> DVector<f64> {
        let r = self.basis.r();
        self.schur.diagonal().rows(0, r).into_owned()
    }

    /// Trailing `(n − r) × (n − r)` diagonal block of `D`.
    pub fn d2(&self) -> DVector<f64> {
        let r = self.basis.r();
        let n = self.basis.n();
        self.schur.diagonal().rows(r, n - r).into_owned()
    }
}

/// Number of distinct values of `a` that also occur in `b` (within `tol`).
fn shared_values(a: &DVector<f64>, b: &DVector<f64>, tol: f64) -> usize {
    let mut distinct: Vec<f64> = Vec::new();
    for &x in a.iter() {
        if !distinct.iter().any(|&y| (x - y).abs() <= tol) {
            distinct.push(x);
        }
    }
    distinct
        .iter()
        .filter(|&&x| b.iter().any(|&y| (x - y).abs() <= tol))
        .count()
}

/// `W = [u₁, u₃, u₂, u₄]`, `D = diag(1, 0, 1, 0)` and the given `Q`.
fn assemble(frame: Frame, q: DMatrix<f64>, name: &str) -> Result<Construction> {
    let u = frame.vectors();
    let basis = SubspaceBasis::new(u.columns(0, 2).into_owned())?;
    let complement = SubspaceBasis::new(u.columns(2, 2).into_owned())?;
    let w = DMatrix::from_columns(&[u.column(0), u.column(2), u.column(1), u.column(3)]);
    let d = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 0.0, 1.0, 0.0]));
    let schur = SchurForm::from_parts(w, d, q)?;
    let s = ShiftMatrix::new(schur.reconstruct())?;
    Ok(Construction {
        schur,
        s,
        basis,
        complement,
        report: CounterexampleReport::new(name),
    })
}

/// Claims shared by both constructions about the block diagonals `D₁`, `D₂`.
fn check_shared_diagonal(c: &mut Construction, tol: f64) {
    let (d1, d2) = (c.d1(), c.d2());
    c.report.check(
        "distinct diagonal values shared by D1 and D2 (disproved 'necessary' condition violated)",
        shared_values(&d1, &d2, tol) as f64,
        Relation::AtLeast,
        1.0,
    );
    // As 2×2 diagonal matrices both contain the off-diagonal entry 0, so the
    // literal "share no common value" can never hold.
    let d1m = DMatrix::from_diagonal(&d1);
    let d2m = DMatrix::from_diagonal(&d2);
    c.report.flag(
        "D1 and D2, as matrices, both contain the entry 0",
        d1m.iter().any(|&x| x == 0.0) && d2m.iter().any(|&x| x == 0.0),
    );
    c.report.flag(
        "W(D+Q)Wᵀ is a valid real Schur form (W orthogonal, D+Q quasi-triangular)",
        c.schur.orthogonality_error() < DEFAULT_IDENTITY_TOL
            && c.schur.is_quasi_upper_triangular(SUBDIAGONAL_TOL),
    );
}

/// `min_c ‖Σ_{l<L} cₗ Tˡ − blockdiag(I_r, 0)‖_F`, the residual of the block-form
/// assumption on the triangular factor.
pub fn block_form_residual(t: &DMatrix<f64>, r: usize, order: usize) -> Result<f64> {
    let n = t.nrows();
    let pb = power_basis(t, order.saturating_sub(1))?;
    let mut target = DMatrix::zeros(n, n);
    target.view_mut((0, 0), (r, r)).fill_with_identity();
    let target = vec(&target);
    let c = lstsq_min_norm(pb.columns(), &target, 1e-12);
    Ok((pb.columns() * c - target).norm())
}

/// The symmetric counterexample: `D₁ = D₂ = diag(1, 0)`, `Q = 0`, giving
/// `S = U∥U∥ᵀ` even though `D₁` and `D₂` share both of their values.
pub fn build_c1(frame: Frame, tol: f64) -> Result<Construction> {
    let mut c = assemble(
        frame,
        DMatrix::zeros(4, 4),
        &format!("symmetric counterexample ({})", frame.label()),
    )?;
    let p = projector(&c.basis);
    c.report.check(
        "‖S − U∥U∥ᵀ‖_F",
        (c.s.matrix() - p.matrix()).norm(),
        Relation::LessThan,
        tol,
    );
    check_shared_diagonal(&mut c, tol);

    let ls = is_polynomial_shift(&c.s, &c.basis, 2, DEFAULT_POLYNOMIAL_TOL)?;
    c.report.check(
        "least-squares residual for L = 2 (S is a polynomial shift)",
        ls.residual,
        Relation::LessThan,
        DEFAULT_POLYNOMIAL_TOL * (1.0 + p.matrix().norm()),
    );
    c.report.check(
        "min_c ‖Σ cₗ (D+Q)ˡ − blockdiag(I₂, 0)‖_F (block-form assumption fails)",
        block_form_residual(&c.schur.t(), 2, 4)?,
        Relation::GreaterThan,
        0.5,
    );
    Ok(c)
}

/// The asymmetric variant: as [`build_c1`] but with `(Q)₂,₄ = 1`, so that
/// `S ≠ Sᵀ` and `S² = U∥U∥ᵀ`.
pub fn build_c1_asymmetric(frame: Frame, tol: f64) -> Result<Construction> {
    let mut q = DMatrix::zeros(4, 4);
    q[(1, 3)] = 1.0;
    let mut c = assemble(
        frame,
        q,
        &format!("asymmetric counterexample ({})", frame.label()),
    )?;
    let p = projector(&c.basis);
    let s = c.s.matrix().clone();

    c.report.check(
        "‖S² − U∥U∥ᵀ‖_F",
        (&s * &s - p.matrix()).norm(),
        Relation::LessThan,
        tol,
    );
    c.report.check(
        "‖S − Sᵀ‖_F (S is asymmetric)",
        asymmetry(&s),
        Relation::GreaterThan,
        0.1,
    );

    let ls = is_polynomial_shift(&c.s, &c.basis, 3, DEFAULT_POLYNOMIAL_TOL)?;
    c.report.check(
        "least-squares residual for L = 3 (S is a polynomial shift)",
        ls.residual,
        Relation::LessThan,
        DEFAULT_POLYNOMIAL_TOL * (1.0 + p.matrix().norm()),
    );
    let explicit = FilterCoefficients::new(vec![0.0, 0.0, 1.0])?;
    c.report.check(
        "‖Σ cₗ Sˡ − U∥U∥ᵀ‖_F for c = (0, 0, 1)",
        (explicit.filter_matrix(&s) - p.matrix()).norm(),
        Relation::LessThan,
        tol,
    );
    check_shared_diagonal(&mut c, tol);

    let redo = schur_decompose(&s)?;
    c.report.check(
        "Schur re-decomposition reconstruction error (relative)",
        (redo.reconstruct() - &s).norm() / (1.0 + s.norm()),
        Relation::LessThan,
        1e-9,
    );
    Ok(c)
}

/// Minimal least-squares residual of `Σ cₗ 0ˡ = P` and the check that the
/// zero matrix is a polynomial shift only when `r = n`.
pub fn zero_matrix_check(n: usize, r: usize, seed: u64, tol: f64) -> Result<CounterexampleReport> {
    if r == 0 || r > n {
        return Err(Error::InvalidInput(format!(
            "need 1 ≤ r ≤ n, got r={r}, n={n}"
        )));
    }
    let basis = SubspaceBasis::random(n, r, seed)?;
    let check = is_polynomial_shift(&ShiftMatrix::zeros(n)?, &basis, n, DEFAULT_POLYNOMIAL_TOL)?;
    let mut report = CounterexampleReport::new(format!("zero matrix (n={n}, r={r}, seed {seed})"));
    if r < n {
        report.flag("S = 0 is not a polynomial shift", !check.polynomial);
        // Only c₀ matters since 0ˡ = 0 for l ≥ 1; the optimum is c₀ = r/n.
        let closed_form = r as f64 * (1.0 - r as f64 / n as f64);
        report.check(
            "|residual² − r(1 − r/n)|",
            (check.residual * check.residual - closed_form).abs(),
            Relation::LessThan,
            tol,
        );
    } else {
        report.flag("S = 0 is a polynomial shift when P = I", check.polynomial);
        report.check(
            "|c₀ − 1|",
            (check.coeffs.taps()[0] - 1.0).abs(),
            Relation::LessThan,
            tol.max(1e-12),
        );
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct CayleyHamiltonSummary {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    /// Max numerical rank of `[vec Z⁰ … vec Zᵐ]` over Gaussian `Z`.
    pub max_rank_general: usize,
    /// Same for upper-triangular `Z = D + Q`.
    pub max_rank_triangular: usize,
    /// Max rank after keeping only the strictly-upper rows (a `T''`).
    pub max_rank_reduced: usize,
    /// Rows of that reduced matrix, `(n² − n)/2`.
    pub reduced_rows: usize,
    pub trials_at_full_rank: usize,
    #[serde(skip)]
    pub report: CounterexampleReport,
}

/// Numerical rank of power bases over seeded random matrices, each scaled to
/// unit spectral radius before taking powers.
pub fn cayley_hamilton_demo(
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<CayleyHamiltonSummary> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let mut rng = seeded_rng(seed);
    let strict_upper: Vec<usize> = (0..n)
        .flat_map(|j| (0..j).map(move |i| j * n + i))
        .collect();
    let mut summary = CayleyHamiltonSummary {
        n,
        m,
        trials,
        max_rank_general: 0,
        max_rank_triangular: 0,
        max_rank_reduced: 0,
        reduced_rows: strict_upper.len(),
        trials_at_full_rank: 0,
        report: CounterexampleReport::new(format!(
            "Cayley-Hamilton rank bound (n={n}, m={m}, {trials} trials)"
        )),
    };

    for _ in 0..trials {
        let z = normalize_radius(gaussian_matrix(n, n, &mut rng))?;
        let rank = power_basis(&z, m)?.rank(DEFAULT_RANK_TOL);
        summary.max_rank_general = summary.max_rank_general.max(rank);
        summary.trials_at_full_rank += usize::from(rank == n.min(m + 1));

        let mut t = gaussian_matrix(n, n, &mut rng) / (n as f64).sqrt();
        for j in 0..n {
            for i in j..n {
                t[(i, j)] = if i == j {
                    rng.random_range(-1.0..1.0)
                } else {
                    0.0
                };
            }
        }
        let t = normalize_radius(t)?;
        let pb = power_basis(&t, m)?;
        summary.max_rank_triangular = summary.max_rank_triangular.max(pb.rank(DEFAULT_RANK_TOL));
        let reduced = pb.select_rows(&strict_upper)?;
        summary.max_rank_reduced = summary
            .max_rank_reduced
            .max(numerical_rank(&reduced, DEFAULT_RANK_TOL));
    }

    let bound = n as f64;
    let r = &mut summary.report;
    r.check(
        "max rank, Gaussian Z",
        summary.max_rank_general as f64,
        Relation::AtMost,
        bound,
    );
    r.check(
        "max rank, triangular Z = D + Q",
        summary.max_rank_triangular as f64,
        Relation::AtMost,
        bound,
    );
    r.check(
        "max rank of row-reduced T''",
        summary.max_rank_reduced as f64,
        Relation::AtMost,
        bound,
    );
    if summary.reduced_rows > n {
        r.check(
            "max rank of T'' vs its row count (never full row rank)",
            summary.max_rank_reduced as f64,
            Relation::LessThan,
            summary.reduced_rows as f64,
        );
    }
    Ok(summary)
}

fn normalize_radius(z: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let radius = schur_decompose(&z)?.spectral_radius();
    Ok(if radius > 0.0 { z / radius } else { z })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VacuityVerdict {
    pub n: usize,
    pub m1_plus_m2: usize,
    /// `(n² + n)/2 − (m₁ + m₂)`, the rank the sufficient condition demands.
    pub n2: i64,
    /// Cayley–Hamilton bound on any power-basis rank.
    pub ch_bound: usize,
    /// `n2 > n`: the demanded rank exceeds what any power basis can reach.
    pub vacuous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

pub fn sufficiency_vacuity(n: usize, m1_plus_m2: usize) -> VacuityVerdict {
    let n2 = (n * n + n) as i64 / 2 - m1_plus_m2 as i64;
    let warning = (m1_plus_m2 > n).then(|| {
        format!("m1 + m2 = {m1_plus_m2} exceeds n = {n}; the lower bound on N2 no longer applies")
    });
    VacuityVerdict {
        n,
        m1_plus_m2,
        n2,
        ch_bound: n,
        vacuous: n2 > n as i64,
        warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn canonical_symmetric_construction_is_the_coordinate_projector() {
        let c = build_c1(Frame::Canonical, DEFAULT_IDENTITY_TOL).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 1.0, 0.0, 0.0]));
        assert_eq!(c.s.matrix(), &expected);
        assert!(c.report.overall, "{}", c.report);
        assert_eq!(c.d1().as_slice(), &[1.0, 0.0]);
        assert_eq!(c.d2().as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn seeded_symmetric_constructions_pass() {
        let c = build_c1(Frame::Seeded(1), DEFAULT_IDENTITY_TOL).unwrap();
        assert!(c.report.overall, "{}", c.report);
        let p = projector(&c.basis);
        assert!((c.s.matrix() - p.matrix()).norm() < 1e-10);
        assert!(
            is_polynomial_shift(&c.s, &c.basis, 2, DEFAULT_POLYNOMIAL_TOL)
                .unwrap()
                .polynomial
        );
    }

    #[test]
    fn block_form_residual_closed_form() {
        // T = diag(1,0,1,0): min ‖c₀I + c₁T − diag(1,1,0,0)‖_F = 1.
        let t = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 0.0, 1.0, 0.0]));
        assert_abs_diff_eq!(block_form_residual(&t, 2, 4).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn canonical_asymmetric_closed_form() {
        let c = build_c1_asymmetric(Frame::Canonical, DEFAULT_IDENTITY_TOL).unwrap();
        let mut expected = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 1.0, 0.0, 0.0]));
        expected[(2, 3)] = 1.0;
        assert_eq!(c.s.matrix(), &expected);
        let s = c.s.matrix();
        assert_eq!(
            s * s,
            DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 1.0, 0.0, 0.0]))
        );
        assert_abs_diff_eq!(asymmetry(s), 2f64.sqrt(), epsilon = 1e-15);
        assert!(c.report.overall, "{}", c.report);
    }

    #[test]
    fn seeded_asymmetric_passes() {
        let c = build_c1_asymmetric(Frame::Seeded(3), DEFAULT_IDENTITY_TOL).unwrap();
        assert!(c.report.overall, "{}", c.report);
    }

    #[test]
    fn unsatisfiable_tolerance_fails() {
        let c = build_c1_asymmetric(Frame::Seeded(3), 1e-30).unwrap();
        assert!(!c.report.overall);
    }

    #[test]
    fn zero_matrix_examples() {
        let r = zero_matrix_check(4, 2, 0, DEFAULT_IDENTITY_TOL).unwrap();
        assert!(r.overall, "{r}");
        let r = zero_matrix_check(4, 4, 0, DEFAULT_IDENTITY_TOL).unwrap();
        assert!(r.overall, "{r}");
        let r = zero_matrix_check(3, 1, 5, DEFAULT_IDENTITY_TOL).unwrap();
        assert!(r.overall, "{r}");
        assert!(zero_matrix_check(3, 4, 0, 1e-10).is_err());
    }

    #[test]
    fn zero_matrix_minimizer_is_r_over_n() {
        let basis = SubspaceBasis::random(4, 2, 9).unwrap();
        let check = is_polynomial_shift(&ShiftMatrix::zeros(4).unwrap(), &basis, 4, 1e-8).unwrap();
        assert_abs_diff_eq!(check.residual.powi(2), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(check.coeffs.taps()[0], 0.5, epsilon = 1e-12);
        let full = SubspaceBasis::random(4, 4, 9).unwrap();
        let check = is_polynomial_shift(&ShiftMatrix::zeros(4).unwrap(), &full, 4, 1e-8).unwrap();
        assert!(check.polynomial);
        assert_abs_diff_eq!(check.coeffs.taps()[0], 1.0, epsilon = 1e-12);
        assert!(check.coeffs.taps()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn cayley_hamilton_n4() {
        let s = cayley_hamilton_demo(4, 10, 100, 0).unwrap();
        assert!(s.report.overall, "{}", s.report);
        assert_eq!(s.max_rank_general, 4);
        assert!(s.max_rank_reduced <= 4);
        assert_eq!(s.reduced_rows, 6);
    }

    #[test]
    fn special_power_basis_ranks() {
        assert_eq!(
            power_basis(&DMatrix::identity(4, 4), 7)
                .unwrap()
                .rank(DEFAULT_RANK_TOL),
            1
        );
        let mut nil = DMatrix::zeros(4, 4);
        for i in 0..3 {
            nil[(i, i + 1)] = 1.0;
        }
        assert_eq!(power_basis(&nil, 10).unwrap().rank(DEFAULT_RANK_TOL), 4);
        let s = cayley_hamilton_demo(1, 5, 10, 3).unwrap();
        assert_eq!(s.max_rank_general, 1);
    }

    #[test]
    fn vacuity_arithmetic() {
        let v = sufficiency_vacuity(4, 4);
        assert_eq!((v.n2, v.vacuous), (6, true));
        let v = sufficiency_vacuity(3, 3);
        assert_eq!((v.n2, v.vacuous), (3, false));
        let v = sufficiency_vacuity(10, 10);
        assert_eq!((v.n2, v.vacuous), (45, true));
        assert!(v.warning.is_none());
        let v = sufficiency_vacuity(3, 5);
        assert_eq!(v.n2, 1);
        assert!(v.warning.is_some());
    }
}
