//! The "topological" and "polynomial" predicates for shift matrices, and the
//! eigenvalue-grouping test that characterizes polynomial shifts among
//! symmetric matrices.
//!
//! A shift `S` is *polynomial* for a subspace with projector `P` when some taps
//! `c₀, …, c_{L−1}` give `Σ cₗ Sˡ = P`. For symmetric `S` with
//! eigendecomposition `S = V Λ Vᵀ` this happens iff each eigenvector can be
//! chosen inside `range(U∥)` or `range(U⊥)` and no eigenvalue is attached to
//! both; the interpolating polynomial mapping the first group to 1 and the
//! second to 0 then provides the taps.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::{
    asymmetry, ensure_finite, ensure_square, lstsq_min_norm, power_basis, projector, spectral_norm,
    symmetric_eigen, vec, SubspaceBasis,
};
use crate::topology::GraphTopology;
use crate::{Error, Result};

/// Entries of disallowed positions up to this magnitude still count as zero.
pub const DEFAULT_TOPOLOGY_TOL: f64 = 1e-12;
/// Relative residual threshold for the least-squares polynomial test.
pub const DEFAULT_POLYNOMIAL_TOL: f64 = 1e-8;
/// Alignment threshold τ for labelling eigenvectors.
pub const DEFAULT_ALIGNMENT_TOL: f64 = 1e-8;
/// Eigenvalue separation, measured on the spectrum scaled to unit radius.
pub const DEFAULT_SEP: f64 = 1e-8;

const LSTSQ_RTOL: f64 = 1e-12;

/// A real square shift matrix with finite entries. Possibly asymmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMatrix {
    matrix: DMatrix<f64>,
}

impl ShiftMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = ensure_square(&matrix, "shift matrix")?;
        if n == 0 {
            return Err(Error::InvalidInput("shift matrix must be non-empty".into()));
        }
        ensure_finite(&matrix, "shift matrix")?;
        Ok(Self { matrix })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// Taps `c₀, …, c_{L−1}` of the graph filter `H = Σ cₗ Sˡ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FilterCoefficients {
    taps: Vec<f64>,
}

impl FilterCoefficients {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidInput("filter needs at least one tap".into()));
        }
        if let Some(k) = taps.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("tap {k} is not finite")));
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Number of taps `L`; evaluating the filter takes `L − 1` shifts.
    pub fn order(&self) -> usize {
        self.taps.len()
    }

    /// `Σ cₗ Sˡ` as a dense matrix.
    pub fn filter_matrix(&self, s: &DMatrix<f64>) -> DMatrix<f64> {
        let n = s.nrows();
        let mut power = DMatrix::<f64>::identity(n, n);
        let mut h = &power * self.taps[0];
        for &c in &self.taps[1..] {
            power = &power * s;
            h += &power * c;
        }
        h
    }

    /// `Σ cₗ Sˡ x` by repeated matrix–vector products.
    pub fn apply(&self, s: &DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
        let mut z = x.clone();
        let mut y = x * self.taps[0];
        for &c in &self.taps[1..] {
            z = s * z;
            y.axpy(c, &z, 1.0);
        }
        y
    }
}

impl TryFrom<Vec<f64>> for FilterCoefficients {
    type Error = Error;

    fn try_from(taps: Vec<f64>) -> Result<Self> {
        Self::new(taps)
    }
}

impl From<FilterCoefficients> for Vec<f64> {
    fn from(c: FilterCoefficients) -> Self {
        c.taps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyCheck {
    pub topological: bool,
    /// Largest-magnitude entry at a disallowed position, if any is nonzero.
    pub max_violation: Option<Violation>,
}

/// Whether every disallowed entry of `s` is at most `tol` in magnitude.
pub fn is_topological(s: &ShiftMatrix, topo: &GraphTopology, tol: f64) -> Result<TopologyCheck> {
    let n = s.n();
    if topo.n() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("topology on {n} nodes"),
            actual: format!("{} nodes", topo.n()),
        });
    }
    let mut max_violation: Option<Violation> = None;
    for i in 0..n {
        for j in 0..n {
            let value = s.matrix()[(i, j)];
            if !topo.allows(i, j)
                && value != 0.0
                && max_violation.is_none_or(|v| value.abs() > v.value.abs())
            {
                max_violation = Some(Violation {
                    row: i,
                    col: j,
                    value,
                });
            }
        }
    }
    let topological = max_violation.is_none_or(|v| v.value.abs() <= tol);
    Ok(TopologyCheck {
        topological,
        max_violation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialCheck {
    pub polynomial: bool,
    /// Minimizing taps, returned whatever the verdict.
    pub coeffs: FilterCoefficients,
    /// `min_c ‖Σ cₗ Sˡ − P‖_F`.
    pub residual: f64,
}

/// Least-squares test of whether `Σ_{l<L} cₗ Sˡ = U∥U∥ᵀ` is solvable.
///
/// `S` is rescaled to unit spectral norm and the power-basis columns are
/// equilibrated before the minimum-norm solve; the returned taps are mapped
/// back to the original scale. The verdict is
/// `residual < tol · (1 + ‖P‖_F)`.
pub fn is_polynomial_shift(
    s: &ShiftMatrix,
    basis: &SubspaceBasis,
    max_order: usize,
    tol: f64,
) -> Result<PolynomialCheck> {
    let n = s.n();
    if basis.n() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("basis in R^{n}"),
            actual: format!("R^{}", basis.n()),
        });
    }
    if max_order == 0 {
        return Err(Error::InvalidInput(
            "filter order L must be at least 1".into(),
        ));
    }
    let p = projector(basis);
    let norm = spectral_norm(s.matrix());
    let scale = if norm > 0.0 { 1.0 / norm } else { 1.0 };
    let pb = power_basis(&(s.matrix() * scale), max_order - 1)?;

    let mut columns = pb.columns().clone();
    let col_norms: Vec<f64> = columns.column_iter().map(|c| c.norm()).collect();
    for (mut col, &cn) in columns.column_iter_mut().zip(&col_norms) {
        if cn > 0.0 {
            col /= cn;
        }
    }
    let target = vec(p.matrix());
    let solution = lstsq_min_norm(&columns, &target, LSTSQ_RTOL);
    let residual = (&columns * &solution - &target).norm();

    let taps = solution
        .iter()
        .zip(&col_norms)
        .enumerate()
        .map(|(l, (&x, &cn))| {
            if cn > 0.0 {
                x / cn * scale.powi(l as i32)
            } else {
                0.0
            }
        })
        .collect();
    Ok(PolynomialCheck {
        polynomial: residual < tol * (1.0 + p.matrix().norm()),
        coeffs: FilterCoefficients::new(taps)?,
        residual,
    })
}

/// Smallest `L ≤ n` for which [`is_polynomial_shift`] succeeds, if any.
///
/// This is the first order whose floating-point residual crosses the
/// threshold, not a certified minimum in exact arithmetic.
pub fn smallest_polynomial_order(
    s: &ShiftMatrix,
    basis: &SubspaceBasis,
    tol: f64,
) -> Result<Option<(usize, PolynomialCheck)>> {
    for order in 1..=s.n() {
        let check = is_polynomial_shift(s, basis, order, tol)?;
        if check.polynomial {
            return Ok(Some((order, check)));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupLabel {
    Parallel,
    Perp,
    Mixed,
}

/// Eigenpairs of a symmetric shift labelled by where their eigenvector lies.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenGrouping {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub labels: Vec<GroupLabel>,
    /// `‖U∥ᵀvᵢ‖²` for each eigenvector `vᵢ`.
    pub alignment: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    /// Spectral radius used to normalize eigenvalue distances (1 for `S = 0`).
    pub scale: f64,
}

/// A run of eigenvalues closer than the clustering tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    pub value: f64,
    pub members: Vec<usize>,
}

impl EigenGrouping {
    /// Chains consecutive eigenvalues whose scaled gap is at most `sep`.
    pub fn clusters(&self, sep: f64) -> Vec<EigenCluster> {
        cluster_sorted(&self.eigenvalues, self.scale, sep)
    }

    /// Smallest scaled distance between a parallel and a perp eigenvalue.
    ///
    /// `None` when some label is mixed; `+∞` when one group is empty.
    pub fn separation(&self) -> Option<f64> {
        if self.labels.contains(&GroupLabel::Mixed) {
            return None;
        }
        let mut best = f64::INFINITY;
        for (i, (&li, &la)) in self.eigenvalues.iter().zip(&self.labels).enumerate() {
            for (&lj, &lb) in self.eigenvalues[i + 1..].iter().zip(&self.labels[i + 1..]) {
                if la != lb {
                    best = best.min((li - lj).abs() / self.scale);
                }
            }
        }
        Some(best)
    }

    pub fn count(&self, label: GroupLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

fn cluster_sorted(values: &[f64], scale: f64, sep: f64) -> Vec<EigenCluster> {
    let mut clusters: Vec<EigenCluster> = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if (v - values[*c.members.last().unwrap()]) / scale <= sep => c.members.push(k),
            _ => clusters.push(EigenCluster {
                value: v,
                members: vec![k],
            }),
        }
    }
    for c in &mut clusters {
        c.value = c.members.iter().map(|&k| values[k]).sum::<f64>() / c.members.len() as f64;
    }
    clusters
}

/// Eigendecomposition of a symmetric `S` with each eigenvector labelled by
/// its alignment with `range(U∥)`.
///
/// Within a cluster of repeated eigenvalues the solver's basis is arbitrary,
/// so the cluster is rotated to diagonalize `VᵀPV`; each rotated vector then
/// lies in `range(U∥)`, in `range(U⊥)`, or genuinely straddles both.
pub fn eigen_grouping(s: &ShiftMatrix, basis: &SubspaceBasis, tau: f64) -> Result<EigenGrouping> {
    let n = s.n();
    if basis.n() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("basis in R^{n}"),
            actual: format!("R^{}", basis.n()),
        });
    }
    let a = asymmetry(s.matrix());
    if a >= 1e-10 * (1.0 + s.matrix().norm()) {
        return Err(Error::NotSymmetric { asymmetry: a });
    }
    let sym = (s.matrix() + s.matrix().transpose()) * 0.5;
    let (values, mut vectors) = symmetric_eigen(&sym);
    let radius = values.amax();
    let scale = if radius > 0.0 { radius } else { 1.0 };
    let values: Vec<f64> = values.iter().copied().collect();

    let p = projector(basis);
    let mut alignment = vec![0.0; n];
    for cluster in cluster_sorted(&values, scale, DEFAULT_SEP) {
        let first = cluster.members[0];
        let size = cluster.members.len();
        let block = vectors.columns(first, size).into_owned();
        let gram = block.transpose() * p.matrix() * &block;
        let gram = (&gram + gram.transpose()) * 0.5;
        let (mu, rotation) = symmetric_eigen(&gram);
        vectors
            .columns_mut(first, size)
            .copy_from(&(block * rotation));
        for (k, &m) in mu.iter().enumerate() {
            alignment[first + k] = m.clamp(0.0, 1.0);
        }
    }

    let labels = alignment
        .iter()
        .map(|&a| {
            if a > 1.0 - tau {
                GroupLabel::Parallel
            } else if a < tau {
                GroupLabel::Perp
            } else {
                GroupLabel::Mixed
            }
        })
        .collect();
    Ok(EigenGrouping {
        eigenvalues: values,
        labels,
        alignment,
        eigenvectors: vectors,
        scale,
    })
}

/// True iff no eigenvector is mixed and no parallel eigenvalue lies within
/// `sep` (scaled) of a perp eigenvalue.
pub fn grouping_condition_holds(g: &EigenGrouping, sep: f64) -> bool {
    g.separation().is_some_and(|d| d > sep)
}

/// Taps of the lowest-degree polynomial mapping parallel eigenvalues to 1 and
/// perp eigenvalues to 0.
///
/// Eigenvalues are clustered with `sep`, one interpolation node per cluster,
/// so `L` equals the number of distinct eigenvalues. Interpolation runs on the
/// unit-radius spectrum and the taps are rescaled afterwards.
pub fn coefficients_from_grouping(g: &EigenGrouping, sep: f64) -> Result<FilterCoefficients> {
    match g.separation() {
        None => {
            return Err(Error::InfeasibleGrouping(
                "an eigenvector straddles both subspaces".into(),
            ))
        }
        Some(d) if d <= sep => {
            return Err(Error::InfeasibleGrouping(format!(
            "a parallel and a perp eigenvalue are {d:.3e} apart (scaled), not more than {sep:.1e}"
        )))
        }
        Some(_) => {}
    }
    let clusters = g.clusters(sep);
    let nodes: Vec<f64> = clusters.iter().map(|c| c.value / g.scale).collect();
    let targets: Vec<f64> = clusters
        .iter()
        .map(|c| {
            if g.labels[c.members[0]] == GroupLabel::Parallel {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    if targets.iter().all(|&t| t == targets[0]) {
        return FilterCoefficients::new(vec![targets[0]]);
    }
    let scaled = lagrange_monomial(&nodes, &targets);
    let taps = scaled
        .iter()
        .enumerate()
        .map(|(l, &c)| c / g.scale.powi(l as i32))
        .collect();
    FilterCoefficients::new(taps)
}

/// Monomial coefficients of the interpolant through `(nodes[k], values[k])`.
fn lagrange_monomial(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let k = nodes.len();
    let mut out = vec![0.0; k];
    for (j, (&xj, &yj)) in nodes.iter().zip(values).enumerate() {
        if yj == 0.0 {
            continue;
        }
        let mut basis = vec![1.0];
        for (m, &xm) in nodes.iter().enumerate() {
            if m == j {
                continue;
            }
            let denom = xj - xm;
            let mut next = vec![0.0; basis.len() + 1];
            for (d, &b) in basis.iter().enumerate() {
                next[d + 1] += b / denom;
                next[d] -= b * xm / denom;
            }
            basis = next;
        }
        for (o, b) in out.iter_mut().zip(basis) {
            *o += yj * b;
        }
    }
    out
}
