//! Symmetric shift design.
//!
//! Every symmetric `S` that leaves `range(U∥)` and its complement invariant has
//! the form `S = U∥ A U∥ᵀ + U⊥ B U⊥ᵀ` with `A`, `B` symmetric. Requiring
//! `S_ij = 0` outside the topology is linear in the entries of `(A, B)`, so
//! the topological members of that family form the null space of a constraint
//! matrix. A random element of the null space generically has disjoint
//! spectra on the two subspaces, in which case interpolating the spectrum
//! yields filter taps with `Σ cₗ Sˡ = U∥U∥ᵀ`. Draws that fail the grouping
//! test are retried.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::{
    asymmetry, null_space, orthonormal_complement, projector, seeded_rng, SubspaceBasis,
};
use crate::polynomial::{
    coefficients_from_grouping, eigen_grouping, grouping_condition_holds, is_topological,
    EigenGrouping, FilterCoefficients, ShiftMatrix, DEFAULT_ALIGNMENT_TOL, DEFAULT_SEP,
    DEFAULT_TOPOLOGY_TOL,
};
use crate::report::{CounterexampleReport, Relation};
use crate::topology::GraphTopology;
use crate::{Error, Result};

/// Singular values of the constraint matrix below this (relative) count as zero.
const NULL_SPACE_RTOL: f64 = 1e-10;

/// Default acceptance threshold on `‖Σ cₗ Sˡ − P‖_F / (1 + ‖P‖_F)`.
///
/// Tighter than the polynomial test's default: a draw whose spectrum has
/// nearly touching eigenvalues needs steep taps, and roundoff in those
/// eigenvalues then shows up in the filter output. Such draws are retried.
pub const DEFAULT_DESIGN_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignOptions {
    pub seed: u64,
    pub max_retries: usize,
    /// Eigenvalue separation between the two groups (unit-radius scale).
    pub sep: f64,
    /// Relative tolerance on `‖Σ cₗ Sˡ − P‖_F`.
    pub residual_tol: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_retries: 50,
            sep: DEFAULT_SEP,
            residual_tol: DEFAULT_DESIGN_RESIDUAL_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    pub topology: GraphTopology,
    pub basis: SubspaceBasis,
    pub options: DesignOptions,
}

impl DesignProblem {
    pub fn new(
        topology: GraphTopology,
        basis: SubspaceBasis,
        options: DesignOptions,
    ) -> Result<Self> {
        if topology.n() != basis.n() {
            return Err(Error::DimensionMismatch {
                expected: format!("basis in R^{}", topology.n()),
                actual: format!("R^{}", basis.n()),
            });
        }
        Ok(Self {
            topology,
            basis,
            options,
        })
    }

    pub fn n(&self) -> usize {
        self.topology.n()
    }

    /// `r(r+1)/2 + (n−r)(n−r+1)/2`.
    pub fn free_parameters(&self) -> usize {
        let (n, r) = (self.n(), self.basis.r());
        r * (r + 1) / 2 + (n - r) * (n - r + 1) / 2
    }

    /// Images `U E Uᵀ` of the symmetric unit matrices `E` spanning `A` and `B`.
    pub fn parameter_matrices(&self) -> Vec<DMatrix<f64>> {
        let mut out = Vec::with_capacity(self.free_parameters());
        let mut push_block = |u: &DMatrix<f64>| {
            for a in 0..u.ncols() {
                for b in a..u.ncols() {
                    let (ua, ub) = (u.column(a), u.column(b));
                    out.push(if a == b {
                        ua * ua.transpose()
                    } else {
                        ua * ub.transpose() + ub * ua.transpose()
                    });
                }
            }
        };
        push_block(self.basis.columns());
        if let Ok(perp) = orthonormal_complement(&self.basis) {
            push_block(perp.columns());
        }
        out
    }

    /// Unordered pairs `i < j` where a symmetric `S` must vanish, i.e. at
    /// least one direction is disallowed.
    pub fn constrained_pairs(&self) -> Vec<(usize, usize)> {
        let t = &self.topology;
        (0..self.n())
            .flat_map(|i| ((i + 1)..self.n()).map(move |j| (i, j)))
            .filter(|&(i, j)| !(t.allows(i, j) && t.allows(j, i)))
            .collect()
    }

    /// One row per constrained pair, one column per free parameter.
    pub fn constraint_matrix(&self) -> DMatrix<f64> {
        let pairs = self.constrained_pairs();
        let params = self.parameter_matrices();
        DMatrix::from_fn(pairs.len(), params.len(), |row, k| {
            let (i, j) = pairs[row];
            params[k][(i, j)]
        })
    }
}

/// Why no design was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Infeasible {
    /// The constraints leave only `S = 0`.
    OnlyZero,
    /// Every draw shared (or nearly shared) an eigenvalue between the groups.
    GroupingFailed {
        retries: usize,
        best_separation: f64,
    },
}

impl Infeasible {
    pub fn reason(&self) -> &'static str {
        match self {
            Infeasible::OnlyZero => "only-zero",
            Infeasible::GroupingFailed { .. } => "grouping-failed",
        }
    }
}

impl fmt::Display for Infeasible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasible::OnlyZero => write!(
                f,
                "only-zero (the topology admits no nonzero invariant shift)"
            ),
            Infeasible::GroupingFailed {
                retries,
                best_separation,
            } => write!(
                f,
                "grouping-failed after {retries} draws (best separation {best_separation:.3e})"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub shift: ShiftMatrix,
    pub coeffs: FilterCoefficients,
    pub grouping: EigenGrouping,
    /// `‖Σ cₗ Sˡ − P‖_F`.
    pub residual: f64,
    /// Index of the successful draw (0 when the first draw succeeds).
    pub retries_used: usize,
}

impl DesignResult {
    pub fn order(&self) -> usize {
        self.coeffs.order()
    }
}

/// Searches the null space of the topology constraints for a symmetric
/// polynomial shift.
///
/// The identity is always in the family and always topological, so the null
/// space has dimension at least one and [`Infeasible::OnlyZero`] is reported
/// only for a degenerate constraint matrix.
pub fn feasible_shift(problem: &DesignProblem) -> Result<DesignResult> {
    let ns = null_space(&problem.constraint_matrix(), NULL_SPACE_RTOL);
    search_null_space(problem, &ns)
}

fn search_null_space(problem: &DesignProblem, ns: &DMatrix<f64>) -> Result<DesignResult> {
    if ns.ncols() == 0 {
        return Err(Error::Infeasible(Infeasible::OnlyZero));
    }
    let params = problem.parameter_matrices();
    let p = projector(&problem.basis);
    let opts = problem.options;
    let threshold = opts.residual_tol * (1.0 + p.matrix().norm());

    let attempts = opts.max_retries.max(1);
    let mut best_separation: f64 = 0.0;
    for attempt in 0..attempts {
        let mut rng = retry_rng(opts.seed, attempt);
        let weights = DVector::from_fn(ns.ncols(), |_, _| StandardNormal.sample(&mut rng));
        let theta = ns * weights;
        let shift = assemble(problem, &params, &theta)?;

        let grouping = eigen_grouping(&shift, &problem.basis, DEFAULT_ALIGNMENT_TOL)?;
        best_separation = best_separation.max(grouping.separation().unwrap_or(0.0));
        if !grouping_condition_holds(&grouping, opts.sep) {
            continue;
        }
        let coeffs = coefficients_from_grouping(&grouping, opts.sep)?;
        let residual = (coeffs.filter_matrix(shift.matrix()) - p.matrix()).norm();
        if !residual.is_finite() || residual >= threshold {
            continue;
        }
        return Ok(DesignResult {
            shift,
            coeffs,
            grouping,
            residual,
            retries_used: attempt,
        });
    }
    Err(Error::Infeasible(Infeasible::GroupingFailed {
        retries: attempts,
        best_separation,
    }))
}

/// Draw `attempt` uses its own ChaCha stream under the common seed, so any
/// retry can be reproduced in isolation.
fn retry_rng(seed: u64, attempt: usize) -> ChaCha8Rng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(attempt as u64);
    rng
}

/// `Σ θ_k S_k`, symmetrized, with disallowed entries set to exactly zero.
fn assemble(
    problem: &DesignProblem,
    params: &[DMatrix<f64>],
    theta: &DVector<f64>,
) -> Result<ShiftMatrix> {
    let n = problem.n();
    let mut s = DMatrix::zeros(n, n);
    for (pk, &t) in params.iter().zip(theta.iter()) {
        s += pk * t;
    }
    let mut s = (&s + s.transpose()) * 0.5;
    for (i, j) in problem.constrained_pairs() {
        s[(i, j)] = 0.0;
        s[(j, i)] = 0.0;
    }
    ShiftMatrix::new(s)
}

/// Independent re-check of a design: symmetry, topology, projection residual
/// and filter order.
pub fn verify_design(
    result: &DesignResult,
    problem: &DesignProblem,
) -> Result<CounterexampleReport> {
    let n = problem.n();
    let s = result.shift.matrix();
    let p = projector(&problem.basis);
    let mut report = CounterexampleReport::new(format!(
        "design verification (n={n}, r={}, L={})",
        problem.basis.r(),
        result.order()
    ));
    report.check("‖S − Sᵀ‖_F", asymmetry(s), Relation::LessThan, 1e-10);
    let topo = is_topological(&result.shift, &problem.topology, DEFAULT_TOPOLOGY_TOL)?;
    report.check(
        "largest disallowed entry of S",
        topo.max_violation.map_or(0.0, |v| v.value.abs()),
        Relation::AtMost,
        DEFAULT_TOPOLOGY_TOL,
    );
    report.check(
        "‖Σ cₗ Sˡ − U∥U∥ᵀ‖_F",
        (result.coeffs.filter_matrix(s) - p.matrix()).norm(),
        Relation::LessThan,
        problem.options.residual_tol * (1.0 + p.matrix().norm()),
    );
    report.check(
        "filter order L",
        result.order() as f64,
        Relation::AtMost,
        n as f64,
    );
    Ok(report)
}
