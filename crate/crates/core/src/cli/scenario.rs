//! JSON scenario and design files.
//!
//! Matrices are row-major nested arrays. A scenario looks like
//!
//! ```json
//! {
//!   "n": 4,
//!   "topology": { "kind": "path" },
//!   "basis": { "kind": "consensus" },
//!   "options": { "seed": 0, "max_retries": 50 }
//! }
//! ```
//!
//! Topology kinds: `path`, `ring`, `complete`, `empty`,
//! `random { p, seed }`, `edges { edges: [[i, j], …] }` (directed: `[i, j]`
//! lets node `i` receive from `j`). Basis kinds: `consensus`,
//! `random { r, seed }`, `explicit { columns }` with `columns` an `n × r`
//! row-major matrix with orthonormal columns.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::design::{DesignOptions, DesignProblem, DesignResult};
use crate::linalg::SubspaceBasis;
use crate::polynomial::{FilterCoefficients, GroupLabel, ShiftMatrix};
use crate::topology::GraphTopology;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub n: usize,
    pub topology: TopologySpec,
    pub basis: BasisSpec,
    #[serde(default)]
    pub options: DesignOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologySpec {
    Path,
    Ring,
    Complete,
    Empty,
    Random { p: f64, seed: u64 },
    Edges { edges: Vec<[usize; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisSpec {
    Consensus,
    Random { r: usize, seed: u64 },
    Explicit { columns: Vec<Vec<f64>> },
}

/// A schema or consistency problem, located by a field path.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn schema(path: impl Into<String>, message: impl ToString) -> SchemaError {
    SchemaError {
        path: path.into(),
        message: message.to_string(),
    }
}

/// Parses JSON into `T`, reporting the path of the offending field.
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(
            if path.is_empty() {
                ".".to_string()
            } else {
                path
            },
            e.into_inner(),
        )
    })
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        parse_json(text)
    }

    pub fn topology(&self) -> Result<GraphTopology, SchemaError> {
        let n = self.n;
        if n == 0 {
            return Err(schema("n", "must be at least 1"));
        }
        Ok(match &self.topology {
            TopologySpec::Path => GraphTopology::path(n),
            TopologySpec::Ring => GraphTopology::ring(n),
            TopologySpec::Complete => GraphTopology::complete(n),
            TopologySpec::Empty => GraphTopology::empty(n),
            TopologySpec::Random { p, seed } => GraphTopology::random_connected(n, *p, *seed)
                .map_err(|e| schema("topology.p", e))?,
            TopologySpec::Edges { edges } => {
                if let Some(k) = edges.iter().position(|e| e[0] >= n || e[1] >= n) {
                    return Err(schema(
                        format!("topology.edges[{k}]"),
                        format!("node out of range for n = {n}"),
                    ));
                }
                let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
                GraphTopology::from_edges(n, &pairs).map_err(|e| schema("topology.edges", e))?
            }
        })
    }

    pub fn basis(&self) -> Result<SubspaceBasis, SchemaError> {
        let n = self.n;
        match &self.basis {
            BasisSpec::Consensus => SubspaceBasis::consensus(n).map_err(|e| schema("n", e)),
            BasisSpec::Random { r, seed } => {
                SubspaceBasis::random(n, *r, *seed).map_err(|e| schema("basis.r", e))
            }
            BasisSpec::Explicit { columns } => {
                if columns.len() != n {
                    return Err(schema(
                        "basis.columns",
                        format!("expected {n} rows, found {}", columns.len()),
                    ));
                }
                let r = columns.first().map_or(0, Vec::len);
                if let Some(i) = columns.iter().position(|row| row.len() != r) {
                    return Err(schema(
                        format!("basis.columns[{i}]"),
                        format!("expected {r} entries"),
                    ));
                }
                let m = DMatrix::from_fn(n, r, |i, j| columns[i][j]);
                SubspaceBasis::new(m).map_err(|e| schema("basis.columns", e))
            }
        }
    }

    pub fn problem(&self) -> Result<DesignProblem, SchemaError> {
        let opts = self.options;
        if !(opts.sep.is_finite() && opts.sep >= 0.0) {
            return Err(schema("options.sep", "must be finite and non-negative"));
        }
        if !(opts.residual_tol.is_finite() && opts.residual_tol > 0.0) {
            return Err(schema(
                "options.residual_tol",
                "must be finite and positive",
            ));
        }
        DesignProblem::new(self.topology()?, self.basis()?, opts).map_err(|e| schema(".", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupingRecord {
    pub eigenvalues: Vec<f64>,
    pub labels: Vec<GroupLabel>,
    pub alignment: Vec<f64>,
}

/// Serialized form of a successful design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignRecord {
    pub n: usize,
    pub order: usize,
    pub coeffs: FilterCoefficients,
    pub shift: Vec<Vec<f64>>,
    pub residual: f64,
    pub retries_used: usize,
    pub grouping: GroupingRecord,
}

impl From<&DesignResult> for DesignRecord {
    fn from(d: &DesignResult) -> Self {
        Self {
            n: d.shift.n(),
            order: d.order(),
            coeffs: d.coeffs.clone(),
            shift: rows(d.shift.matrix()),
            residual: d.residual,
            retries_used: d.retries_used,
            grouping: GroupingRecord {
                eigenvalues: d.grouping.eigenvalues.clone(),
                labels: d.grouping.labels.clone(),
                alignment: d.grouping.alignment.clone(),
            },
        }
    }
}

/// The parts of a design file that `simulate --design` reads. Any report
/// written by `design` works, as does a hand-written
/// `{ "design": { "shift": [[…]], "coeffs": […] } }`.
#[derive(Debug, Clone, Deserialize)]
pub struct DesignFile {
    pub design: DesignInput,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DesignInput {
    pub shift: Vec<Vec<f64>>,
    pub coeffs: FilterCoefficients,
}

impl DesignInput {
    pub fn shift(&self, n: usize) -> Result<ShiftMatrix, SchemaError> {
        if self.shift.len() != n {
            return Err(schema(
                "design.shift",
                format!("expected {n} rows, found {}", self.shift.len()),
            ));
        }
        if let Some(i) = self.shift.iter().position(|row| row.len() != n) {
            return Err(schema(
                format!("design.shift[{i}]"),
                format!("expected {n} entries"),
            ));
        }
        ShiftMatrix::new(DMatrix::from_fn(n, n, |i, j| self.shift[i][j]))
            .map_err(|e| schema("design.shift", e))
    }
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_uses_default_options() {
        let s = Scenario::parse(
            r#"{"n": 4, "topology": {"kind": "path"}, "basis": {"kind": "consensus"}}"#,
        )
        .unwrap();
        assert_eq!(s.options, DesignOptions::default());
        let p = s.problem().unwrap();
        assert_eq!(p.n(), 4);
        assert_eq!(p.basis.r(), 1);
    }

    #[test]
    fn errors_name_the_field() {
        let e = Scenario::parse(r#"{"n": 4, "topology": {"kind": "path"}, "basis": {"kind": "consensus"}, "options": {"seed": "x"}}"#)
            .unwrap_err();
        assert_eq!(e.path, "options.seed");

        let e = Scenario::parse(r#"{"n": 4, "topology": {"kind": "edges", "edges": [[0, 1], [2, 9]]}, "basis": {"kind": "consensus"}}"#)
            .unwrap()
            .problem()
            .unwrap_err();
        assert_eq!(e.path, "topology.edges[1]");

        let e = Scenario::parse(r#"{"n": 2, "topology": {"kind": "ring"}, "basis": {"kind": "explicit", "columns": [[1.0], [1.0]]}}"#)
            .unwrap()
            .problem()
            .unwrap_err();
        assert_eq!(e.path, "basis.columns");

        assert!(Scenario::parse(
            r#"{"n": 2, "topology": {"kind": "ring"}, "basis": {"kind": "consensus"}, "extra": 1}"#
        )
        .is_err());
    }

    #[test]
    fn explicit_basis_is_row_major() {
        let s = Scenario::parse(
            r#"{"n": 3, "topology": {"kind": "complete"}, "basis": {"kind": "explicit", "columns": [[0, 1], [1, 0], [0, 0]]}}"#,
        )
        .unwrap();
        let b = s.basis().unwrap();
        assert_eq!(b.columns()[(1, 0)], 1.0);
        assert_eq!(b.columns()[(0, 1)], 1.0);
    }
}
