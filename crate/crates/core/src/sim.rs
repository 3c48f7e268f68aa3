//! Synchronous message-passing evaluation of a graph filter.
//!
//! Each node owns one scalar of the signal and the weights of its own row of
//! `S`. In every round a node receives one scalar from each in-neighbor `j`
//! with `S_ij ≠ 0` and replaces its value with the weighted sum; after round
//! `l` node `i` holds `(Sˡ x)_i` and adds `cₗ` times it to its output. Nothing
//! else crosses node boundaries.

use nalgebra::DVector;
use serde::Serialize;

use crate::polynomial::{is_topological, FilterCoefficients, ShiftMatrix, DEFAULT_TOPOLOGY_TOL};
use crate::topology::GraphTopology;
use crate::{Error, Result};

/// Communication cost of a run. One message carries one scalar.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CommStats {
    pub rounds: usize,
    pub messages: usize,
    pub scalar_payloads: usize,
}

/// A value received over the in-edge from `from`, with the receiver's weight
/// `S_ij` for that edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Message {
    pub from: usize,
    pub value: f64,
    pub weight: f64,
}

/// Everything a node knows about itself.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: usize,
    /// `S_ii`.
    pub self_weight: f64,
    /// `(j, S_ij)` for in-neighbors with a nonzero weight, ascending `j`.
    pub in_weights: Vec<(usize, f64)>,
    /// Current shifted value `(Sˡ x)_i`.
    pub value: f64,
    /// Running filter output `y_i`.
    pub output: f64,
}

/// One shift step at a single node: `S_ii z_i + Σ_j S_ij z_j`, summed in
/// ascending node id with the node's own term in its slot.
///
/// Takes nothing beyond the node's own state and its inbox.
pub fn node_update(own: &NodeState, inbox: &[Message]) -> f64 {
    let mut acc = 0.0;
    let mut own_added = false;
    for m in inbox {
        if !own_added && m.from > own.id {
            acc += own.self_weight * own.value;
            own_added = true;
        }
        acc += m.weight * m.value;
    }
    if !own_added {
        acc += own.self_weight * own.value;
    }
    acc
}

/// A network of nodes executing a fixed shift. The shift is checked against
/// the topology once, at construction.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<NodeState>,
    round: usize,
    stats: CommStats,
}

impl Network {
    pub fn new(topology: &GraphTopology, shift: &ShiftMatrix) -> Result<Self> {
        let check = is_topological(shift, topology, DEFAULT_TOPOLOGY_TOL)?;
        if !check.topological {
            let v = check
                .max_violation
                .expect("non-topological shift has a violation");
            return Err(Error::LocalityViolation {
                row: v.row,
                col: v.col,
                value: v.value,
            });
        }
        let s = shift.matrix();
        let nodes = (0..topology.n())
            .map(|i| NodeState {
                id: i,
                self_weight: s[(i, i)],
                in_weights: topology
                    .in_neighbors(i)
                    .filter(|&j| s[(i, j)] != 0.0)
                    .map(|j| (j, s[(i, j)]))
                    .collect(),
                value: 0.0,
                output: 0.0,
            })
            .collect();
        Ok(Self {
            nodes,
            round: 0,
            stats: CommStats::default(),
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn stats(&self) -> CommStats {
        self.stats
    }

    /// Number of directed edges carrying a message each round.
    pub fn active_edges(&self) -> usize {
        self.nodes.iter().map(|n| n.in_weights.len()).sum()
    }

    /// Loads the input signal: `z ← x`, `y ← c₀ x`.
    pub fn load(&mut self, x: &DVector<f64>, c0: f64) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: format!("signal of length {}", self.n()),
                actual: format!("length {}", x.len()),
            });
        }
        for (node, &xi) in self.nodes.iter_mut().zip(x.iter()) {
            node.value = xi;
            node.output = c0 * xi;
        }
        Ok(())
    }

    /// One synchronous round: every node reads its neighbors' values from the
    /// previous round, then all nodes update together and add `c · z` to
    /// their outputs.
    pub fn step(&mut self, c: f64) {
        let snapshot: Vec<f64> = self.nodes.iter().map(|n| n.value).collect();
        let mut messages = 0;
        let next: Vec<f64> = self
            .nodes
            .iter()
            .map(|node| {
                let inbox: Vec<Message> = node
                    .in_weights
                    .iter()
                    .map(|&(j, weight)| Message {
                        from: j,
                        value: snapshot[j],
                        weight,
                    })
                    .collect();
                messages += inbox.len();
                node_update(node, &inbox)
            })
            .collect();
        for (node, z) in self.nodes.iter_mut().zip(next) {
            node.value = z;
            node.output += c * z;
        }
        self.round += 1;
        self.stats.rounds += 1;
        self.stats.messages += messages;
        self.stats.scalar_payloads += messages;
    }

    pub fn outputs(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.nodes.iter().map(|n| n.output))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterRun {
    pub y: DVector<f64>,
    pub stats: CommStats,
}

/// Evaluates `Σ cₗ Sˡ x` in `L − 1` communication rounds.
pub fn run_filter(
    topology: &GraphTopology,
    shift: &ShiftMatrix,
    coeffs: &FilterCoefficients,
    x: &DVector<f64>,
) -> Result<FilterRun> {
    let mut net = Network::new(topology, shift)?;
    let taps = coeffs.taps();
    net.load(x, taps[0])?;
    for &c in &taps[1..] {
        net.step(c);
    }
    Ok(FilterRun {
        y: net.outputs(),
        stats: net.stats(),
    })
}

/// Dense reference `Σ cₗ Sˡ x`.
pub fn centralized_filter(
    shift: &ShiftMatrix,
    coeffs: &FilterCoefficients,
    x: &DVector<f64>,
) -> DVector<f64> {
    coeffs.apply(shift.matrix(), x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub y_central: DVector<f64>,
    pub y_decentral: DVector<f64>,
    pub max_abs_diff: f64,
    pub pass: bool,
    pub stats: CommStats,
}

/// Agreement test `max |y_c − y_d| < 1e−9 (1 + ‖y_c‖∞)`.
pub fn outputs_agree(y_central: &DVector<f64>, y_decentral: &DVector<f64>) -> (f64, bool) {
    let diff = (y_central - y_decentral).amax();
    (diff, diff < 1e-9 * (1.0 + y_central.amax()))
}

/// Runs the network and the dense reference on the same input.
pub fn compare_with_centralized(
    topology: &GraphTopology,
    shift: &ShiftMatrix,
    coeffs: &FilterCoefficients,
    x: &DVector<f64>,
) -> Result<Comparison> {
    let run = run_filter(topology, shift, coeffs, x)?;
    let y_central = centralized_filter(shift, coeffs, x);
    let (max_abs_diff, pass) = outputs_agree(&y_central, &run.y);
    Ok(Comparison {
        y_central,
        y_decentral: run.y,
        max_abs_diff,
        pass,
        stats: run.stats,
    })
}
