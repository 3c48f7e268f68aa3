//! Directed sparsity masks for shift matrices.

use nalgebra::DMatrix;
use rand::Rng;

use crate::linalg::seeded_rng;
use crate::{Error, Result};

/// `allowed(i, j)` is true iff the shift entry `S_ij` may be nonzero, i.e.
/// node `i` may receive a value from node `j`. The diagonal is always allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphTopology {
    n: usize,
    allowed: Vec<bool>,
}

impl GraphTopology {
    /// No edges: only the diagonal is allowed.
    pub fn empty(n: usize) -> Self {
        let mut allowed = vec![false; n * n];
        for i in 0..n {
            allowed[i * n + i] = true;
        }
        Self { n, allowed }
    }

    pub fn complete(n: usize) -> Self {
        Self {
            n,
            allowed: vec![true; n * n],
        }
    }

    /// Undirected path `0 – 1 – … – (n−1)`.
    pub fn path(n: usize) -> Self {
        let mut t = Self::empty(n);
        for i in 1..n {
            t.connect(i - 1, i);
        }
        t
    }

    /// Undirected cycle; identical to [`GraphTopology::path`] for `n ≤ 2`.
    pub fn ring(n: usize) -> Self {
        let mut t = Self::path(n);
        if n > 2 {
            t.connect(n - 1, 0);
        }
        t
    }

    /// Undirected Erdős–Rényi graph with edge probability `p`, made connected
    /// by adding a random spanning path over a seeded permutation of the nodes.
    pub fn random_connected(n: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!(
                "edge probability {p} outside [0, 1]"
            )));
        }
        let mut rng = seeded_rng(seed);
        let mut t = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < p {
                    t.connect(i, j);
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        for k in (1..n).rev() {
            let m = rng.random_range(0..=k);
            order.swap(k, m);
        }
        for w in order.windows(2) {
            t.connect(w[0], w[1]);
        }
        Ok(t)
    }

    /// Topology from directed pairs `(i, j)`, each allowing `S_ij ≠ 0`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut t = Self::empty(n);
        for (k, &(i, j)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::InvalidInput(format!(
                    "edge {k} = ({i}, {j}) out of range for n = {n}"
                )));
            }
            t.allowed[i * n + j] = true;
        }
        Ok(t)
    }

    fn connect(&mut self, i: usize, j: usize) {
        self.allowed[i * self.n + j] = true;
        self.allowed[j * self.n + i] = true;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.allowed[i * self.n + j]
    }

    /// Nodes `j ≠ i` that may send to `i`, ascending.
    pub fn in_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| j != i && self.allows(i, j))
    }

    /// Number of allowed off-diagonal entries.
    pub fn offdiag_count(&self) -> usize {
        (0..self.n).map(|i| self.in_neighbors(i).count()).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.allows(i, j) == self.allows(j, i)))
    }

    /// Directed pairs `(i, j)`, `i ≠ j`, with `S_ij` allowed.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| self.in_neighbors(i).map(move |j| (i, j)))
            .collect()
    }

    /// Combinatorial Laplacian `deg − adj` of the off-diagonal mask, with
    /// `deg` counting in-neighbors.
    pub fn laplacian(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                self.in_neighbors(i).count() as f64
            } else if self.allows(i, j) {
                -1.0
            } else {
                0.0
            }
        })
    }
}
