//! Graph shift operators whose polynomial filters compute subspace projections.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense kernels (projectors, real Schur form, power bases,
//!   numerical rank, least squares, null spaces).
//! - [`topology`] and [`polynomial`]: the "topological" and "polynomial"
//!   predicates for a shift matrix, and the eigenvalue-grouping test for
//!   symmetric shifts.
//! - [`counterexamples`]: executable reports for the counterexamples to the
//!   Schur-based feasibility conditions for asymmetric shifts.
//! - [`design`]: the symmetric design route (null space of the topology
//!   constraints, random draw, grouping check, interpolated filter taps).
//! - [`sim`]: a synchronous message-passing network that evaluates the filter
//!   with neighbour-local communication only.
//! - [`cli`]: the `shiftproj` command line front end.

pub mod cli;
pub mod counterexamples;
pub mod design;
mod error;
pub mod linalg;
pub mod polynomial;
pub mod report;
pub mod sim;
pub mod topology;

pub use error::{Error, Result};
