//! Exact dynamic equilibria in the fluid queueing model.
//!
//! Equilibria are built phase by phase: at every phase the derivatives of the earliest arrival
//! labels form a thin flow with resetting on the current shortest-path graph. Thin flows are
//! computed either parametrically on series-parallel graphs or by Lemke's method on the
//! associated linear complementarity problem. All arithmetic is exact.

pub mod equilibrium;
pub mod io;
pub mod lcp;
pub mod network;
pub mod parametric;
pub mod pwl;
pub mod rational;
pub mod sp;
pub mod thinflow;

pub use network::{ArcId, Network, ShortestPathGraph, VertexId};
pub use pwl::{PwlFn, StepFn};
pub use rational::Q;
