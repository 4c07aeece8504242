//! Energy-efficient assignment of a mixed bus fleet to fixed transit trips
//! with electric-vehicle charging scheduling, plus the telemetry pipeline
//! that estimates per-trip energies.
//!
//! Solvers: an exact branch-and-bound with optimality certificates for small
//! instances (and LP export for external MILP solvers), a biased-cost greedy
//! construction, and simulated annealing refinement. All of them consult the
//! [`feasibility`] module as the single source of truth for constraints and
//! cost.

pub mod anneal;
pub mod error;
pub mod exact;
pub mod feasibility;
pub mod geo;
pub mod greedy;
pub mod model;
pub mod par;
pub mod pipeline;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{FleetError, Result};
