//! Demand placement on IP networks.
//!
//! Given a topology, the committed traffic matrix and a request for new
//! bidirectional demands between fixed access sites and one of several
//! candidate data-centre sites, the controller simulates IGP/ECMP routing under
//! every failure scenario of interest, rejects candidates that break the
//! utilisation or latency bounds, and picks the feasible site with the lowest
//! worst-case path utilisation.
//!
//! - [`model`]: topology, demands, failure scenarios, file formats
//! - [`routing`]: shortest-path/ECMP simulation
//! - [`analysis`]: per-scenario loads and worst-case utilisation
//! - [`controller`]: admission control, placement policies, commit/rollback
//! - [`sim`]: randomized placement-policy comparison study

// Validation writes `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod controller;
pub mod model;
pub mod routing;
pub mod sim;
