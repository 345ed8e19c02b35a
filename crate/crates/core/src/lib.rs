//! Condition-based maintenance of a system with gamma-degrading components and
//! an exponentially failing non-degrading part, inspected periodically and
//! repaired after a fixed delay.
//!
//! The crate estimates the long-run cost rate of an inspection/preventive-threshold
//! policy by simulating the maintenance chain ([`sim`]), checks the simulator
//! against quadrature evaluations of single-cycle quantities ([`oracle`]), and
//! searches for the cheapest policy meeting a bound on the probability that
//! every degrading component fails within one cycle ([`opt`]).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crosscheck;
pub mod error;
pub mod gamma;
pub mod model;
pub mod opt;
pub mod oracle;
pub mod quad;
pub mod scenario;
pub mod sensitivity;
pub mod sim;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use gamma::GammaParams;
pub use model::{ComponentSpec, ConstraintSpec, PolicyVector, StartState, SystemSpec};
pub use sim::{CostBreakdown, CycleRecord, SimConfig};
pub use stats::EstimateWithError;
