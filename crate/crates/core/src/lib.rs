//! Non-neural core of a sparse-instance end-to-end driving stack.
//!
//! The crate covers the pieces of such a pipeline that are pure geometry,
//! combinatorics or bookkeeping: anchor encodings and clustering, threshold
//! ID assignment, Hungarian matching and loss arithmetic, hierarchical plan
//! selection with collision-aware rescoring, open-loop evaluation metrics,
//! and a deterministic kinematic simulator standing in for learned heads.

pub mod anchor_init;
pub mod error;
pub mod geometry;
pub mod instances;
pub mod matching;
pub mod metrics;
pub mod planner;
pub mod sim;
pub mod tracking;

pub use error::{Error, Result};

/// A planar trajectory: one `(x, y)` point per timestep, in meters.
pub type Trajectory = Vec<[f64; 2]>;
