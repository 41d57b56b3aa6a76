//! Mixed-initiative dungeon design engine.
//!
//! 12×12 tile maps are characterised by 31 level metrics. A feasible–infeasible
//! two-population genetic algorithm evolves maps whose metrics sit close to
//! those of maps a designer liked, ranking candidates by majority vote across
//! the per-metric distances. [`session`] wraps the engine in the interactive
//! suggest / edit / like / keep loop.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]

extern crate alloc;

pub mod evolution;
pub mod grid;
pub mod metrics;
pub mod ranking;
pub mod session;
pub mod stats;

pub use evolution::{GaParams, Individual, OptimisationHistory, Population, RunOutcome};
pub use grid::{FeasibilityReport, GridMap, Position, TileKind, N_TOTAL, SIZE};
pub use metrics::{compute_metrics, measure, MetricVector, METRIC_COUNT};
pub use ranking::{FitnessVector, Preference, TargetSet};
pub use session::{Session, SessionConfig, SessionMode};
