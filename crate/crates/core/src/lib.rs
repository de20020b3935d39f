//! Pinwheel scheduling: instances, schedules, folding, exact and heuristic
//! solvers, and machine-checkable schedulability proofs.
#![no_std]

extern crate alloc;

pub mod dominance;
pub mod error;
pub mod fast;
pub mod fold;
pub mod fractional;
pub mod generate;
pub mod instance;
pub mod lift;
pub mod partition;
pub mod period;
pub mod proof;
pub mod schedule;
pub mod solver;
pub mod unfold;

/// Exact rational used for densities.
pub type Rational = num_rational::BigRational;

pub use dominance::{covers, dominates, DominationWitness};
pub use error::{CoreError, Result};
pub use fast::{fast_solve, FastConfig};
pub use fold::{ffold, fold, FoldParameter, FoldTrace, Folded};
pub use instance::Instance;
pub use lift::lift_schedule;
pub use partition::{Partition, PartitionFilter};
pub use period::Period;
pub use schedule::{verify_schedule, Schedule, VerifyError, Violation};
pub use solver::{solve, Clock, FrozenClock, SolveConfig, SolveOutcome};
pub use unfold::{unfold, UnfoldRule};
