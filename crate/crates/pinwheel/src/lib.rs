//! Command-line toolkit around `pinwheel_core`: proof artifacts on disk,
//! certification, parallel proving and the solver benchmark harness.

pub mod artifacts;
pub mod bench;
pub mod clock;
pub mod error;
pub mod pipeline;

pub use clock::StdClock;
pub use error::{Error, Result};
