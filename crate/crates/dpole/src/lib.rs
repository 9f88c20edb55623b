//! Experiment harness for the `dpole-core` actor-critic agent: episode loop,
//! seeded 1000-episode runs, rehearsal sweeps, run comparison and the
//! on-disk artifact formats used by the `dpole` CLI.

pub mod artifact;
pub mod compare;
pub mod config;
mod error;
pub mod runner;
pub mod sweep;

pub use error::{HarnessError, Result};
