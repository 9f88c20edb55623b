//! Actor-critic agent for the double pole-balancing task, with pseudorehearsal
//! strategies against catastrophic forgetting.
//!
//! This crate is `no_std` and only needs `alloc`. It holds the pure parts of the
//! workbench: cart/pole physics, observation encoding, a small feedforward
//! network engine, the actor-critic learner, pseudopattern rehearsal and the
//! statistics used to compare learning curves. Episode orchestration, file
//! formats and the CLI live in the `dpole` crate.

#![no_std]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

pub mod agent;
pub mod dynamics;
mod error;
pub mod metrics;
pub mod net;
pub mod observe;
pub mod rehearsal;
pub mod rng;

pub use error::{Error, Result};
