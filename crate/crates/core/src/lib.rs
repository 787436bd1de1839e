//! Secret key rates for four-state reference-frame-independent QKD with
//! flawed, leaky sources.
//!
//! The pipeline runs bottom-up:
//!
//! - [`source`] turns device imperfections into emitted states and the
//!   Trojan-horse-aware coefficients used by the bounds,
//! - [`channel`] simulates the observed statistics for a lossy link,
//! - [`security`] bounds the phase error rates and Eve's information,
//! - [`rate`] adds decoy estimation, finite-size shifts, the key-rate formula
//!   and distance sweeps.
//!
//! [`config`] and [`cli`] back the `rfiqkd` command-line tool.

pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod polytope;
pub mod qubit;
pub mod rate;
pub mod security;
pub mod source;

pub use error::{Error, Result};
