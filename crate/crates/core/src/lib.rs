//! Agents evolving as iterated function systems under a broadcast controller,
//! with the measure-theoretic tooling to check that the closed loop is
//! predictable and fair, and a parked-car search scenario built on top.

pub mod config;
pub mod control;
pub mod csvio;
pub mod error;
pub mod fairness;
pub mod ifs;
pub mod measure;
pub mod rng;
pub mod search;

pub use error::{Error, Result};
