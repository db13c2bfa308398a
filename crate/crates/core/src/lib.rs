//! Exact simulation and worst-case analysis of rendezvous on a ring between two
//! agents that run the same deterministic program at speeds `c > 1` and `1`.
//!
//! * [`ring`]: positions, trajectories and meeting times.
//! * [`policies`]: agent programs (race, two-stage, pebble, turn schedules).
//! * [`engine`]: the event-driven two-agent simulator and replay checker.
//! * [`analysis`]: closed-form bounds, adversarial sweeps, offset traces and coverage.
//! * [`cli`]: the command-line front end.

#![allow(clippy::result_large_err)]

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod error;
pub mod policies;
pub mod rational;
pub mod ring;

pub use error::Error;
pub use rational::Rational;
pub use ring::Parameters;
