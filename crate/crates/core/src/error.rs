use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("{what} = {value} is outside {range}")]
    OutOfRange {
        what: &'static str,
        value: Rational,
        range: String,
    },

    #[error("trajectory spans differ: [0, {left}] vs [0, {right}]")]
    SpanMismatch { left: Rational, right: Rational },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid turn schedule: {0}")]
    InvalidSchedule(String),

    #[error("unknown program {0:?} (expected dr, two-stage, pebble or schedule:<list>)")]
    UnknownProgram(String),

    #[error("program fault on agent {agent} at step {step}: {reason}")]
    ProgramFault { agent: char, step: usize, reason: String },

    #[error("{0}")]
    ModelMismatch(String),

    #[error("no rendezvous before horizon {horizon} at placement d = {d}")]
    HorizonExceeded { d: Rational, horizon: Rational },

    #[error("rendezvous time is not affine on regime [{lo}, {hi}]; refine the grid")]
    NonAffineRegime { lo: Rational, hi: Rational },

    #[error("could not resolve regime boundary inside [{lo}, {hi}]")]
    UnresolvedBoundary { lo: Rational, hi: Rational },

    #[error("gap construction failed: {0}")]
    ConstructionFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cannot write output: {0}")]
    Output(String),
}
