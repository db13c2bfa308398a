use serde::Serialize;

use crate::error::Error;
use crate::policies::{pebble_threshold, two_stage_turn};
use crate::rational::{self, int, Rational};
use crate::ring::Parameters;
use num::{Signed, Zero};

/// Closed-form rendezvous-time bounds for one instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundSet {
    /// Supremum of the race time `d/(c-1)` over placements: `n/(c-1)`.
    #[serde(with = "rational::serde_str")]
    pub dr_bound: Rational,
    /// `cn/(c^2-1)`, tight without communication.
    #[serde(with = "rational::serde_str")]
    pub no_comm_tight: Rational,
    /// `max{n/(2(c-1)), n/c}`, achieved by the pebble program.
    #[serde(with = "rational::serde_str")]
    pub pebble_upper: Rational,
    /// `max{n/(2(c-1)), n/(c+1)}`, required of any pebble or white-board algorithm.
    #[serde(with = "rational::serde_str")]
    pub pebble_lower: Rational,
    /// `min{n/2, n/c}`.
    #[serde(with = "rational::serde_str")]
    pub tau: Rational,
    /// Turn point of the two-stage program, equal to `no_comm_tight`.
    #[serde(with = "rational::serde_str")]
    pub two_stage_k: Rational,
}

impl BoundSet {
    /// Race time from placement `d`.
    pub fn dr_time(params: &Parameters, d: &Rational) -> Rational {
        d / (&params.c - int(1))
    }

    pub fn fields(&self) -> [(&'static str, &Rational); 6] {
        [
            ("dr_bound", &self.dr_bound),
            ("no_comm_tight", &self.no_comm_tight),
            ("pebble_upper", &self.pebble_upper),
            ("pebble_lower", &self.pebble_lower),
            ("tau", &self.tau),
            ("two_stage_k", &self.two_stage_k),
        ]
    }
}

pub fn bounds(params: &Parameters) -> BoundSet {
    let Parameters { n, c } = params;
    let one = int(1);
    let half_gap = n / (int(2) * (c - &one));
    BoundSet {
        dr_bound: n / (c - &one),
        no_comm_tight: c * n / (c * c - &one),
        pebble_upper: rational::max(&half_gap, &(n / c)),
        pebble_lower: rational::max(&half_gap, &(n / (c + &one))),
        tau: pebble_threshold(params),
        two_stage_k: two_stage_turn(params),
    }
}

/// Which branch of the pebble program's analysis a placement falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PebbleCase {
    /// `d = 0`.
    CoLocated,
    /// `d = tau`: nobody turns.
    AtThreshold,
    /// `d < tau`: A turns at B's pebble.
    FastTurns,
    /// `d > tau`, the race catches B before B reaches A's start.
    RaceFirst,
    /// `d > tau`, B reaches A's start first and turns.
    SlowTurns,
}

pub fn classify_pebble_case(params: &Parameters, d: &Rational) -> Result<PebbleCase, Error> {
    let Parameters { n, c } = params;
    if d.is_negative() || d >= n {
        return Err(Error::OutOfRange {
            what: "d",
            value: d.clone(),
            range: format!("[0, {n})"),
        });
    }
    let tau = pebble_threshold(params);
    Ok(if d.is_zero() {
        PebbleCase::CoLocated
    } else if d < &tau {
        PebbleCase::FastTurns
    } else if d == &tau {
        PebbleCase::AtThreshold
    } else if d / (c - int(1)) <= n - d {
        PebbleCase::RaceFirst
    } else {
        PebbleCase::SlowTurns
    })
}

/// Closed-form rendezvous time of the pebble program from placement `d`.
pub fn pebble_time_formula(params: &Parameters, d: &Rational) -> Result<Rational, Error> {
    let Parameters { n, c } = params;
    let one = int(1);
    Ok(match classify_pebble_case(params, d)? {
        PebbleCase::CoLocated => Rational::zero(),
        PebbleCase::FastTurns => (d + n) / (&one + c),
        PebbleCase::AtThreshold | PebbleCase::RaceFirst => d / (c - &one),
        PebbleCase::SlowTurns => (int(2) * n - d) / (&one + c),
    })
}
