//! The homologous offset between two communication-free agents on separate
//! rings: after time `t` the slow agent has walked `t` steps and the fast one
//! `ct`, so with `f(s)` the clockwise displacement after `s` steps the lifted
//! offset is `L(t) = f(t) - f(ct)`.

use num::{Signed, Zero};

use crate::error::Error;
use crate::policies::{Observation, ObservationKind, Program};
use crate::rational::{self, int, Rational};
use crate::ring::Parameters;

/// Knots `(s, f(s))` of the single-agent displacement function over
/// `[0, max_steps]`. Slopes between knots are `±1`.
pub fn displacement_profile(program: &dyn Program, max_steps: &Rational) -> Result<Vec<(Rational, Rational)>, Error> {
    let mismatch = || {
        Error::ModelMismatch(format!(
            "coverage analysis requires a communication-free program; {} uses pebbles",
            program.name()
        ))
    };
    if program.uses_pebbles() {
        return Err(mismatch());
    }
    let mut ctl = program.controller();
    let mut action = ctl.observe(&Observation::start());
    let mut s = Rational::zero();
    let mut f = Rational::zero();
    let mut knots = vec![(s.clone(), f.clone())];
    let mut step = 1;
    loop {
        if action.drop_pebble {
            return Err(mismatch());
        }
        let sign = int(action.direction.sign());
        let next = match &action.next_mark {
            Some(m) if m <= &s => {
                return Err(Error::ProgramFault {
                    agent: '-',
                    step,
                    reason: format!("next mark {m} not beyond pedometer {s}"),
                })
            }
            Some(m) if m < max_steps => m.clone(),
            _ => max_steps.clone(),
        };
        f += sign * (&next - &s);
        s = next;
        if knots.last().is_some_and(|(k, _)| *k != s) {
            knots.push((s.clone(), f.clone()));
        }
        if &s >= max_steps {
            return Ok(knots);
        }
        action = ctl.observe(&Observation::new(ObservationKind::ScheduledMark, s.clone()));
        step += 1;
    }
}

fn eval_profile(knots: &[(Rational, Rational)], s: &Rational) -> Rational {
    let i = knots.partition_point(|(k, _)| k <= s);
    if i == 0 {
        return knots[0].1.clone();
    }
    let (s0, f0) = &knots[i - 1];
    match knots.get(i) {
        Some((s1, f1)) => f0 + (f1 - f0) * (s - s0) / (s1 - s0),
        None => f0.clone(),
    }
}

/// Default window: the last turn of the slow agent within `64n` steps plus
/// the time a steady drift of `c - 1` needs to sweep the whole ring.
pub fn default_offset_horizon(program: &dyn Program, params: &Parameters) -> Result<Rational, Error> {
    let cap = int(64) * &params.n;
    let knots = displacement_profile(program, &cap)?;
    let last_turn = if knots.len() > 2 {
        knots[knots.len() - 2].0.clone()
    } else {
        Rational::zero()
    };
    Ok(last_turn + &params.n / (&params.c - int(1)))
}

/// Piecewise-linear lifted offset `L` on `[0, horizon]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OffsetTrace {
    pub params: Parameters,
    knots: Vec<(Rational, Rational)>,
}

impl OffsetTrace {
    /// A trace from explicit knots `(t, L(t))`; times must start at 0 and strictly increase.
    pub fn from_knots(params: Parameters, knots: Vec<(Rational, Rational)>) -> Result<Self, Error> {
        match knots.first() {
            Some((t, _)) if t.is_zero() => {}
            _ => return Err(Error::InvalidTrajectory("offset trace must start at t = 0".into())),
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidTrajectory("offset knot times must increase".into()));
        }
        Ok(Self { params, knots })
    }

    pub fn knots(&self) -> &[(Rational, Rational)] {
        &self.knots
    }

    pub fn horizon(&self) -> &Rational {
        &self.knots.last().expect("non-empty").0
    }

    pub fn lifted_at(&self, t: &Rational) -> Rational {
        eval_profile(&self.knots, t)
    }

    /// `d(t) = L(t) mod n`.
    pub fn ring_at(&self, t: &Rational) -> Rational {
        rational::modulo(&self.lifted_at(t), &self.params.n)
    }

    /// Placement (clockwise distance from A's start to B's start) at which the
    /// two agents would be together at time `t`: `-L(t) mod n`.
    pub fn placement_at(&self, t: &Rational) -> Rational {
        rational::modulo(&-self.lifted_at(t), &self.params.n)
    }

    /// `(t0, t1, slope)` for each linear piece.
    pub fn pieces(&self) -> impl Iterator<Item = (&Rational, &Rational, Rational)> + '_ {
        self.knots.windows(2).map(|w| {
            let slope = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
            (&w[0].0, &w[1].0, slope)
        })
    }
}

/// Builds `L(t) = f(t) - f(ct)` for a communication-free program.
pub fn offset_trace(program: &dyn Program, params: &Parameters, horizon: &Rational) -> Result<OffsetTrace, Error> {
    if horizon.is_negative() {
        return Err(Error::OutOfRange {
            what: "horizon",
            value: horizon.clone(),
            range: "[0, ∞)".into(),
        });
    }
    let c = &params.c;
    let profile = displacement_profile(program, &(c * horizon))?;
    let mut times: Vec<Rational> = vec![Rational::zero(), horizon.clone()];
    for (s, _) in &profile {
        for t in [s.clone(), s / c] {
            if &t <= horizon {
                times.push(t);
            }
        }
    }
    times.sort();
    times.dedup();
    let knots = times
        .into_iter()
        .map(|t| {
            let l = eval_profile(&profile, &t) - eval_profile(&profile, &(c * &t));
            (t, l)
        })
        .collect();
    OffsetTrace::from_knots(params.clone(), knots)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleViolation {
    /// The offset changed faster than the sum of the speeds.
    Slope {
        t_start: Rational,
        t_end: Rational,
        slope: Rational,
    },
    /// `|L(t)| > t(c-1)`.
    Envelope {
        t: Rational,
        offset: Rational,
        limit: Rational,
    },
}

/// Checks `|L'| <= 1 + c` on every piece and `|L(t)| <= t(c-1)` at every knot.
/// An empty list means both rules hold.
pub fn check_rules(trace: &OffsetTrace) -> Vec<RuleViolation> {
    let c = &trace.params.c;
    let max_slope = c + int(1);
    let mut out: Vec<RuleViolation> = trace
        .pieces()
        .filter(|(_, _, slope)| slope.abs() > max_slope)
        .map(|(t0, t1, slope)| RuleViolation::Slope {
            t_start: t0.clone(),
            t_end: t1.clone(),
            slope,
        })
        .collect();
    for (t, l) in trace.knots() {
        let limit = t * (c - int(1));
        if l.abs() > limit {
            out.push(RuleViolation::Envelope {
                t: t.clone(),
                offset: l.clone(),
                limit,
            });
        }
    }
    out
}
