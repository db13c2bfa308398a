//! Adversarial placement for the `n/(c+1)` floor: during a window shorter
//! than `n/(c+1)` the fast agent's explored arc leaves an unexplored gap wider
//! than anything the slow agent can sweep, so the slow agent is hidden there.

use num::Signed;

use crate::engine::{self, AgentId, PlacementSpec, SimulationResult};
use crate::error::Error;
use crate::policies::Program;
use crate::rational::{int, Rational};
use crate::ring::{Parameters, RingPoint};

#[derive(Clone, Debug)]
pub struct GapWitness {
    pub window: Rational,
    /// Furthest clockwise point A reaches alone during the window.
    pub r: RingPoint,
    /// Furthest anti-clockwise point A reaches alone during the window.
    pub l: RingPoint,
    /// Lifted bounds of the unvisited arc, `(r, l + n)`.
    pub gap: (Rational, Rational),
    /// Lifted excursion `(min, max)` of B relative to its start during the window.
    pub slow_reach: (Rational, Rational),
    pub d_star: Rational,
    pub simulation: SimulationResult,
}

impl GapWitness {
    pub fn gap_length(&self) -> Rational {
        &self.gap.1 - &self.gap.0
    }

    pub fn achieved(&self) -> Option<&Rational> {
        self.simulation.rendezvous_time()
    }
}

/// Places B so that, running alone, it stays inside the arc A leaves
/// unvisited during `[0, n/(c+1) - epsilon]`. `epsilon` defaults to `n/10^6`.
pub fn gap_adversary(
    program: &dyn Program,
    params: &Parameters,
    epsilon: Option<&Rational>,
) -> Result<GapWitness, Error> {
    let Parameters { n, c } = params;
    let epsilon = epsilon.cloned().unwrap_or_else(|| n / int(1_000_000));
    let full = n / (c + int(1));
    if !epsilon.is_positive() || epsilon >= full {
        return Err(Error::OutOfRange {
            what: "epsilon",
            value: epsilon,
            range: format!("(0, {full})"),
        });
    }
    let window = full - &epsilon;

    let fast = engine::simulate_solo(program, params, AgentId::A, &window)?;
    let (fast_lo, fast_hi) = fast.trajectory.reach(&window)?;
    let slow = engine::simulate_solo(program, params, AgentId::B, &window)?;
    let (slow_lo, slow_hi) = slow.trajectory.reach(&window)?;

    let gap = (fast_hi.clone(), &fast_lo + n);
    let gap_len = &gap.1 - &gap.0;
    let slow_span = &slow_hi - &slow_lo;
    if !gap_len.is_positive() || gap_len <= slow_span {
        return Err(Error::ConstructionFailed(format!(
            "unvisited arc {gap_len} does not exceed the slow agent's sweep {slow_span}"
        )));
    }
    // B's start x must keep [x + slow_lo, x + slow_hi] strictly inside the gap.
    let lo = &gap.0 - &slow_lo;
    let hi = &gap.1 - &slow_hi;
    let x = (lo + hi) / int(2);
    let d_star = params.point(&x).value().clone();

    let placement = PlacementSpec::new(d_star.clone(), params)?;
    let simulation = engine::simulate(program, params, &placement, None)?;
    match simulation.rendezvous_time() {
        Some(t) if t < &window => {
            return Err(Error::ConstructionFailed(format!(
                "placement d = {d_star} met at {t}, inside the window {window}"
            )))
        }
        None => {
            return Err(Error::HorizonExceeded {
                d: d_star,
                horizon: engine::default_horizon(params),
            })
        }
        _ => {}
    }
    Ok(GapWitness {
        window,
        r: params.point(&fast_hi),
        l: params.point(&fast_lo),
        gap,
        slow_reach: (slow_lo, slow_hi),
        d_star,
        simulation,
    })
}
