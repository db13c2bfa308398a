//! Event-driven exact simulation of two agents running one program at speeds
//! `c` (agent A) and `1` (agent B).
//!
//! Between events both agents move at constant velocity, so the next event is
//! the minimum of finitely many closed-form times: a meeting, an arrival at a
//! pebble, a scheduled pedometer mark, or the horizon. Ties resolve as
//! meeting, then pebble observations, then marks, agent A before agent B.

use std::collections::BTreeSet;
use std::fmt;

use num::{BigInt, Integer, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::policies::{Action, Controller, Direction, Observation, ObservationKind, Program};
use crate::rational::{self, Rational};
use crate::ring::{self, Parameters, RingPoint, Trajectory};

const MAX_EVENTS: usize = 100_000;
const REPLAY_GRID: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentId {
    A,
    B,
}

impl AgentId {
    pub fn label(self) -> char {
        match self {
            AgentId::A => 'A',
            AgentId::B => 'B',
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Start,
    DropPebble,
    PebbleHere,
    Mark,
    Turn,
    Rendezvous,
    HorizonExceeded,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Start => "start",
            EventKind::DropPebble => "drop_pebble",
            EventKind::PebbleHere => "pebble_here",
            EventKind::Mark => "mark",
            EventKind::Turn => "turn",
            EventKind::Rendezvous => "rendezvous",
            EventKind::HorizonExceeded => "horizon_exceeded",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    #[serde(with = "rational::serde_str")]
    pub t: Rational,
    pub agent: AgentId,
    pub kind: EventKind,
    pub pos: RingPoint,
    #[serde(with = "rational::serde_str")]
    pub pedometer: Rational,
}

/// Clockwise distance from A's start (point 0) to B's start.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementSpec {
    #[serde(with = "rational::serde_str")]
    pub d: Rational,
}

impl PlacementSpec {
    pub fn new(d: Rational, params: &Parameters) -> Result<Self, Error> {
        if d.is_negative() || d >= params.n {
            return Err(Error::OutOfRange {
                what: "d",
                value: d,
                range: format!("[0, {})", params.n),
            });
        }
        Ok(Self { d })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Rendezvous { time: Rational, point: RingPoint },
    HorizonExceeded { horizon: Rational },
}

#[derive(Clone, Debug)]
pub struct SimulationResult {
    pub params: Parameters,
    pub placement: PlacementSpec,
    pub program: String,
    pub outcome: Outcome,
    pub trace: Vec<TraceEvent>,
    /// Agent A's then agent B's trajectory, both ending at the outcome time.
    pub trajectories: [Trajectory; 2],
}

impl SimulationResult {
    pub fn rendezvous_time(&self) -> Option<&Rational> {
        match &self.outcome {
            Outcome::Rendezvous { time, .. } => Some(time),
            Outcome::HorizonExceeded { .. } => None,
        }
    }

    pub fn meeting_point(&self) -> Option<&RingPoint> {
        match &self.outcome {
            Outcome::Rendezvous { point, .. } => Some(point),
            Outcome::HorizonExceeded { .. } => None,
        }
    }

    /// Ordered `agent:kind` list; runs with equal signatures took the same
    /// combinatorial path through the event loop.
    pub fn signature(&self) -> String {
        let parts: Vec<String> = self
            .trace
            .iter()
            .map(|e| format!("{}:{}", e.agent, e.kind.as_str()))
            .collect();
        parts.join(" ")
    }

    pub fn signature_hash(&self) -> u64 {
        fnv1a(self.signature().as_bytes())
    }

    pub fn to_document(&self) -> TraceDocument {
        TraceDocument {
            params: self.params.clone(),
            placement: self.placement.clone(),
            program: self.program.clone(),
            events: self.trace.clone(),
            rendezvous: match &self.outcome {
                Outcome::Rendezvous { time, point } => Some(RendezvousRecord {
                    t: time.clone(),
                    pos: point.clone(),
                }),
                Outcome::HorizonExceeded { .. } => None,
            },
        }
    }
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// JSON trace export; rationals are `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub params: Parameters,
    pub placement: PlacementSpec,
    pub program: String,
    pub events: Vec<TraceEvent>,
    pub rendezvous: Option<RendezvousRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RendezvousRecord {
    #[serde(with = "rational::serde_str")]
    pub t: Rational,
    pub pos: RingPoint,
}

pub fn default_horizon(params: &Parameters) -> Rational {
    rational::int(4) * &params.n / (&params.c - rational::int(1))
}

struct AgentRun {
    id: AgentId,
    speed: Rational,
    pos: RingPoint,
    direction: Direction,
    pedometer: Rational,
    mark: Option<Rational>,
    controller: Box<dyn Controller>,
    trajectory: Trajectory,
    steps: usize,
}

impl AgentRun {
    fn velocity(&self) -> Rational {
        &self.speed * rational::int(self.direction.sign())
    }

    fn time_to_pebble(&self, pebbles: &BTreeSet<RingPoint>, n: &Rational) -> Option<Rational> {
        pebbles
            .iter()
            .map(|p| {
                let ahead = match self.direction {
                    Direction::Clockwise => ring::cw_distance(&self.pos, p, n),
                    Direction::AntiClockwise => ring::cw_distance(p, &self.pos, n),
                };
                let ahead = if ahead.is_zero() { n.clone() } else { ahead };
                ahead / &self.speed
            })
            .min()
    }

    fn time_to_mark(&self) -> Option<Rational> {
        self.mark.as_ref().map(|m| (m - &self.pedometer) / &self.speed)
    }
}

struct World {
    n: Rational,
    t: Rational,
    agents: Vec<AgentRun>,
    pebbles: BTreeSet<RingPoint>,
    trace: Vec<TraceEvent>,
}

impl World {
    fn new(program: &dyn Program, params: &Parameters, starts: Vec<(AgentId, Rational, RingPoint)>) -> Self {
        let agents = starts
            .into_iter()
            .map(|(id, speed, pos)| AgentRun {
                id,
                speed,
                trajectory: Trajectory::at_rest(params.n.clone(), pos.clone()),
                pos,
                direction: Direction::Clockwise,
                pedometer: Rational::zero(),
                mark: None,
                controller: program.controller(),
                steps: 0,
            })
            .collect();
        Self {
            n: params.n.clone(),
            t: Rational::zero(),
            agents,
            pebbles: BTreeSet::new(),
            trace: Vec::new(),
        }
    }

    fn log(&mut self, idx: usize, kind: EventKind) {
        let a = &self.agents[idx];
        self.trace.push(TraceEvent {
            t: self.t.clone(),
            agent: a.id,
            kind,
            pos: a.pos.clone(),
            pedometer: a.pedometer.clone(),
        });
    }

    fn log_all(&mut self, kind: EventKind) {
        for i in 0..self.agents.len() {
            self.log(i, kind);
        }
    }

    fn deliver(&mut self, idx: usize, kind: ObservationKind) -> Result<(), Error> {
        let obs = Observation::new(kind, self.agents[idx].pedometer.clone());
        let action = self.agents[idx].controller.observe(&obs);
        self.agents[idx].steps += 1;
        self.apply(idx, action, kind == ObservationKind::Start)
    }

    fn apply(&mut self, idx: usize, action: Action, initial: bool) -> Result<(), Error> {
        let agent = &self.agents[idx];
        if let Some(m) = &action.next_mark {
            if m <= &agent.pedometer {
                return Err(Error::ProgramFault {
                    agent: agent.id.label(),
                    step: agent.steps,
                    reason: format!("next mark {m} not beyond pedometer {}", agent.pedometer),
                });
            }
        }
        if action.drop_pebble {
            let pos = agent.pos.clone();
            self.pebbles.insert(pos);
            self.log(idx, EventKind::DropPebble);
        }
        let turned = self.agents[idx].direction != action.direction;
        let agent = &mut self.agents[idx];
        agent.direction = action.direction;
        agent.mark = action.next_mark;
        if turned && !initial {
            self.log(idx, EventKind::Turn);
        }
        Ok(())
    }

    fn start(&mut self) -> Result<(), Error> {
        for i in 0..self.agents.len() {
            self.log(i, EventKind::Start);
            self.deliver(i, ObservationKind::Start)?;
        }
        Ok(())
    }

    fn advance(&mut self, dt: &Rational) {
        for a in &mut self.agents {
            let v = a.velocity();
            a.trajectory.extend(dt, &v);
            a.pos = a.pos.advance(&(&v * dt), &self.n);
            a.pedometer += &a.speed * dt;
        }
        self.t += dt;
    }

    fn meeting_in(&self) -> Option<Rational> {
        match self.agents.as_slice() {
            [a, b] => {
                let gap = ring::cw_distance(&a.pos, &b.pos, &self.n);
                ring::closing_time(&gap, &(a.velocity() - b.velocity()), &self.n)
            }
            _ => None,
        }
    }

    /// Runs until rendezvous or `horizon`; returns the meeting time if any.
    fn run(&mut self, horizon: &Rational) -> Result<Option<Rational>, Error> {
        if self.meeting_in().is_some_and(|dt| dt.is_zero()) {
            self.log_all(EventKind::Rendezvous);
            return Ok(Some(self.t.clone()));
        }
        self.start()?;
        for _ in 0..MAX_EVENTS {
            let meet = self.meeting_in();
            let pebble: Vec<Option<Rational>> = self
                .agents
                .iter()
                .map(|a| a.time_to_pebble(&self.pebbles, &self.n))
                .collect();
            let marks: Vec<Option<Rational>> = self.agents.iter().map(AgentRun::time_to_mark).collect();
            let mut dt = horizon - &self.t;
            for cand in meet.iter().chain(pebble.iter().flatten()).chain(marks.iter().flatten()) {
                if cand < &dt {
                    dt = cand.clone();
                }
            }
            self.advance(&dt);
            if meet.as_ref() == Some(&dt) {
                self.log_all(EventKind::Rendezvous);
                return Ok(Some(self.t.clone()));
            }
            if &self.t >= horizon {
                self.log_all(EventKind::HorizonExceeded);
                return Ok(None);
            }
            for (i, arrival) in pebble.iter().enumerate() {
                if arrival.as_ref() == Some(&dt) {
                    self.log(i, EventKind::PebbleHere);
                    self.deliver(i, ObservationKind::PebbleHere)?;
                }
            }
            for i in 0..self.agents.len() {
                let due = {
                    let a = &self.agents[i];
                    a.mark.as_ref() == Some(&a.pedometer)
                };
                if due {
                    self.log(i, EventKind::Mark);
                    self.deliver(i, ObservationKind::ScheduledMark)?;
                }
            }
        }
        let a = &self.agents[0];
        Err(Error::ProgramFault {
            agent: a.id.label(),
            step: a.steps,
            reason: format!("more than {MAX_EVENTS} events before t = {}", self.t),
        })
    }
}

/// Runs `program` on both agents: A (speed `c`) from point 0 and B (speed 1)
/// from point `d`. `horizon` defaults to [`default_horizon`].
pub fn simulate(
    program: &dyn Program,
    params: &Parameters,
    placement: &PlacementSpec,
    horizon: Option<&Rational>,
) -> Result<SimulationResult, Error> {
    let horizon = horizon.cloned().unwrap_or_else(|| default_horizon(params));
    if !horizon.is_positive() {
        return Err(Error::OutOfRange {
            what: "horizon",
            value: horizon,
            range: "(0, ∞)".into(),
        });
    }
    let mut world = World::new(
        program,
        params,
        vec![
            (AgentId::A, params.c.clone(), RingPoint::origin()),
            (AgentId::B, rational::int(1), params.point(&placement.d)),
        ],
    );
    let met = world.run(&horizon)?;
    let outcome = match met {
        Some(time) => Outcome::Rendezvous {
            time,
            point: world.agents[0].pos.clone(),
        },
        None => Outcome::HorizonExceeded { horizon },
    };
    let mut agents = world.agents.into_iter().map(|a| a.trajectory);
    let trajectories = [agents.next().expect("agent A"), agents.next().expect("agent B")];
    Ok(SimulationResult {
        params: params.clone(),
        placement: placement.clone(),
        program: program.name(),
        outcome,
        trace: world.trace,
        trajectories,
    })
}

/// One agent alone on the ring from point 0 for `window` time units, seeing
/// only its own pebbles.
#[derive(Clone, Debug)]
pub struct SoloRun {
    pub trajectory: Trajectory,
    pub trace: Vec<TraceEvent>,
}

pub fn simulate_solo(
    program: &dyn Program,
    params: &Parameters,
    agent: AgentId,
    window: &Rational,
) -> Result<SoloRun, Error> {
    let speed = match agent {
        AgentId::A => params.c.clone(),
        AgentId::B => rational::int(1),
    };
    let mut world = World::new(program, params, vec![(agent, speed, RingPoint::origin())]);
    if window.is_positive() {
        world.run(window)?;
    } else {
        world.start()?;
    }
    let trajectory = world.agents.pop().expect("one agent").trajectory;
    Ok(SoloRun {
        trajectory,
        trace: world.trace,
    })
}

/// Outcome of [`replay_check`]: empty diagnostics means every check passed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReplayReport {
    pub diagnostics: Vec<String>,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// Re-evaluates a result from its trajectories alone: trace ordering,
/// continuity, speed magnitudes, event positions and pedometers, exact
/// co-location at the reported meeting and absence of any earlier meeting.
pub fn replay_check(result: &SimulationResult, params: &Parameters) -> ReplayReport {
    let mut diag = Vec::new();
    let n = &params.n;
    let [ta, tb] = &result.trajectories;

    if let Some(w) = result.trace.windows(2).find(|w| w[0].t > w[1].t) {
        diag.push(format!("trace time decreases from {} to {}", w[0].t, w[1].t));
    }

    let speeds = [(AgentId::A, ta, params.c.clone()), (AgentId::B, tb, rational::int(1))];
    for (id, traj, speed) in &speeds {
        if !traj.segments().is_empty() {
            if let Err(e) = Trajectory::from_segments(n.clone(), traj.segments().to_vec()) {
                diag.push(format!("agent {id}: {e}"));
            }
            if traj.segments()[0].p_start != *traj.start() {
                diag.push(format!("agent {id}: first segment does not start at the start point"));
            }
        }
        for seg in traj.segments() {
            let v = seg.velocity.abs();
            if !v.is_zero() && &v != speed {
                diag.push(format!(
                    "agent {id}: speed {v} at t = {} (expected 0 or {speed})",
                    seg.t_start
                ));
            }
        }
    }
    if *ta.start() != RingPoint::origin() {
        diag.push(format!("agent A starts at {}, not 0", ta.start()));
    }
    if *tb.start() != params.point(&result.placement.d) {
        diag.push(format!(
            "agent B starts at {}, not d = {}",
            tb.start(),
            result.placement.d
        ));
    }

    let end = match &result.outcome {
        Outcome::Rendezvous { time, .. } => time.clone(),
        Outcome::HorizonExceeded { horizon } => horizon.clone(),
    };
    if ta.end_time() != end || tb.end_time() != end {
        diag.push(format!(
            "trajectory spans {} and {} differ from outcome time {end}",
            ta.end_time(),
            tb.end_time()
        ));
        return ReplayReport { diagnostics: diag };
    }

    for e in &result.trace {
        let traj = match e.agent {
            AgentId::A => ta,
            AgentId::B => tb,
        };
        match (traj.position_at(&e.t), traj.pedometer_at(&e.t)) {
            (Ok(pos), Ok(ped)) => {
                if pos != e.pos {
                    diag.push(format!(
                        "{} {} at t = {}: logged position {} but trajectory gives {pos}",
                        e.agent,
                        e.kind.as_str(),
                        e.t,
                        e.pos
                    ));
                }
                if ped != e.pedometer {
                    diag.push(format!(
                        "{} {} at t = {}: logged pedometer {} but trajectory gives {ped}",
                        e.agent,
                        e.kind.as_str(),
                        e.t,
                        e.pedometer
                    ));
                }
            }
            _ => diag.push(format!("event at t = {} lies outside the trajectories", e.t)),
        }
    }

    let met_at = result.rendezvous_time().cloned();
    let scale = common_scale(&[ta, tb], &end, &params.c);
    let walks: Vec<Vec<(BigInt, BigInt)>> = speeds
        .iter()
        .map(|(id, traj, _)| {
            let (walk, problems) = grid_walk(traj, &end, REPLAY_GRID, &scale);
            diag.extend(problems.into_iter().map(|p| format!("agent {id}: {p}")));
            walk
        })
        .collect();
    let moving = |traj: &Trajectory| traj.segments().iter().all(|s| !s.velocity.is_zero());
    let continuous_speed = moving(ta) && moving(tb);
    let (cp, cq) = (params.c.numer(), params.c.denom());
    for (i, ((pa, peda), (pb, pedb))) in walks[0].iter().zip(&walks[1]).enumerate() {
        let t = || &end * rational::ratio(i as i64, REPLAY_GRID as i64);
        if pa == pb && met_at.as_ref().is_none_or(|m| &t() < m) {
            diag.push(format!(
                "agents co-located at grid time {} before the reported outcome",
                t()
            ));
        }
        if continuous_speed && peda * cq != pedb * cp {
            diag.push(format!("pedometers at t = {} break the speed ratio", t()));
        }
    }

    match (&result.outcome, ring::first_meeting_time(ta, tb, n)) {
        (Outcome::Rendezvous { time, point }, Ok(first)) => {
            for (id, traj, _) in &speeds {
                if traj.position_at(time).as_ref() != Ok(point) {
                    diag.push(format!("agent {id} is not at the meeting point {point} at t = {time}"));
                }
            }
            if first.as_ref() != Some(time) {
                diag.push(format!("first co-location is {first:?}, reported rendezvous {time}"));
            }
        }
        (Outcome::HorizonExceeded { .. }, Ok(first)) => {
            if let Some(t) = first {
                diag.push(format!("agents co-located at t = {t} but no rendezvous reported"));
            }
        }
        (_, Err(e)) => diag.push(e.to_string()),
    }
    ReplayReport { diagnostics: diag }
}

/// A common denominator for every time, position and velocity step the grid
/// walk touches, so the walk runs on integers.
fn common_scale(trajs: &[&Trajectory], end: &Rational, c: &Rational) -> BigInt {
    let step = end / rational::int(REPLAY_GRID as i64);
    let mut scale = step.denom().lcm(trajs[0].ring_len().denom());
    for traj in trajs {
        scale = scale.lcm(traj.start().value().denom());
        for s in traj.segments() {
            for q in [&s.t_start, &s.t_end, s.p_start.value()] {
                scale = scale.lcm(q.denom());
            }
        }
    }
    scale * c.denom()
}

fn scaled(q: &Rational, scale: &BigInt) -> BigInt {
    (q * Rational::from_integer(scale.clone())).to_integer()
}

/// Scaled positions and pedometer readings at `grid + 1` evenly spaced times
/// over `[0, end]`, stepped incrementally inside each segment and restarted
/// from the segment data at each boundary. Mismatches are reported.
fn grid_walk(traj: &Trajectory, end: &Rational, grid: usize, scale: &BigInt) -> (Vec<(BigInt, BigInt)>, Vec<String>) {
    let n = traj.ring_len();
    let big_n = scaled(n, scale);
    let step = end / rational::int(grid as i64);
    let segs = traj.segments();
    let mut problems = Vec::new();
    let mut out = Vec::with_capacity(grid + 1);
    let mut pos = scaled(traj.start().value(), scale);
    let mut ped = BigInt::zero();
    let mut ped_at_seg = Rational::zero();
    let mut seg = 0;
    let mut seg_step = segs.first().map(|s| {
        (
            scaled(&(&s.velocity * &step), scale),
            scaled(&(s.velocity.abs() * &step), scale),
        )
    });
    let ends: Vec<BigInt> = segs.iter().map(|s| scaled(&s.t_end, scale)).collect();
    let big_step = scaled(&step, scale);
    let mut big_t = BigInt::zero();
    out.push((pos.clone(), ped.clone()));
    for i in 1..=grid {
        big_t += &big_step;
        let same_segment = ends.get(seg).is_some_and(|e| big_t <= *e);
        if same_segment {
            let (dp, dped) = seg_step.as_ref().expect("segment present");
            pos += dp;
            if pos >= big_n {
                pos -= &big_n;
            } else if pos.is_negative() {
                pos += &big_n;
            }
            ped += dped;
        } else {
            let next = end * rational::ratio(i as i64, grid as i64);
            while segs.get(seg).is_some_and(|s| next > s.t_end) {
                let s = &segs[seg];
                ped_at_seg += s.velocity.abs() * s.duration();
                seg += 1;
                if let Some(following) = segs.get(seg) {
                    if following.p_start != s.end_point(n) {
                        problems.push(format!("jump at t = {}", s.t_end));
                    }
                }
            }
            match segs.get(seg) {
                Some(s) => {
                    let dt = &next - &s.t_start;
                    pos = scaled(&rational::modulo(&(s.p_start.value() + &s.velocity * &dt), n), scale);
                    ped = scaled(&(&ped_at_seg + s.velocity.abs() * dt), scale);
                    seg_step = Some((
                        scaled(&(&s.velocity * &step), scale),
                        scaled(&(s.velocity.abs() * &step), scale),
                    ));
                }
                None if next > traj.end_time() => problems.push(format!("grid time {next} beyond the trajectory")),
                None => {}
            }
        }
        out.push((pos.clone(), ped.clone()));
    }
    let unscale = |x: &BigInt| Rational::new(x.clone(), scale.clone());
    match (out.last(), traj.position_at(end), traj.pedometer_at(end)) {
        (Some((p, q)), Ok(pe), Ok(qe)) if unscale(p) == *pe.value() && unscale(q) == qe => {}
        _ => problems.push(format!("stepped state at t = {end} disagrees with the trajectory")),
    }
    (out, problems)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::{make_dr, make_pebble, make_two_stage};
    use crate::rational::{int, ratio};

    fn run(program: &dyn Program, n: i64, c: Rational, d: Rational) -> SimulationResult {
        let params = Parameters::of(n, c);
        let placement = PlacementSpec::new(d, &params).unwrap();
        simulate(program, &params, &placement, None).unwrap()
    }

    #[test]
    fn dr_meets_after_gap_over_speed_difference() {
        let p = Parameters::of(10, int(2));
        let r = run(&make_dr(&p), 10, int(2), int(4));
        assert_eq!(r.rendezvous_time(), Some(&int(4)));
        assert_eq!(r.meeting_point().unwrap().value(), &int(8));
        assert!(replay_check(&r, &p).passed());
    }

    #[test]
    fn co_located_start_is_immediate() {
        let p = Parameters::of(12, int(3));
        for prog in [&make_dr(&p) as &dyn Program, &make_pebble(&p), &make_two_stage(&p)] {
            let r = run(prog, 12, int(3), int(0));
            assert_eq!(r.rendezvous_time(), Some(&int(0)));
            assert_eq!(r.meeting_point(), Some(&RingPoint::origin()));
            assert!(replay_check(&r, &p).passed());
        }
    }

    #[test]
    fn pebble_turn_before_threshold() {
        let p = Parameters::of(12, int(3));
        let r = run(&make_pebble(&p), 12, int(3), int(2));
        assert_eq!(r.rendezvous_time(), Some(&ratio(7, 2)));
        let turns: Vec<_> = r.trace.iter().filter(|e| e.kind == EventKind::Turn).collect();
        assert_eq!(turns.len(), 1);
        assert_eq!(turns[0].agent, AgentId::A);
        assert_eq!(turns[0].t, ratio(2, 3));
        assert!(replay_check(&r, &p).passed());
    }

    #[test]
    fn pebble_slow_agent_turns_at_fast_agents_start() {
        let p = Parameters::of(12, int(3));
        let r = run(&make_pebble(&p), 12, int(3), int(9));
        assert_eq!(r.rendezvous_time(), Some(&ratio(15, 4)));
        let turn = r.trace.iter().find(|e| e.kind == EventKind::Turn).unwrap();
        assert_eq!((turn.agent, turn.t.clone()), (AgentId::B, int(3)));
        assert!(replay_check(&r, &p).passed());
    }

    #[test]
    fn two_stage_within_bound() {
        let p = Parameters::of(12, int(2));
        let r = run(&make_two_stage(&p), 12, int(2), int(11));
        assert!(r.rendezvous_time().unwrap() <= &int(8));
        assert!(replay_check(&r, &p).passed());
    }

    #[test]
    fn horizon_exceeded_is_reported() {
        let p = Parameters::of(10, int(2));
        let placement = PlacementSpec::new(int(9), &p).unwrap();
        let r = simulate(&make_dr(&p), &p, &placement, Some(&int(3))).unwrap();
        assert_eq!(r.outcome, Outcome::HorizonExceeded { horizon: int(3) });
        assert_eq!(r.trace.last().unwrap().kind, EventKind::HorizonExceeded);
        assert!(replay_check(&r, &p).passed());
    }

    #[test]
    fn placement_and_horizon_validation() {
        let p = Parameters::of(10, int(2));
        assert!(PlacementSpec::new(int(10), &p).is_err());
        assert!(PlacementSpec::new(int(-1), &p).is_err());
        let pl = PlacementSpec::new(int(1), &p).unwrap();
        assert!(simulate(&make_dr(&p), &p, &pl, Some(&int(0))).is_err());
    }

    #[derive(Debug)]
    struct Stubborn;
    struct StubbornCtl;
    impl Controller for StubbornCtl {
        fn observe(&mut self, obs: &Observation) -> Action {
            Action {
                next_mark: Some(obs.pedometer.clone()),
                ..Action::walk(Direction::Clockwise)
            }
        }
    }
    impl Program for Stubborn {
        fn name(&self) -> String {
            "stubborn".into()
        }
        fn controller(&self) -> Box<dyn Controller> {
            Box::new(StubbornCtl)
        }
    }

    #[test]
    fn non_increasing_mark_is_a_program_fault() {
        let p = Parameters::of(10, int(2));
        let pl = PlacementSpec::new(int(3), &p).unwrap();
        let err = simulate(&Stubborn, &p, &pl, None).unwrap_err();
        assert!(
            matches!(
                err,
                Error::ProgramFault {
                    agent: 'A',
                    step: 1,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn replay_rejects_perturbed_meeting_point() {
        let p = Parameters::of(10, int(2));
        let mut r = run(&make_dr(&p), 10, int(2), int(4));
        if let Outcome::Rendezvous { point, .. } = &mut r.outcome {
            *point = point.advance(&ratio(1, 1000), &p.n);
        }
        assert!(!replay_check(&r, &p).passed());
    }

    #[test]
    fn replay_rejects_reordered_trace() {
        let p = Parameters::of(12, int(3));
        let mut r = run(&make_pebble(&p), 12, int(3), int(2));
        let last = r.trace.len() - 1;
        r.trace.swap(0, last);
        assert!(!replay_check(&r, &p).passed());
    }

    #[test]
    fn trace_document_round_trips() {
        let p = Parameters::of(12, int(3));
        let r = run(&make_pebble(&p), 12, int(3), ratio(7, 3));
        let doc = r.to_document();
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains("\"n\":\"12\""));
        let back: TraceDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.rendezvous.unwrap().t, *r.rendezvous_time().unwrap());
    }

    #[test]
    fn solo_pebble_agent_ignores_own_pebble_after_a_lap() {
        let p = Parameters::of(12, int(3));
        let solo = simulate_solo(&make_pebble(&p), &p, AgentId::B, &int(30)).unwrap();
        assert!(solo.trace.iter().all(|e| e.kind != EventKind::Turn));
        let laps = solo.trace.iter().filter(|e| e.kind == EventKind::PebbleHere).count();
        assert_eq!(laps, 2);
        assert_eq!(solo.trajectory.displacement_at(&int(30)).unwrap(), int(30));
    }
}
