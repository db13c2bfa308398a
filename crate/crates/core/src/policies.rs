//! Agent programs. Both agents run the same program; a program sees only
//! `(n, c)` and its own observations, never time, identity or its own speed.

use std::fmt;

use num::{Signed, Zero};

use crate::error::Error;
use crate::rational::{self, Rational};
use crate::ring::Parameters;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObservationKind {
    Start,
    PebbleHere,
    ScheduledMark,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub kind: ObservationKind,
    /// Distance travelled so far.
    pub pedometer: Rational,
}

impl Observation {
    pub fn new(kind: ObservationKind, pedometer: Rational) -> Self {
        Self { kind, pedometer }
    }

    pub fn start() -> Self {
        Self::new(ObservationKind::Start, Rational::zero())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Clockwise,
    AntiClockwise,
}

impl Direction {
    pub fn sign(self) -> i64 {
        match self {
            Direction::Clockwise => 1,
            Direction::AntiClockwise => -1,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Clockwise => Direction::AntiClockwise,
            Direction::AntiClockwise => Direction::Clockwise,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub direction: Direction,
    pub drop_pebble: bool,
    /// Pedometer reading at which to deliver the next `ScheduledMark`.
    pub next_mark: Option<Rational>,
}

impl Action {
    pub fn walk(direction: Direction) -> Self {
        Self {
            direction,
            drop_pebble: false,
            next_mark: None,
        }
    }
}

/// Per-run controller state.
pub trait Controller: Send {
    fn observe(&mut self, obs: &Observation) -> Action;
}

/// A program is a factory of fresh controllers. The first observation a
/// controller receives is `Start` at pedometer 0; its reply is the initial action.
pub trait Program: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Whether the program may drop pebbles or react to them.
    fn uses_pebbles(&self) -> bool {
        false
    }

    fn controller(&self) -> Box<dyn Controller>;
}

/// Walk clockwise forever.
#[derive(Clone, Debug)]
pub struct DistributedRace;

struct RaceController;

impl Controller for RaceController {
    fn observe(&mut self, _obs: &Observation) -> Action {
        Action::walk(Direction::Clockwise)
    }
}

impl Program for DistributedRace {
    fn name(&self) -> String {
        "dr".into()
    }

    fn controller(&self) -> Box<dyn Controller> {
        Box::new(RaceController)
    }
}

pub fn make_dr(_params: &Parameters) -> DistributedRace {
    DistributedRace
}

/// Strictly increasing pedometer values at which the agent reverses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TurnSchedule(Vec<Rational>);

impl TurnSchedule {
    pub fn new(points: Vec<Rational>) -> Result<Self, Error> {
        if let Some(p) = points.iter().find(|p| p.is_negative()) {
            return Err(Error::InvalidSchedule(format!("negative turn point {p}")));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSchedule(format!(
                "turn points must strictly increase: {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Self(points))
    }

    /// Parses a comma-separated list of rationals; the empty string is an empty schedule.
    pub fn parse(list: &str) -> Result<Self, Error> {
        let points = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(rational::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(points)
    }

    pub fn points(&self) -> &[Rational] {
        &self.0
    }

    /// Heading after `pedometer` steps; a turn scheduled at exactly `pedometer` has happened.
    pub fn direction_at(&self, pedometer: &Rational) -> Direction {
        let turns = self.0.iter().take_while(|p| *p <= pedometer).count();
        if turns % 2 == 0 {
            Direction::Clockwise
        } else {
            Direction::AntiClockwise
        }
    }

    pub fn next_after(&self, pedometer: &Rational) -> Option<Rational> {
        self.0.iter().find(|p| *p > pedometer).cloned()
    }
}

/// Observation-free program driven by a [`TurnSchedule`].
#[derive(Clone, Debug)]
pub struct ScheduleProgram {
    name: String,
    schedule: TurnSchedule,
}

impl ScheduleProgram {
    pub fn schedule(&self) -> &TurnSchedule {
        &self.schedule
    }
}

struct ScheduleController {
    schedule: TurnSchedule,
}

impl Controller for ScheduleController {
    fn observe(&mut self, obs: &Observation) -> Action {
        Action {
            direction: self.schedule.direction_at(&obs.pedometer),
            drop_pebble: false,
            next_mark: self.schedule.next_after(&obs.pedometer),
        }
    }
}

impl Program for ScheduleProgram {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn controller(&self) -> Box<dyn Controller> {
        Box::new(ScheduleController {
            schedule: self.schedule.clone(),
        })
    }
}

pub fn make_turn_schedule_program(schedule: TurnSchedule) -> ScheduleProgram {
    let list: Vec<String> = schedule.points().iter().map(rational::fmt).collect();
    ScheduleProgram {
        name: format!("schedule:{}", list.join(",")),
        schedule,
    }
}

/// Clockwise for `k = cn/(c^2 - 1)` steps, then anti-clockwise forever.
pub fn make_two_stage(params: &Parameters) -> ScheduleProgram {
    let schedule = TurnSchedule::new(vec![two_stage_turn(params)]).expect("single positive point");
    ScheduleProgram {
        name: "two-stage".into(),
        schedule,
    }
}

pub fn two_stage_turn(params: &Parameters) -> Rational {
    let Parameters { n, c } = params;
    c * n / (c * c - rational::int(1))
}

/// Pebble turn threshold `min{n/2, n/c}`.
pub fn pebble_threshold(params: &Parameters) -> Rational {
    let Parameters { n, c } = params;
    rational::min(&(n / rational::int(2)), &(n / c))
}

/// Drop a pebble at the start and walk clockwise; on the first pebble met
/// after positive travel, reverse for good if fewer than `tau` steps were walked.
#[derive(Clone, Debug)]
pub struct PebbleProgram {
    tau: Rational,
}

impl PebbleProgram {
    pub fn tau(&self) -> &Rational {
        &self.tau
    }
}

struct PebbleController {
    tau: Rational,
    direction: Direction,
    decided: bool,
}

impl Controller for PebbleController {
    fn observe(&mut self, obs: &Observation) -> Action {
        match obs.kind {
            ObservationKind::Start => Action {
                direction: self.direction,
                drop_pebble: true,
                next_mark: None,
            },
            ObservationKind::PebbleHere if !self.decided && obs.pedometer.is_positive() => {
                self.decided = true;
                if obs.pedometer < self.tau {
                    self.direction = Direction::AntiClockwise;
                }
                Action::walk(self.direction)
            }
            _ => Action::walk(self.direction),
        }
    }
}

impl Program for PebbleProgram {
    fn name(&self) -> String {
        "pebble".into()
    }

    fn uses_pebbles(&self) -> bool {
        true
    }

    fn controller(&self) -> Box<dyn Controller> {
        Box::new(PebbleController {
            tau: self.tau.clone(),
            direction: Direction::Clockwise,
            decided: false,
        })
    }
}

pub fn make_pebble(params: &Parameters) -> PebbleProgram {
    PebbleProgram {
        tau: pebble_threshold(params),
    }
}

/// Resolves `dr`, `two-stage`, `pebble` or `schedule:<comma-separated rationals>`.
pub fn program_by_name(name: &str, params: &Parameters) -> Result<Box<dyn Program>, Error> {
    match name.trim() {
        "dr" => Ok(Box::new(make_dr(params))),
        "two-stage" => Ok(Box::new(make_two_stage(params))),
        "pebble" => Ok(Box::new(make_pebble(params))),
        other => match other.strip_prefix("schedule:") {
            Some(list) => Ok(Box::new(make_turn_schedule_program(TurnSchedule::parse(list)?))),
            None => Err(Error::UnknownProgram(other.to_string())),
        },
    }
}

/// Feeds `observations` to a fresh controller and collects the actions.
pub fn replay(program: &dyn Program, observations: &[Observation]) -> Vec<Action> {
    let mut ctl = program.controller();
    observations.iter().map(|o| ctl.observe(o)).collect()
}
