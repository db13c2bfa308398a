//! Positions, piecewise-linear motion and co-location on a continuous ring.
//!
//! Clockwise is the positive direction. Every quantity is an exact rational,
//! so meeting times satisfy co-location with equality rather than tolerance.

use std::fmt;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rational::{self, Rational};

/// The instance: ring length `n` and the faster agent's speed `c > 1`.
/// The slower agent moves at speed 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(with = "rational::serde_str")]
    pub n: Rational,
    #[serde(with = "rational::serde_str")]
    pub c: Rational,
}

impl Parameters {
    pub fn new(n: Rational, c: Rational) -> Result<Self, Error> {
        if !n.is_positive() {
            return Err(Error::InvalidParameters(format!("ring length n = {n} must be > 0")));
        }
        if c <= Rational::from_integer(1.into()) {
            return Err(Error::InvalidParameters(format!("speed ratio c = {c} must be > 1")));
        }
        Ok(Self { n, c })
    }

    /// Shorthand for tests and examples; panics on invalid input.
    pub fn of(n: i64, c: Rational) -> Self {
        Self::new(rational::int(n), c).expect("valid parameters")
    }

    pub fn point(&self, x: &Rational) -> RingPoint {
        RingPoint::wrap(x, &self.n)
    }
}

/// A location on the ring, kept in `[0, n)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RingPoint(#[serde(with = "rational::serde_str")] Rational);

impl RingPoint {
    pub fn wrap(x: &Rational, n: &Rational) -> Self {
        RingPoint(rational::modulo(x, n))
    }

    pub fn origin() -> Self {
        RingPoint(Rational::zero())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    /// Moves by a signed arc length.
    pub fn advance(&self, by: &Rational, n: &Rational) -> Self {
        RingPoint::wrap(&(&self.0 + by), n)
    }
}

impl fmt::Display for RingPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Clockwise arc length from `from` to `to`, in `[0, n)`.
pub fn cw_distance(from: &RingPoint, to: &RingPoint, n: &Rational) -> Rational {
    rational::modulo(&(to.value() - from.value()), n)
}

/// Constant signed velocity over `[t_start, t_end]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotionSegment {
    pub t_start: Rational,
    pub t_end: Rational,
    pub p_start: RingPoint,
    pub velocity: Rational,
}

impl MotionSegment {
    pub fn duration(&self) -> Rational {
        &self.t_end - &self.t_start
    }

    pub fn end_point(&self, n: &Rational) -> RingPoint {
        self.p_start.advance(&(&self.velocity * self.duration()), n)
    }

    fn contains(&self, t: &Rational) -> bool {
        &self.t_start <= t && t <= &self.t_end
    }
}

/// Time-contiguous motion of one agent starting at `t = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    ring_len: Rational,
    start: RingPoint,
    segments: Vec<MotionSegment>,
}

impl Trajectory {
    /// An agent resting at `start` for zero time.
    pub fn at_rest(ring_len: Rational, start: RingPoint) -> Self {
        Self {
            ring_len,
            start,
            segments: Vec::new(),
        }
    }

    /// Builds a trajectory from explicit segments, checking contiguity.
    pub fn from_segments(ring_len: Rational, segments: Vec<MotionSegment>) -> Result<Self, Error> {
        let first = segments
            .first()
            .ok_or_else(|| Error::InvalidTrajectory("no segments".into()))?;
        if !first.t_start.is_zero() {
            return Err(Error::InvalidTrajectory(format!("starts at t = {}", first.t_start)));
        }
        let mut traj = Trajectory::at_rest(ring_len, first.p_start.clone());
        for seg in segments {
            if seg.t_start >= seg.t_end {
                return Err(Error::InvalidTrajectory(format!(
                    "empty or reversed segment [{}, {}]",
                    seg.t_start, seg.t_end
                )));
            }
            if seg.t_start != traj.end_time() || seg.p_start != traj.end_point() {
                return Err(Error::InvalidTrajectory(format!(
                    "discontinuity at t = {}",
                    seg.t_start
                )));
            }
            traj.segments.push(seg);
        }
        Ok(traj)
    }

    /// Appends motion at `velocity` for `duration > 0`.
    pub fn extend(&mut self, duration: &Rational, velocity: &Rational) {
        debug_assert!(duration.is_positive());
        let seg = MotionSegment {
            t_start: self.end_time(),
            t_end: self.end_time() + duration,
            p_start: self.end_point(),
            velocity: velocity.clone(),
        };
        self.segments.push(seg);
    }

    pub fn ring_len(&self) -> &Rational {
        &self.ring_len
    }

    pub fn start(&self) -> &RingPoint {
        &self.start
    }

    pub fn segments(&self) -> &[MotionSegment] {
        &self.segments
    }

    pub fn end_time(&self) -> Rational {
        self.segments.last().map_or_else(Rational::zero, |s| s.t_end.clone())
    }

    pub fn end_point(&self) -> RingPoint {
        self.segments
            .last()
            .map_or_else(|| self.start.clone(), |s| s.end_point(&self.ring_len))
    }

    fn segment_at(&self, t: &Rational) -> Result<Option<&MotionSegment>, Error> {
        if t.is_negative() || *t > self.end_time() {
            return Err(Error::OutOfRange {
                what: "t",
                value: t.clone(),
                range: format!("[0, {}]", self.end_time()),
            });
        }
        Ok(self.segments.iter().find(|s| s.contains(t)))
    }

    /// Exact position at time `t`.
    pub fn position_at(&self, t: &Rational) -> Result<RingPoint, Error> {
        Ok(match self.segment_at(t)? {
            Some(seg) => seg
                .p_start
                .advance(&(&seg.velocity * (t - &seg.t_start)), &self.ring_len),
            None => self.start.clone(),
        })
    }

    /// Unwrapped clockwise displacement from the start at time `t`.
    pub fn displacement_at(&self, t: &Rational) -> Result<Rational, Error> {
        self.segment_at(t)?;
        Ok(self.integrate(t, |v| v.clone()))
    }

    /// Pedometer reading: total distance travelled by time `t`.
    pub fn pedometer_at(&self, t: &Rational) -> Result<Rational, Error> {
        self.segment_at(t)?;
        Ok(self.integrate(t, |v| v.abs()))
    }

    fn integrate(&self, t: &Rational, rate: impl Fn(&Rational) -> Rational) -> Rational {
        let mut total = Rational::zero();
        for seg in &self.segments {
            if &seg.t_start >= t {
                break;
            }
            let upto = rational::min(&seg.t_end, t);
            total += rate(&seg.velocity) * (upto - &seg.t_start);
        }
        total
    }

    /// Extreme unwrapped displacements `(min, max)` reached over `[0, t]`.
    pub fn reach(&self, t: &Rational) -> Result<(Rational, Rational), Error> {
        self.segment_at(t)?;
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        let mut disp = Rational::zero();
        for seg in &self.segments {
            if &seg.t_start >= t {
                break;
            }
            let upto = rational::min(&seg.t_end, t);
            disp += &seg.velocity * (upto - &seg.t_start);
            lo = rational::min(&lo, &disp);
            hi = rational::max(&hi, &disp);
        }
        Ok((lo, hi))
    }

    /// Segment boundaries, including `0` and the end time.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero()];
        out.extend(self.segments.iter().map(|s| s.t_end.clone()));
        out
    }
}

/// Earliest `t` at which the two trajectories are co-located, if any.
///
/// Between consecutive breakpoints of either trajectory the relative position
/// is affine, so each window reduces to one linear congruence.
pub fn first_meeting_time(a: &Trajectory, b: &Trajectory, n: &Rational) -> Result<Option<Rational>, Error> {
    let span = a.end_time();
    if span != b.end_time() {
        return Err(Error::SpanMismatch {
            left: span,
            right: b.end_time(),
        });
    }
    if a.position_at(&Rational::zero())? == b.position_at(&Rational::zero())? {
        return Ok(Some(Rational::zero()));
    }
    let mut times: Vec<Rational> = a.breakpoints();
    times.extend(b.breakpoints());
    times.sort();
    times.dedup();
    for w in times.windows(2) {
        let (t0, t1) = (&w[0], &w[1]);
        let mid = (t0 + t1) / rational::int(2);
        let va = velocity_at(a, &mid);
        let vb = velocity_at(b, &mid);
        let gap = cw_distance(&a.position_at(t0)?, &b.position_at(t0)?, n);
        if let Some(dt) = closing_time(&gap, &(va - vb), n) {
            if dt <= t1 - t0 {
                return Ok(Some(t0 + dt));
            }
        }
    }
    Ok(None)
}

/// Least `dt >= 0` with `rel_velocity * dt ≡ gap (mod n)`, where `gap` is the
/// clockwise distance from the chaser to the target.
pub fn closing_time(gap: &Rational, rel_velocity: &Rational, n: &Rational) -> Option<Rational> {
    if gap.is_zero() {
        Some(Rational::zero())
    } else if rel_velocity.is_positive() {
        Some(gap / rel_velocity)
    } else if rel_velocity.is_negative() {
        Some((n - gap) / -rel_velocity)
    } else {
        None
    }
}

fn velocity_at(traj: &Trajectory, t: &Rational) -> Rational {
    traj.segments
        .iter()
        .find(|s| s.contains(t))
        .map_or_else(Rational::zero, |s| s.velocity.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn line(n: i64, start: i64, velocity: Rational, until: Rational) -> Trajectory {
        let mut t = Trajectory::at_rest(int(n), RingPoint::wrap(&int(start), &int(n)));
        t.extend(&until, &velocity);
        t
    }

    #[test]
    fn parameters_reject_bad_values() {
        assert!(Parameters::new(int(0), int(2)).is_err());
        assert!(Parameters::new(int(10), int(1)).is_err());
        assert!(Parameters::new(int(10), ratio(1, 2)).is_err());
        assert!(Parameters::new(int(10), ratio(101, 100)).is_ok());
    }

    #[test]
    fn position_linear_and_wrapping() {
        let t = line(10, 0, int(2), int(5));
        assert_eq!(t.position_at(&int(3)).unwrap().value(), &int(6));
        assert_eq!(t.position_at(&int(0)).unwrap().value(), &int(0));
        let w = line(10, 8, int(1), int(5));
        assert_eq!(w.position_at(&int(5)).unwrap().value(), &int(3));
    }

    #[test]
    fn position_out_of_span_is_an_error() {
        let t = line(10, 0, int(1), int(5));
        assert!(matches!(t.position_at(&int(6)), Err(Error::OutOfRange { .. })));
        assert!(t.position_at(&int(-1)).is_err());
    }

    #[test]
    fn clockwise_distance() {
        let n = int(10);
        let p = |x| RingPoint::wrap(&int(x), &n);
        assert_eq!(cw_distance(&p(2), &p(7), &n), int(5));
        assert_eq!(cw_distance(&p(7), &p(2), &n), int(5));
        assert_eq!(cw_distance(&p(8), &p(1), &n), int(3));
        assert_eq!(cw_distance(&p(4), &p(4), &n), int(0));
    }

    #[test]
    fn overtaking_meets_after_gap_over_speed_difference() {
        let a = line(10, 0, int(2), int(20));
        let b = line(10, 4, int(1), int(20));
        assert_eq!(first_meeting_time(&a, &b, &int(10)).unwrap(), Some(int(4)));
    }

    #[test]
    fn co_located_start_meets_immediately() {
        let a = line(10, 3, int(2), int(5));
        let b = line(10, 3, int(-1), int(5));
        assert_eq!(first_meeting_time(&a, &b, &int(10)).unwrap(), Some(int(0)));
    }

    #[test]
    fn head_on_meets_after_gap_over_speed_sum() {
        let c = ratio(5, 2);
        let a = line(10, 0, c.clone(), int(20));
        let b = line(10, 3, int(-1), int(20));
        assert_eq!(
            first_meeting_time(&a, &b, &int(10)).unwrap(),
            Some(int(3) / (c + int(1)))
        );
    }

    #[test]
    fn parallel_motion_never_meets() {
        let a = line(10, 0, int(1), int(20));
        let b = line(10, 4, int(1), int(20));
        assert_eq!(first_meeting_time(&a, &b, &int(10)).unwrap(), None);
    }

    #[test]
    fn mismatched_spans_are_rejected() {
        let a = line(10, 0, int(1), int(5));
        let b = line(10, 4, int(1), int(6));
        assert!(matches!(
            first_meeting_time(&a, &b, &int(10)),
            Err(Error::SpanMismatch { .. })
        ));
    }

    #[test]
    fn from_segments_checks_contiguity() {
        let n = int(10);
        let seg = |t0: i64, t1: i64, p: i64, v: i64| MotionSegment {
            t_start: int(t0),
            t_end: int(t1),
            p_start: RingPoint::wrap(&int(p), &n),
            velocity: int(v),
        };
        assert!(Trajectory::from_segments(n.clone(), vec![seg(0, 2, 0, 1), seg(2, 3, 2, -1)]).is_ok());
        assert!(Trajectory::from_segments(n.clone(), vec![seg(0, 2, 0, 1), seg(2, 3, 3, -1)]).is_err());
        assert!(Trajectory::from_segments(n.clone(), vec![seg(0, 2, 0, 1), seg(3, 4, 2, -1)]).is_err());
        assert!(Trajectory::from_segments(n.clone(), vec![seg(1, 2, 0, 1)]).is_err());
    }

    #[test]
    fn pedometer_and_reach_over_turns() {
        let mut t = Trajectory::at_rest(int(10), RingPoint::origin());
        t.extend(&int(3), &int(1));
        t.extend(&int(5), &int(-1));
        assert_eq!(t.pedometer_at(&int(8)).unwrap(), int(8));
        assert_eq!(t.displacement_at(&int(8)).unwrap(), int(-2));
        assert_eq!(t.reach(&int(8)).unwrap(), (int(-2), int(3)));
        assert_eq!(t.reach(&int(2)).unwrap(), (int(0), int(2)));
    }

    fn velocity() -> impl Strategy<Value = Rational> {
        prop_oneof![
            Just(int(0)),
            Just(int(1)),
            Just(int(-1)),
            Just(ratio(3, 2)),
            Just(ratio(-3, 2))
        ]
    }

    fn trajectory(n: i64) -> impl Strategy<Value = Trajectory> {
        (0..n * 4, proptest::collection::vec((1i64..40, velocity()), 1..6)).prop_map(move |(start, segs)| {
            let mut t = Trajectory::at_rest(int(n), RingPoint::wrap(&ratio(start, 4), &int(n)));
            for (len, v) in segs {
                t.extend(&ratio(len, 4), &v);
            }
            t
        })
    }

    fn with_span(mut t: Trajectory, span: &Rational) -> Trajectory {
        let end = t.end_time();
        if &end < span {
            t.extend(&(span - end), &int(0));
        }
        t
    }

    proptest! {
        #[test]
        fn continuous_at_junctions(t in trajectory(10)) {
            for w in t.segments().windows(2) {
                prop_assert_eq!(w[0].end_point(t.ring_len()), w[1].p_start.clone());
                prop_assert_eq!(t.position_at(&w[0].t_end).unwrap(), w[1].p_start.clone());
            }
        }

        #[test]
        fn meeting_with_itself_is_immediate(t in trajectory(10)) {
            prop_assert_eq!(first_meeting_time(&t, &t, &int(10)).unwrap(), Some(int(0)));
        }

        #[test]
        fn meeting_is_symmetric(a in trajectory(10), b in trajectory(10)) {
            let span = rational::max(&a.end_time(), &b.end_time());
            let (a, b) = (with_span(a, &span), with_span(b, &span));
            let n = int(10);
            prop_assert_eq!(first_meeting_time(&a, &b, &n).unwrap(), first_meeting_time(&b, &a, &n).unwrap());
            if let Some(t) = first_meeting_time(&a, &b, &n).unwrap() {
                prop_assert_eq!(a.position_at(&t).unwrap(), b.position_at(&t).unwrap());
            }
        }

        // Brute force over candidate roots k: v_rel * t = gap + k n.
        #[test]
        fn constant_motion_meeting_is_least_root(
            pa in 0i64..40, pb in 0i64..40,
            va in -3i64..=3, vb in -3i64..=3, span in 1i64..60,
        ) {
            let n = int(10);
            let a = line(10, 0, int(va), int(span));
            let a = Trajectory::from_segments(n.clone(), vec![MotionSegment {
                p_start: RingPoint::wrap(&ratio(pa, 4), &n), ..a.segments()[0].clone()
            }]).unwrap();
            let b = Trajectory::from_segments(n.clone(), vec![MotionSegment {
                p_start: RingPoint::wrap(&ratio(pb, 4), &n), velocity: int(vb), ..a.segments()[0].clone()
            }]).unwrap();
            let got = first_meeting_time(&a, &b, &n).unwrap();
            let gap = cw_distance(a.start(), b.start(), &n);
            let rel = int(va - vb);
            let mut oracle: Option<Rational> = None;
            if gap.is_zero() {
                oracle = Some(int(0));
            } else if !rel.is_zero() {
                let kmax = (rel.abs() * int(span) / &n).ceil();
                let mut k = -kmax.clone();
                while k <= kmax {
                    let root = (&gap + &k * &n) / &rel;
                    if !root.is_negative() && root <= int(span)
                        && oracle.as_ref().is_none_or(|o| &root < o) {
                        oracle = Some(root);
                    }
                    k += int(1);
                }
            }
            prop_assert_eq!(&got, &oracle);
            if let Some(t) = got {
                prop_assert_eq!(a.position_at(&t).unwrap(), b.position_at(&t).unwrap());
            }
        }
    }
}
