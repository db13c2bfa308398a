//! Coloring coverage of `[0, n)` by the ring offset `d(t)`.

use num::{Signed, Zero};

use super::offset::OffsetTrace;
use crate::rational::{self, Rational};

/// Closed intervals on `[0, n]` with `0` and `n` identified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalSet {
    n: Rational,
    intervals: Vec<(Rational, Rational)>,
}

impl IntervalSet {
    pub fn new(n: Rational) -> Self {
        Self {
            n,
            intervals: Vec::new(),
        }
    }

    /// Adds the image of the lifted closed interval `[lo, hi]`.
    pub fn add_lifted(&mut self, lo: &Rational, hi: &Rational) {
        debug_assert!(lo <= hi);
        if hi - lo >= self.n {
            self.intervals = vec![(Rational::zero(), self.n.clone())];
            return;
        }
        let start = rational::modulo(lo, &self.n);
        let end = &start + (hi - lo);
        if end <= self.n {
            self.insert(start, end);
        } else {
            self.insert(start, self.n.clone());
            self.insert(Rational::zero(), end - &self.n);
        }
    }

    fn insert(&mut self, lo: Rational, hi: Rational) {
        let touches_zero = lo.is_zero();
        let touches_n = hi == self.n;
        self.merge(lo, hi);
        if touches_zero {
            self.merge(self.n.clone(), self.n.clone());
        }
        if touches_n {
            self.merge(Rational::zero(), Rational::zero());
        }
    }

    fn merge(&mut self, mut lo: Rational, mut hi: Rational) {
        let mut kept = Vec::with_capacity(self.intervals.len() + 1);
        for (a, b) in self.intervals.drain(..) {
            if b < lo || a > hi {
                kept.push((a, b));
            } else {
                lo = rational::min(&lo, &a);
                hi = rational::max(&hi, &b);
            }
        }
        kept.push((lo, hi));
        kept.sort();
        self.intervals = kept;
    }

    pub fn measure(&self) -> Rational {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Open uncovered intervals `(a, b)` of `[0, n]`.
    pub fn gaps(&self) -> Vec<(Rational, Rational)> {
        let mut out = Vec::new();
        let mut cursor = Rational::zero();
        for (a, b) in &self.intervals {
            if a > &cursor {
                out.push((cursor.clone(), a.clone()));
            }
            cursor = rational::max(&cursor, b);
        }
        if cursor < self.n || self.intervals.is_empty() {
            out.push((cursor, self.n.clone()));
        }
        out
    }

    pub fn is_full(&self) -> bool {
        self.gaps().is_empty()
    }

    /// Intervals as subsets of `[0, n)`; a full ring is `[(0, n)]`.
    pub fn intervals(&self) -> Vec<(Rational, Rational)> {
        if self.is_full() {
            return vec![(Rational::zero(), self.n.clone())];
        }
        self.intervals
            .iter()
            .filter(|(a, b)| !(a == &self.n && b == &self.n))
            .cloned()
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageResult {
    /// First time the colored set is all of `[0, n)`, if within the horizon.
    pub coverage_time: Option<Rational>,
    pub black_set: Vec<(Rational, Rational)>,
    /// First time each endpoint of `black_set` was colored.
    pub witness: Vec<(Rational, Rational)>,
    /// `(t, black measure)` at every knot up to coverage or the horizon.
    pub measure_curve: Vec<(Rational, Rational)>,
}

/// Sweeps `d(t)` piece by piece. Within a piece the colored arc grows
/// monotonically from `d(t0)`, so completion happens when the sweep reaches
/// the far end of the last uncovered gap in its direction.
pub fn coverage_time(trace: &OffsetTrace) -> CoverageResult {
    let n = &trace.params.n;
    let mut set = IntervalSet::new(n.clone());
    let l0 = &trace.knots()[0].1;
    set.add_lifted(l0, l0);
    let mut curve = vec![(Rational::zero(), set.measure())];
    let mut done = None;
    for (t0, t1, slope) in trace.pieces() {
        let start = trace.lifted_at(t0);
        if slope.is_zero() {
            curve.push((t1.clone(), set.measure()));
            continue;
        }
        let x0 = rational::modulo(&start, n);
        let needed = set
            .gaps()
            .iter()
            .map(|(a, b)| {
                if slope.is_positive() {
                    if &x0 <= a {
                        b - &x0
                    } else {
                        b + n - &x0
                    }
                } else if &x0 >= b {
                    &x0 - a
                } else {
                    &x0 + n - a
                }
            })
            .max();
        let Some(needed) = needed else {
            done = Some(t0.clone());
            break;
        };
        let speed = slope.abs();
        let available = &speed * (t1 - t0);
        let reach = rational::min(&needed, &available);
        let end = if slope.is_positive() {
            &start + &reach
        } else {
            &start - &reach
        };
        set.add_lifted(&rational::min(&start, &end), &rational::max(&start, &end));
        if needed <= available {
            let t = t0 + needed / speed;
            curve.push((t.clone(), set.measure()));
            done = Some(t);
            break;
        }
        curve.push((t1.clone(), set.measure()));
    }
    let black_set = set.intervals();
    let witness = black_set
        .iter()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .filter_map(|x| first_hit(trace, &x).map(|t| (x, t)))
        .collect();
    CoverageResult {
        coverage_time: done,
        black_set,
        witness,
        measure_curve: curve,
    }
}

/// Earliest `t` with `d(t) ≡ x (mod n)`.
pub fn first_hit(trace: &OffsetTrace, x: &Rational) -> Option<Rational> {
    let n = &trace.params.n;
    let (t_first, l_first) = &trace.knots()[0];
    if rational::modulo(&(l_first - x), n).is_zero() {
        return Some(t_first.clone());
    }
    for (t0, t1, slope) in trace.pieces() {
        let l0 = trace.lifted_at(t0);
        let dist = if slope.is_positive() {
            rational::modulo(&(x - &l0), n)
        } else if slope.is_negative() {
            rational::modulo(&(&l0 - x), n)
        } else {
            continue;
        };
        let dt = dist / slope.abs();
        if dt <= t1 - t0 {
            return Some(t0 + dt);
        }
    }
    None
}
