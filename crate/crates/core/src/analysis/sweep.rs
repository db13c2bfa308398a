//! Exact worst case of a program's rendezvous time over the placement `d`.
//!
//! Runs are grouped by their event signature. Signature changes between grid
//! seeds are bracketed by bisection and snapped to the simplest rational in
//! the final bracket, then confirmed by probes on both sides. Inside a regime
//! the rendezvous time is affine in `d`, so suprema sit at regime endpoints;
//! an open endpoint yields a supremum that no placement attains.

use std::cmp::Ordering;

use num::{Signed, Zero};
use rayon::prelude::*;

use crate::engine::{self, replay_check, PlacementSpec};
use crate::error::Error;
use crate::policies::Program;
use crate::rational::{self, int, Rational};
use crate::ring::Parameters;

#[derive(Clone, Debug)]
pub struct SweepOptions {
    /// Number of evenly spaced seeds `i n / grid`.
    pub grid: usize,
    pub bisection_steps: u32,
    pub horizon: Option<Rational>,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Run [`replay_check`] on every simulation.
    pub replay: bool,
    pub extra_seeds: Vec<Rational>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            grid: 64,
            bisection_steps: 96,
            horizon: None,
            jobs: None,
            replay: false,
            extra_seeds: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleOrigin {
    Seed,
    Bisection,
    Boundary,
    Probe,
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub d: Rational,
    pub time: Rational,
    pub signature: String,
    pub signature_hash: u64,
    pub origin: SampleOrigin,
    pub regime: usize,
    replay_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Closed(Rational),
    Open(Rational),
}

impl Endpoint {
    pub fn value(&self) -> &Rational {
        match self {
            Endpoint::Closed(v) | Endpoint::Open(v) => v,
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Endpoint::Closed(_))
    }
}

/// A maximal interval of placements sharing one event signature, on which the
/// rendezvous time is `slope * d + intercept`.
#[derive(Clone, Debug)]
pub struct Regime {
    pub id: usize,
    pub signature: String,
    pub signature_hash: u64,
    pub left: Endpoint,
    pub right: Endpoint,
    pub slope: Rational,
    pub intercept: Rational,
    pub supremum: Rational,
    pub supremum_at: Rational,
    pub supremum_attained: bool,
}

impl Regime {
    pub fn time_at(&self, d: &Rational) -> Rational {
        &self.slope * d + &self.intercept
    }

    pub fn contains(&self, d: &Rational) -> bool {
        let above = match &self.left {
            Endpoint::Closed(v) => d >= v,
            Endpoint::Open(v) => d > v,
        };
        let below = match &self.right {
            Endpoint::Closed(v) => d <= v,
            Endpoint::Open(v) => d < v,
        };
        above && below
    }
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub program: String,
    pub params: Parameters,
    pub regimes: Vec<Regime>,
    /// Every evaluated placement, sorted by `d`.
    pub samples: Vec<Sample>,
    /// `(d, T)`: the smallest placement reaching the largest simulated time `T`.
    pub attained_max: (Rational, Rational),
    /// Least upper bound over `[0, n)` and the placement it is attained or approached at.
    pub supremum: Rational,
    pub supremum_at: Rational,
    pub supremum_attained: bool,
    pub replay_checked: usize,
    pub replay_failures: Vec<Rational>,
}

impl SweepReport {
    /// `(d*, T*)`: where the supremum is attained or approached, and its value.
    pub fn worst(&self) -> (&Rational, &Rational) {
        (&self.supremum_at, &self.supremum)
    }
}

#[derive(Clone, Debug)]
struct Eval {
    d: Rational,
    time: Rational,
    signature: String,
    origin: SampleOrigin,
    replay_ok: bool,
}

#[derive(Clone, Debug)]
enum Cut {
    /// The left regime includes the cut point.
    LeftClosed(Rational),
    /// The right regime includes the cut point.
    RightClosed(Rational),
    /// The cut point is a regime by itself.
    Isolated(Rational),
}

struct Sweeper<'a> {
    program: &'a dyn Program,
    params: &'a Parameters,
    options: &'a SweepOptions,
}

impl Sweeper<'_> {
    fn eval(&self, d: &Rational, origin: SampleOrigin) -> Result<Eval, Error> {
        let placement = PlacementSpec::new(d.clone(), self.params)?;
        let result = engine::simulate(self.program, self.params, &placement, self.options.horizon.as_ref())?;
        let time = result
            .rendezvous_time()
            .cloned()
            .ok_or_else(|| Error::HorizonExceeded {
                d: d.clone(),
                horizon: self
                    .options
                    .horizon
                    .clone()
                    .unwrap_or_else(|| engine::default_horizon(self.params)),
            })?;
        let replay_ok = !self.options.replay || replay_check(&result, self.params).passed();
        Ok(Eval {
            d: d.clone(),
            time,
            signature: result.signature(),
            origin,
            replay_ok,
        })
    }

    /// Locates every signature change between `lo` and `hi`.
    fn split(&self, lo: &Eval, hi: &Eval, cuts: &mut Vec<Cut>, evals: &mut Vec<Eval>) -> Result<(), Error> {
        let mut a = lo.clone();
        let mut b = hi.clone();
        for _ in 0..self.options.bisection_steps {
            let mid = (&a.d + &b.d) / int(2);
            let e = self.eval(&mid, SampleOrigin::Bisection)?;
            evals.push(e.clone());
            if e.signature == a.signature {
                a = e;
            } else {
                b = e;
            }
        }
        let unresolved = || Error::UnresolvedBoundary {
            lo: a.d.clone(),
            hi: b.d.clone(),
        };
        let s = rational::simplest_between(&a.d, &b.d);
        let at = self.eval(&s, SampleOrigin::Boundary)?;
        evals.push(at.clone());
        let delta = (&b.d - &a.d) / int(1 << 16);
        let probe = |x: Rational, expect: &str, evals: &mut Vec<Eval>| -> Result<bool, Error> {
            let e = self.eval(&x, SampleOrigin::Probe)?;
            let ok = e.signature == expect;
            evals.push(e);
            Ok(ok)
        };
        let left_ok = |evals: &mut Vec<Eval>| -> Result<bool, Error> {
            if s > a.d {
                probe(&s - &delta, &a.signature, evals)
            } else {
                Ok(true)
            }
        };
        let right_ok = |evals: &mut Vec<Eval>| -> Result<bool, Error> {
            if s < b.d {
                probe(&s + &delta, &b.signature, evals)
            } else {
                Ok(true)
            }
        };
        let cut = if at.signature == a.signature {
            Cut::LeftClosed(s.clone())
        } else if at.signature == b.signature {
            Cut::RightClosed(s.clone())
        } else {
            Cut::Isolated(s.clone())
        };
        if !(left_ok(evals)? && right_ok(evals)?) {
            return Err(unresolved());
        }
        cuts.push(cut);
        if b.signature != hi.signature {
            self.split(&b, hi, cuts, evals)?;
        }
        Ok(())
    }
}

fn fit(points: &[(&Rational, &Rational)]) -> Option<(Rational, Rational)> {
    let (d0, t0) = points.first()?;
    let (d1, t1) = points.last()?;
    if d0 == d1 {
        return Some((Rational::zero(), (*t0).clone()));
    }
    let slope = (*t1 - *t0) / (*d1 - *d0);
    let intercept = *t0 - &slope * *d0;
    points
        .iter()
        .all(|(d, t)| &(&slope * *d + &intercept) == *t)
        .then_some((slope, intercept))
}

/// Exact supremum of `simulate(program, d)` over `d ∈ [0, n)`.
pub fn worst_case_sweep(
    program: &dyn Program,
    params: &Parameters,
    options: &SweepOptions,
) -> Result<SweepReport, Error> {
    match options.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| Error::InvalidParameters(format!("thread pool: {e}")))?;
            pool.install(|| sweep_inner(program, params, options))
        }
        None => sweep_inner(program, params, options),
    }
}

fn sweep_inner(program: &dyn Program, params: &Parameters, options: &SweepOptions) -> Result<SweepReport, Error> {
    if options.grid < 2 {
        return Err(Error::InvalidParameters("sweep grid needs at least 2 seeds".into()));
    }
    let n = &params.n;
    let sweeper = Sweeper {
        program,
        params,
        options,
    };

    let mut seeds: Vec<Rational> = (0..options.grid)
        .map(|i| n * rational::ratio(i as i64, options.grid as i64))
        .chain(
            options
                .extra_seeds
                .iter()
                .filter(|d| !d.is_negative() && *d < n)
                .cloned(),
        )
        .collect();
    seeds.sort();
    seeds.dedup();
    let seed_evals = seeds
        .par_iter()
        .map(|d| sweeper.eval(d, SampleOrigin::Seed))
        .collect::<Result<Vec<_>, _>>()?;

    let pairs: Vec<(&Eval, &Eval)> = seed_evals
        .windows(2)
        .filter(|w| w[0].signature != w[1].signature)
        .map(|w| (&w[0], &w[1]))
        .collect();
    let found = pairs
        .par_iter()
        .map(|(lo, hi)| {
            let mut cuts = Vec::new();
            let mut evals = Vec::new();
            sweeper.split(lo, hi, &mut cuts, &mut evals).map(|_| (cuts, evals))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut evals = seed_evals.clone();
    let mut cuts = Vec::new();
    for (c, e) in found {
        cuts.extend(c);
        evals.extend(e);
    }
    evals.sort_by(|x, y| x.d.cmp(&y.d));
    evals.dedup_by(|x, y| x.d == y.d);

    // Regime skeletons from the ordered cuts.
    let mut bounds: Vec<(Endpoint, Endpoint)> = Vec::new();
    let mut left = Endpoint::Closed(Rational::zero());
    for cut in &cuts {
        match cut {
            Cut::LeftClosed(s) => {
                bounds.push((left, Endpoint::Closed(s.clone())));
                left = Endpoint::Open(s.clone());
            }
            Cut::RightClosed(s) => {
                bounds.push((left, Endpoint::Open(s.clone())));
                left = Endpoint::Closed(s.clone());
            }
            Cut::Isolated(s) => {
                bounds.push((left, Endpoint::Open(s.clone())));
                bounds.push((Endpoint::Closed(s.clone()), Endpoint::Closed(s.clone())));
                left = Endpoint::Open(s.clone());
            }
        }
    }
    bounds.push((left, Endpoint::Open(n.clone())));

    let mut regimes = Vec::with_capacity(bounds.len());
    let mut samples: Vec<Sample> = Vec::with_capacity(evals.len());
    for (id, (left, right)) in bounds.into_iter().enumerate() {
        let mut regime = Regime {
            id,
            signature: String::new(),
            signature_hash: 0,
            left,
            right,
            slope: Rational::zero(),
            intercept: Rational::zero(),
            supremum: Rational::zero(),
            supremum_at: Rational::zero(),
            supremum_attained: false,
        };
        let mut inside: Vec<Eval> = evals.iter().filter(|e| regime.contains(&e.d)).cloned().collect();
        let span_err = || Error::NonAffineRegime {
            lo: regime.left.value().clone(),
            hi: regime.right.value().clone(),
        };
        let Some(first) = inside.first() else {
            return Err(span_err());
        };
        regime.signature = first.signature.clone();
        // Interior probes until three distinct placements are available.
        let (lo, hi) = (regime.left.value().clone(), regime.right.value().clone());
        let mut extra = 1;
        while inside.len() < 3 && lo != hi && extra < 8 {
            let d = &lo + (&hi - &lo) * rational::ratio(extra, 8);
            extra += 2;
            if inside.iter().any(|e| e.d == d) {
                continue;
            }
            let e = sweeper.eval(&d, SampleOrigin::Probe)?;
            inside.push(e);
            inside.sort_by(|x, y| x.d.cmp(&y.d));
        }
        if inside.iter().any(|e| e.signature != regime.signature) {
            return Err(Error::UnresolvedBoundary { lo, hi });
        }
        let points: Vec<(&Rational, &Rational)> = inside.iter().map(|e| (&e.d, &e.time)).collect();
        let (slope, intercept) = fit(&points).ok_or_else(span_err)?;
        regime.slope = slope;
        regime.intercept = intercept;
        regime.signature_hash = engine::fnv1a(regime.signature.as_bytes());

        let ends = [&regime.left, &regime.right];
        let mut best: Option<(Rational, Rational, bool)> = None;
        for end in ends {
            let v = regime.time_at(end.value());
            let cand = (v, end.value().clone(), end.is_closed());
            best = Some(match best {
                None => cand,
                Some(b) => match cand.0.cmp(&b.0) {
                    Ordering::Greater => cand,
                    Ordering::Equal if cand.2 && !b.2 => cand,
                    _ => b,
                },
            });
        }
        let (sup, at, attained) = best.expect("two endpoints");
        regime.supremum = sup;
        regime.supremum_at = at;
        regime.supremum_attained = attained;

        samples.extend(inside.into_iter().map(|e| Sample {
            signature_hash: engine::fnv1a(e.signature.as_bytes()),
            d: e.d,
            time: e.time,
            signature: e.signature,
            origin: e.origin,
            regime: id,
            replay_ok: e.replay_ok,
        }));
        regimes.push(regime);
    }
    samples.sort_by(|x, y| x.d.cmp(&y.d));

    let attained_max = samples
        .iter()
        .fold(None::<&Sample>, |acc, s| match acc {
            Some(a) if a.time >= s.time => Some(a),
            _ => Some(s),
        })
        .map(|s| (s.d.clone(), s.time.clone()))
        .expect("at least one sample");
    let top = regimes
        .iter()
        .fold(None::<&Regime>, |acc, r| match acc {
            None => Some(r),
            Some(a) => match r.supremum.cmp(&a.supremum) {
                Ordering::Greater => Some(r),
                Ordering::Equal if r.supremum_attained && !a.supremum_attained => Some(r),
                _ => Some(a),
            },
        })
        .expect("at least one regime");

    let replay_failures = samples.iter().filter(|s| !s.replay_ok).map(|s| s.d.clone()).collect();
    Ok(SweepReport {
        program: program.name(),
        params: params.clone(),
        supremum: top.supremum.clone(),
        supremum_at: top.supremum_at.clone(),
        supremum_attained: top.supremum_attained,
        regimes,
        replay_checked: if options.replay { samples.len() } else { 0 },
        samples,
        attained_max,
        replay_failures,
    })
}
