//! End-to-end acceptance run. Every criterion prints one PASS/FAIL line; the
//! process exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use num::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ring_rendezvous::analysis::{
    check_rules, classify_pebble_case, coverage_time, default_offset_horizon, gap_adversary, offset_trace,
    pebble_time_formula, worst_case_sweep, PebbleCase, SweepOptions, SweepReport,
};
use ring_rendezvous::engine::{replay_check, simulate, PlacementSpec, SimulationResult};
use ring_rendezvous::policies::{
    make_dr, make_pebble, make_turn_schedule_program, make_two_stage, Program, TurnSchedule,
};
use ring_rendezvous::rational::{int, ratio, Rational};
use ring_rendezvous::Parameters;

const N: i64 = 360;

fn speeds() -> Vec<Rational> {
    vec![ratio(5, 4), ratio(3, 2), int(2), int(3), int(10)]
}

fn params(c: &Rational) -> Parameters {
    Parameters::of(N, c.clone())
}

fn one() -> Rational {
    int(1)
}

fn tight(c: &Rational) -> Rational {
    c * int(N) / (c * c - one())
}

fn sweep_options() -> SweepOptions {
    SweepOptions {
        replay: true,
        ..SweepOptions::default()
    }
}

/// Uniform rational in the open interval `(lo, hi)` with denominator at most `max_den`.
fn rational_in(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational, max_den: i64) -> Rational {
    loop {
        let q = rng.gen_range(1..=max_den);
        let qr = int(q);
        let first = (lo * &qr).floor().to_integer().to_i64().unwrap() + 1;
        let last = (hi * &qr).ceil().to_integer().to_i64().unwrap() - 1;
        if first <= last {
            return ratio(rng.gen_range(first..=last), q);
        }
    }
}

/// Replay bookkeeping shared by every criterion.
#[derive(Default)]
struct Replays {
    checked: usize,
    failures: Vec<String>,
}

impl Replays {
    fn check(&mut self, label: &str, result: &SimulationResult) {
        self.checked += 1;
        let report = replay_check(result, &result.params);
        if !report.passed() {
            self.failures
                .push(format!("{label} d={}: {:?}", result.placement.d, report.diagnostics));
        }
    }

    fn absorb(&mut self, label: &str, report: &SweepReport) {
        self.checked += report.replay_checked;
        self.failures
            .extend(report.replay_failures.iter().map(|d| format!("{label} sweep d={d}")));
    }
}

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(failures: Vec<String>, summary: String) -> Verdict {
    match failures.first() {
        None => Verdict {
            ok: true,
            detail: summary,
        },
        Some(first) => Verdict {
            ok: false,
            detail: format!("{} failure(s), first: {first}", failures.len()),
        },
    }
}

fn two_stage_supremum(replays: &mut Replays) -> Verdict {
    let mut failures = Vec::new();
    for c in speeds() {
        let p = params(&c);
        let report = worst_case_sweep(&make_two_stage(&p), &p, &sweep_options()).expect("sweep");
        replays.absorb("two-stage", &report);
        if report.supremum != tight(&c) {
            failures.push(format!("c={c}: supremum {} != {}", report.supremum, tight(&c)));
        }
    }
    verdict(failures, "supremum = cn/(c^2-1) for all five speeds".into())
}

fn random_schedule(rng: &mut ChaCha8Rng, n: &Rational) -> TurnSchedule {
    let count = rng.gen_range(0..=6);
    let mut points: Vec<Rational> = (0..count)
        .map(|_| rational_in(rng, &Rational::zero(), &(int(3) * n), 64))
        .collect();
    points.sort();
    points.dedup();
    TurnSchedule::new(points).expect("sorted distinct points")
}

fn coverage_lower_bound(rules_failures: &mut Vec<String>) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut failures = Vec::new();
    let mut checked = 0;
    for c in [ratio(3, 2), int(2), int(3)] {
        let p = params(&c);
        let k = tight(&c);
        let mut programs: Vec<Box<dyn Program>> = vec![Box::new(make_two_stage(&p))];
        programs.extend(
            (0..200).map(|_| Box::new(make_turn_schedule_program(random_schedule(&mut rng, &p.n))) as Box<dyn Program>),
        );
        for (i, program) in programs.iter().enumerate() {
            let horizon = default_offset_horizon(program.as_ref(), &p).expect("horizon");
            let trace = offset_trace(program.as_ref(), &p, &horizon).expect("offset trace");
            let violations = check_rules(&trace);
            if !violations.is_empty() {
                rules_failures.push(format!("c={c} {}: {violations:?}", program.name()));
            }
            checked += 1;
            match coverage_time(&trace).coverage_time {
                Some(t) if i == 0 && t != k => failures.push(format!("c={c} two-stage coverage {t} != {k}")),
                Some(t) if t < k => failures.push(format!("c={c} {} covers at {t} < {k}", program.name())),
                Some(_) => {}
                None => failures.push(format!("c={c} {} incomplete by {horizon}", program.name())),
            }
        }
    }
    verdict(
        failures,
        format!("{checked} programs, all coverage times >= cn/(c^2-1), two-stage equal"),
    )
}

fn race(replays: &mut Replays) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut failures = Vec::new();
    for c in speeds() {
        let p = params(&c);
        let dr = make_dr(&p);
        for _ in 0..100 {
            let d = rational_in(&mut rng, &Rational::zero(), &p.n, 1000);
            let r = simulate(&dr, &p, &PlacementSpec::new(d.clone(), &p).unwrap(), None).expect("simulate");
            replays.check("dr", &r);
            let expected = &d / (&c - one());
            if r.rendezvous_time() != Some(&expected) {
                failures.push(format!("c={c} d={d}: {:?} != {expected}", r.rendezvous_time()));
            }
        }
        let report = worst_case_sweep(&dr, &p, &sweep_options()).expect("sweep");
        replays.absorb("dr", &report);
        let bound = &p.n / (&c - one());
        if report.supremum != bound || report.supremum_attained || report.supremum_at != p.n {
            failures.push(format!(
                "c={c}: supremum {} at {} attained={}, expected {bound} unattained at n",
                report.supremum, report.supremum_at, report.supremum_attained
            ));
        }
    }
    verdict(failures, "500 placements exact, supremum n/(c-1) unattained".into())
}

fn pebble_supremum(replays: &mut Replays) -> Verdict {
    let mut failures = Vec::new();
    for c in speeds() {
        let p = params(&c);
        let report = worst_case_sweep(&make_pebble(&p), &p, &sweep_options()).expect("sweep");
        replays.absorb("pebble", &report);
        if c <= int(2) {
            let expected = &p.n / (int(2) * (&c - one()));
            let half = &p.n / int(2);
            if !(report.supremum == expected && report.supremum_attained && report.supremum_at == half) {
                failures.push(format!(
                    "c={c}: supremum {} at {} attained={}, expected {expected} attained at {half}",
                    report.supremum, report.supremum_at, report.supremum_attained
                ));
            }
        } else {
            let (lo, hi) = (&p.n / (&c + one()), &p.n / &c);
            if report.supremum < lo || report.supremum > hi {
                failures.push(format!("c={c}: supremum {} outside [{lo}, {hi}]", report.supremum));
            }
        }
    }
    verdict(
        failures,
        "c<=2 attains n/(2(c-1)) at n/2; c>2 within [n/(c+1), n/c]".into(),
    )
}

/// Independent statement of the pebble program's rendezvous time.
fn pebble_oracle(p: &Parameters, d: &Rational) -> (usize, Rational) {
    let (n, c) = (&p.n, &p.c);
    let tau = if c <= &int(2) { n / int(2) } else { n / c };
    if d.is_zero() {
        (0, Rational::zero())
    } else if d < &tau {
        (1, (d + n) / (c + one()))
    } else if d == &tau {
        (2, d / (c - one()))
    } else if d * c <= n * (c - one()) {
        (3, d / (c - one()))
    } else {
        (4, (int(2) * n - d) / (c + one()))
    }
}

const CASE_NAMES: [&str; 5] = ["co-located", "d<tau", "d=tau", "race first", "slow turns"];

fn pebble_cases(replays: &mut Replays) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for c in speeds() {
        let p = params(&c);
        let pebble = make_pebble(&p);
        let n = &p.n;
        let tau = if c <= int(2) { n / int(2) } else { n / &c };
        let race_end = n * (&c - one()) / &c;
        let strata: Vec<(Rational, Rational)> = [
            (Rational::zero(), tau.clone()),
            (tau.clone(), rational_max(&tau, &race_end)),
            (rational_max(&tau, &race_end), n.clone()),
        ]
        .into_iter()
        .filter(|(lo, hi)| lo < hi)
        .collect();
        let mut draws: Vec<Rational> = vec![tau.clone(); 50];
        for (lo, hi) in &strata {
            draws.extend((0..60).map(|_| rational_in(&mut rng, lo, hi, 1000)));
        }
        while draws.len() < 1000 {
            draws.push(rational_in(&mut rng, &Rational::zero(), n, 1000));
        }
        let mut hits = [0usize; 5];
        for d in &draws {
            let (case, expected) = pebble_oracle(&p, d);
            hits[case] += 1;
            let formula = pebble_time_formula(&p, d).expect("formula");
            let r = simulate(&pebble, &p, &PlacementSpec::new(d.clone(), &p).unwrap(), None).expect("simulate");
            replays.check("pebble", &r);
            if r.rendezvous_time() != Some(&formula) || formula != expected {
                failures.push(format!(
                    "c={c} d={d}: simulated {:?}, formula {formula}, oracle {expected}",
                    r.rendezvous_time()
                ));
            }
            let crate_case = classify_pebble_case(&p, d).expect("case");
            let same = matches!(
                (case, crate_case),
                (0, PebbleCase::CoLocated)
                    | (1, PebbleCase::FastTurns)
                    | (2, PebbleCase::AtThreshold)
                    | (3, PebbleCase::RaceFirst)
                    | (4, PebbleCase::SlowTurns)
            );
            if !same {
                failures.push(format!(
                    "c={c} d={d}: classified {crate_case:?}, oracle {}",
                    CASE_NAMES[case]
                ));
            }
        }
        let race_possible = c > int(2);
        for case in 1..5 {
            let required = case != 3 || race_possible;
            if required && hits[case] < 50 {
                failures.push(format!(
                    "c={c}: case {} hit only {} times",
                    CASE_NAMES[case], hits[case]
                ));
            }
            if !required && hits[case] != 0 {
                failures.push(format!("c={c}: case {} should be empty", CASE_NAMES[case]));
            }
        }
        summary.push(format!("c={c} {:?}", &hits[1..]));
    }
    verdict(failures, format!("hits per case {}", summary.join(", ")))
}

fn rational_max(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

fn gap_floor(replays: &mut Replays) -> Verdict {
    let mut failures = Vec::new();
    let mut worst = Vec::new();
    for c in [int(2), int(3)] {
        let p = params(&c);
        let floor = &p.n / (&c + one()) - &p.n / int(1_000_000);
        let programs: Vec<Box<dyn Program>> = vec![
            Box::new(make_dr(&p)),
            Box::new(make_two_stage(&p)),
            Box::new(make_pebble(&p)),
        ];
        for program in &programs {
            let w = gap_adversary(program.as_ref(), &p, None).expect("gap adversary");
            replays.check("gap", &w.simulation);
            match w.achieved() {
                Some(t) if *t >= floor => worst.push(format!("{}@{c}={t}", program.name())),
                Some(t) => failures.push(format!("c={c} {}: {t} < {floor}", program.name())),
                None => failures.push(format!("c={c} {}: no rendezvous within the horizon", program.name())),
            }
        }
    }
    verdict(failures, format!("times {}", worst.join(" ")))
}

fn report(index: usize, title: &str, budget: Duration, v: &Verdict, elapsed: Duration) -> bool {
    let status = if v.ok { "PASS" } else { "FAIL" };
    println!(
        "criterion {index} [{status}] {title}: {} ({elapsed:.2?}, budget {budget:?})",
        v.detail
    );
    v.ok
}

fn main() {
    let mut replays = Replays::default();
    let mut all = true;
    let mut run = |index: usize, title: &str, budget: u64, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        all &= report(index, title, Duration::from_secs(budget), &v, start.elapsed());
    };

    run(1, "two-stage supremum equals cn/(c^2-1)", 10, &mut || {
        two_stage_supremum(&mut replays)
    });
    let mut rule_failures = Vec::new();
    run(
        2,
        "coverage time of turn schedules at least cn/(c^2-1)",
        30,
        &mut || coverage_lower_bound(&mut rule_failures),
    );
    run(3, "offset traces obey slope and envelope rules", 1, &mut || {
        verdict(
            std::mem::take(&mut rule_failures),
            "0 violations on every criterion 2 trace".into(),
        )
    });
    run(4, "race meets at d/(c-1), supremum n/(c-1)", 5, &mut || {
        race(&mut replays)
    });
    run(5, "pebble worst case", 10, &mut || pebble_supremum(&mut replays));
    run(6, "pebble simulation equals case formula", 30, &mut || {
        pebble_cases(&mut replays)
    });
    run(7, "gap adversary forces n/(c+1) - n/10^6", 5, &mut || {
        gap_floor(&mut replays)
    });
    run(8, "replay check on every simulation above", 1, &mut || {
        let failures = std::mem::take(&mut replays.failures);
        verdict(failures, format!("{} results replayed", replays.checked))
    });

    if !all {
        eprintln!("at least one acceptance criterion failed");
        std::process::exit(1);
    }
}
