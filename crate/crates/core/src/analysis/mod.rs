mod bounds;
mod coverage;
mod gap;
mod offset;
mod sweep;

pub use bounds::{bounds, classify_pebble_case, pebble_time_formula, BoundSet, PebbleCase};
pub use coverage::{coverage_time, first_hit, CoverageResult, IntervalSet};
pub use gap::{gap_adversary, GapWitness};
pub use offset::{check_rules, default_offset_horizon, displacement_profile, offset_trace, OffsetTrace, RuleViolation};
pub use sweep::{worst_case_sweep, Endpoint, Regime, Sample, SampleOrigin, SweepOptions, SweepReport};
