//! Command-line front end: `simulate`, `sweep`, `coverage` and `bounds`.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 horizon exceeded,
//! 3 a sweep finished but its bound check failed.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{self, SweepOptions};
use crate::engine::{self, Outcome, PlacementSpec, SimulationResult};
use crate::error::Error;
use crate::policies::{self, Program};
use crate::rational::{self, int, Rational};
use crate::ring::Parameters;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_HORIZON: u8 = 2;
pub const EXIT_BOUND_FAILED: u8 = 3;

const AFTER_HELP: &str = "\
Rationals are exact: \"p/q\", integers, or terminating decimals (\"1.25\").
Programs: dr | two-stage | pebble | schedule:<comma-separated pedometer values>

Output files (--out, or stdout with --format):
  simulate  json: {params:{n,c}, placement:{d}, program, events:[{t,agent,kind,pos,pedometer}],
                  rendezvous:{t,pos}|null}, rationals as \"p/q\" strings
            csv:  t,agent,kind,pos,pedometer
  sweep     csv:  d,time,regime,signature_hash
  coverage  csv:  t,black_measure
When CSV goes to stdout the summary follows as '#' comment lines.

Exit codes: 0 ok, 1 usage/validation, 2 horizon exceeded, 3 bound check failed.";

#[derive(Debug, Parser)]
#[command(name = "ring-rendezvous", version, about = "Exact two-speed rendezvous on a ring", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one placement and print the rendezvous time
    Simulate(RunArgs),
    /// Worst case over all placements, checked against the matching bound
    Sweep(RunArgs),
    /// Offset-coverage time and rule checks for a communication-free program
    Coverage(RunArgs),
    /// Print every closed-form bound for (n, c)
    Bounds(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Ring length
    #[arg(long)]
    pub n: String,
    /// Speed ratio of the faster agent (> 1)
    #[arg(long)]
    pub c: String,
    /// Clockwise distance from the fast agent's start to the slow agent's start
    #[arg(long)]
    pub d: Option<String>,
    #[arg(long)]
    pub program: Option<String>,
    /// Simulation or coverage horizon
    #[arg(long)]
    pub horizon: Option<String>,
    /// Slack below n/(c+1) for the gap adversary (default n/10^6)
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Number of sweep seeds
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Sweep worker threads (default: all available)
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parsed and validated arguments.
#[derive(Debug)]
pub struct RunConfig {
    pub params: Parameters,
    pub placement: Option<PlacementSpec>,
    pub program: Option<String>,
    pub horizon: Option<Rational>,
    pub epsilon: Option<Rational>,
    pub grid: usize,
    pub jobs: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self, Error> {
        let params = Parameters::new(rational::parse(&args.n)?, rational::parse(&args.c)?)?;
        let placement = args
            .d
            .as_deref()
            .map(|d| rational::parse(d).and_then(|d| PlacementSpec::new(d, &params)))
            .transpose()?;
        let opt = |s: &Option<String>| s.as_deref().map(rational::parse).transpose();
        Ok(Self {
            placement,
            program: args.program.clone(),
            horizon: opt(&args.horizon)?,
            epsilon: opt(&args.epsilon)?,
            grid: args.grid,
            jobs: args.jobs,
            format: args.format,
            out: args.out.clone(),
            params,
        })
    }

    fn program(&self) -> Result<Box<dyn Program>, Error> {
        let name = self
            .program
            .as_deref()
            .ok_or_else(|| Error::Parse("--program is required".into()))?;
        policies::program_by_name(name, &self.params)
    }
}

fn dec(x: &Rational) -> String {
    format!("{}", rational::to_f64(x))
}

type Handler = fn(&RunConfig, &mut dyn Write) -> Result<u8, Error>;

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (args, f): (&RunArgs, Handler) = match &cli.command {
        Command::Simulate(a) => (a, cmd_simulate),
        Command::Sweep(a) => (a, cmd_sweep),
        Command::Coverage(a) => (a, cmd_coverage),
        Command::Bounds(a) => (a, cmd_bounds),
    };
    let result = RunConfig::from_args(args).and_then(|cfg| f(&cfg, out));
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::HorizonExceeded { .. } => EXIT_HORIZON,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn io_err(e: io::Error) -> Error {
    Error::Output(e.to_string())
}

fn write_events_csv(result: &SimulationResult, w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "t,agent,kind,pos,pedometer")?;
    for e in &result.trace {
        writeln!(w, "{},{},{},{},{}", e.t, e.agent, e.kind.as_str(), e.pos, e.pedometer)?;
    }
    Ok(())
}

fn write_trace(result: &SimulationResult, format: Format, w: &mut dyn Write) -> Result<(), Error> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &result.to_document()).map_err(|e| Error::Output(e.to_string()))?;
            writeln!(w).map_err(io_err)
        }
        Format::Csv => write_events_csv(result, w).map_err(io_err),
    }
}

pub fn cmd_simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<u8, Error> {
    let placement = cfg
        .placement
        .as_ref()
        .ok_or_else(|| Error::Parse("simulate needs --d".into()))?;
    let program = cfg.program()?;
    let result = engine::simulate(program.as_ref(), &cfg.params, placement, cfg.horizon.as_ref())?;
    if let Some(path) = &cfg.out {
        let mut f = File::create(path).map_err(io_err)?;
        write_trace(&result, cfg.format.unwrap_or(Format::Json), &mut f)?;
    } else if let Some(fmt) = cfg.format {
        write_trace(&result, fmt, out)?;
        return Ok(exit_for(&result));
    }
    match &result.outcome {
        Outcome::Rendezvous { time, point } => {
            writeln!(out, "rendezvous_time {time} ({})", dec(time)).map_err(io_err)?;
            writeln!(out, "meeting_point {point} ({})", dec(point.value())).map_err(io_err)?;
        }
        Outcome::HorizonExceeded { horizon } => {
            writeln!(
                out,
                "horizon exceeded: no rendezvous by t = {horizon} ({})",
                dec(horizon)
            )
            .map_err(io_err)?;
        }
    }
    Ok(exit_for(&result))
}

fn exit_for(result: &SimulationResult) -> u8 {
    match result.outcome {
        Outcome::Rendezvous { .. } => EXIT_OK,
        Outcome::HorizonExceeded { .. } => EXIT_HORIZON,
    }
}

/// Sink for CSV rows plus summary lines, commented when sharing stdout.
struct Report<'a> {
    csv: Box<dyn Write + 'a>,
    summary_prefix: &'static str,
}

impl<'a> Report<'a> {
    fn new(cfg: &RunConfig, out: &'a mut dyn Write) -> Result<(Self, Option<&'a mut dyn Write>), Error> {
        match &cfg.out {
            Some(path) => {
                let f = File::create(path).map_err(io_err)?;
                Ok((
                    Report {
                        csv: Box::new(f),
                        summary_prefix: "",
                    },
                    Some(out),
                ))
            }
            None => Ok((
                Report {
                    csv: Box::new(out),
                    summary_prefix: "# ",
                },
                None,
            )),
        }
    }
}

fn summary(report: &mut Report, stdout: &mut Option<&mut dyn Write>, line: &str) -> Result<(), Error> {
    let text = format!("{}{line}", report.summary_prefix);
    match stdout {
        Some(w) => writeln!(w, "{text}"),
        None => writeln!(report.csv, "{text}"),
    }
    .map_err(io_err)
}

/// Bound verdict for a sweep supremum: `(line, pass)`.
pub fn sweep_verdict(program: &str, params: &Parameters, report: &analysis::SweepReport) -> (String, bool) {
    let b = analysis::bounds(params);
    let sup = &report.supremum;
    let eq = |bound: &Rational| {
        let pass = sup == bound;
        (
            format!(
                "max {sup} {} bound {bound} {}",
                if pass { "=" } else { "!=" },
                verdict(pass)
            ),
            pass,
        )
    };
    match program {
        "two-stage" => eq(&b.no_comm_tight),
        "dr" => {
            let (line, pass) = eq(&b.dr_bound);
            (line, pass && !report.supremum_attained)
        }
        "pebble" if params.c <= int(2) => eq(&b.pebble_upper),
        "pebble" => {
            let upper = &params.n / &params.c;
            let lower = &params.n / (&params.c + int(1));
            let pass = sup <= &upper && sup >= &lower;
            (
                format!("max {sup} ≤ {upper} (n/c), ≥ {lower} (n/(c+1)) {}", verdict(pass)),
                pass,
            )
        }
        _ => {
            let pass = sup >= &b.no_comm_tight;
            (
                format!("max {sup} ≥ bound {} (cn/(c^2-1)) {}", b.no_comm_tight, verdict(pass)),
                pass,
            )
        }
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<u8, Error> {
    let program = cfg.program()?;
    let options = SweepOptions {
        grid: cfg.grid,
        horizon: cfg.horizon.clone(),
        jobs: cfg.jobs,
        ..SweepOptions::default()
    };
    let report = analysis::worst_case_sweep(program.as_ref(), &cfg.params, &options)?;
    let gap = analysis::gap_adversary(program.as_ref(), &cfg.params, cfg.epsilon.as_ref())?;

    let (mut sink, mut stdout) = Report::new(cfg, out)?;
    writeln!(sink.csv, "d,time,regime,signature_hash").map_err(io_err)?;
    for s in report
        .samples
        .iter()
        .filter(|s| s.origin != analysis::SampleOrigin::Bisection)
    {
        writeln!(sink.csv, "{},{},{},{:016x}", s.d, s.time, s.regime, s.signature_hash).map_err(io_err)?;
    }
    let (d_max, t_max) = &report.attained_max;
    summary(
        &mut sink,
        &mut stdout,
        &format!("program {} n {} c {}", program.name(), cfg.params.n, cfg.params.c),
    )?;
    summary(&mut sink, &mut stdout, &format!("regimes {}", report.regimes.len()))?;
    summary(
        &mut sink,
        &mut stdout,
        &format!("attained max {t_max} ({}) at d = {d_max}", dec(t_max)),
    )?;
    let how = if report.supremum_attained {
        "attained at"
    } else {
        "approached as d ->"
    };
    summary(
        &mut sink,
        &mut stdout,
        &format!(
            "supremum {} ({}) {how} {}",
            report.supremum,
            dec(&report.supremum),
            report.supremum_at
        ),
    )?;
    summary(
        &mut sink,
        &mut stdout,
        &format!(
            "gap adversary d = {} time {} >= n/(c+1) - eps = {}",
            gap.d_star,
            gap.achieved().map_or_else(|| "-".into(), |t| t.to_string()),
            gap.window
        ),
    )?;
    let (line, pass) = sweep_verdict(&program.name(), &cfg.params, &report);
    summary(&mut sink, &mut stdout, &line)?;
    sink.csv.flush().map_err(io_err)?;
    Ok(if pass { EXIT_OK } else { EXIT_BOUND_FAILED })
}

pub fn cmd_coverage(cfg: &RunConfig, out: &mut dyn Write) -> Result<u8, Error> {
    let program = cfg.program()?;
    let horizon = match &cfg.horizon {
        Some(h) => h.clone(),
        None => analysis::default_offset_horizon(program.as_ref(), &cfg.params)?,
    };
    let trace = analysis::offset_trace(program.as_ref(), &cfg.params, &horizon)?;
    let coverage = analysis::coverage_time(&trace);
    let violations = analysis::check_rules(&trace);

    let (mut sink, mut stdout) = Report::new(cfg, out)?;
    writeln!(sink.csv, "t,black_measure").map_err(io_err)?;
    for (t, m) in &coverage.measure_curve {
        writeln!(sink.csv, "{t},{m}").map_err(io_err)?;
    }
    let rules = if violations.is_empty() {
        "rules OK".to_string()
    } else {
        format!("rules VIOLATED ({})", violations.len())
    };
    let line = match &coverage.coverage_time {
        Some(t) => format!("coverage {t} ({}), {rules}", dec(t)),
        None => format!("incomplete by horizon {horizon}, {rules}"),
    };
    summary(&mut sink, &mut stdout, &line)?;
    let k = analysis::bounds(&cfg.params).no_comm_tight;
    summary(
        &mut sink,
        &mut stdout,
        &format!("lower bound cn/(c^2-1) = {k} ({})", dec(&k)),
    )?;
    sink.csv.flush().map_err(io_err)?;
    Ok(EXIT_OK)
}

pub fn cmd_bounds(cfg: &RunConfig, out: &mut dyn Write) -> Result<u8, Error> {
    let b = analysis::bounds(&cfg.params);
    if cfg.format == Some(Format::Json) {
        serde_json::to_writer_pretty(&mut *out, &b).map_err(|e| Error::Output(e.to_string()))?;
        writeln!(out).map_err(io_err)?;
        return Ok(EXIT_OK);
    }
    for (name, v) in b.fields() {
        writeln!(out, "{name} {v} ({})", dec(v)).map_err(io_err)?;
    }
    Ok(EXIT_OK)
}
