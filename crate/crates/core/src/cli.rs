//! Command-line front end. `run` returns the process exit status:
//! 0 on success, 1 when violations or overlaps were found, 2 on usage or
//! input errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dot::{export_dot, last_states};
use crate::monitor::{check_spatial, Monitor, MonitorConfig, Semantics, Verdict};
use crate::sim::{simulate_into, SimConfig};
use crate::station::{build_catalog, measurements, SequenceUnit, StationCatalog, TopologyName};
use crate::wire::{graph_to_value, read_faults, read_script, read_trace, verdict_report, write_trace, TraceReader};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "capdispenser", version, about = "Cap dispenser station model, simulator and trace monitor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect the station catalog.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// Run a command script through the simulator and write the trace.
    Simulate {
        /// JSON-lines script of {time_ms, actuator, signal}; `-` for stdin.
        #[arg(long)]
        scenario: PathBuf,
        /// JSON array of fault objects.
        #[arg(long)]
        faults: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Caps initially in the stack.
        #[arg(long)]
        stack: Option<u32>,
        /// Uniform latency jitter in ms, drawn from the seed.
        #[arg(long, default_value_t = 0)]
        jitter_ms: i64,
        /// Trace output; `-` for stdout.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a trace against one topology or all of them.
    Monitor {
        /// JSON-lines trace; `-` for stdin.
        #[arg(long)]
        trace: PathBuf,
        /// Topology name or `all`.
        #[arg(long, default_value = "all")]
        topology: String,
        #[arg(long, default_value_t = 0)]
        tolerance_ms: i64,
        #[arg(long, value_enum, default_value_t = SemanticsArg::Event)]
        semantics: SemanticsArg,
        #[arg(long, value_enum, default_value_t = UnitArg::S)]
        sequence_unit: UnitArg,
        #[arg(long)]
        history_horizon_ms: Option<i64>,
        /// Verdict report (JSON array); `-` for stdout.
        #[arg(long, default_value = "-")]
        report: PathBuf,
    },
    /// Report overlapping device boxes.
    CheckSpatial,
}

#[derive(Debug, Subcommand)]
pub enum ModelAction {
    Dump {
        /// Print a single topology instead of the whole catalog.
        #[arg(long)]
        topology: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Colour DOT nodes by the last states in this trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SemanticsArg {
    Event,
    State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitArg {
    S,
    Ms,
}

/// Input or usage problem, reported on stderr with status 2.
#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

fn open_input(path: &Path) -> Result<Box<dyn BufRead>, Failure> {
    if path.as_os_str() == "-" {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        let f = File::open(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        Ok(Box::new(BufReader::new(f)))
    }
}

fn read_to_string(path: &Path) -> Result<String, Failure> {
    let mut s = String::new();
    open_input(path)?.read_to_string(&mut s)?;
    Ok(s)
}

fn open_output<'a>(path: &Path, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, Failure> {
    if path.as_os_str() == "-" {
        Ok(Box::new(stdout))
    } else {
        let f = File::create(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

fn topologies(arg: &str) -> Result<Vec<TopologyName>, Failure> {
    if arg.eq_ignore_ascii_case("all") {
        Ok(TopologyName::ALL.to_vec())
    } else {
        Ok(vec![arg.parse::<TopologyName>().map_err(Failure)?])
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(stdout, "{}", e.render())
            } else {
                write!(stderr, "{}", e.render())
            };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let catalog = build_catalog();
    match command {
        Command::Model {
            action: ModelAction::Dump { topology, format, trace },
        } => dump(&catalog, topology.as_deref(), format, trace.as_deref(), stdout),
        Command::Simulate {
            scenario,
            faults,
            seed,
            stack,
            jitter_ms,
            out,
        } => {
            let script = read_script(open_input(&scenario)?)?;
            let faults = match faults {
                Some(p) => read_faults(&read_to_string(&p)?)?,
                None => Vec::new(),
            };
            let mut config = SimConfig {
                seed,
                ..SimConfig::default()
            };
            config.latencies.jitter_ms = jitter_ms.max(0);
            if let Some(n) = stack {
                config.initial_stack = n;
            }
            let mut events = Vec::new();
            let state = simulate_into(&catalog, &config, &script, &faults, |e| events.push(e))?;
            let mut w = open_output(&out, stdout)?;
            write_trace(&mut w, &events)?;
            writeln!(
                stderr,
                "{} events, {} caps delivered, {} left in stack",
                events.len(),
                state.caps_delivered,
                state.stack_count
            )?;
            Ok(EXIT_OK)
        }
        Command::Monitor {
            trace,
            topology,
            tolerance_ms,
            semantics,
            sequence_unit,
            history_horizon_ms,
            report,
        } => {
            let cfg = MonitorConfig {
                correlation_tolerance_ms: tolerance_ms,
                sequence_unit: match sequence_unit {
                    UnitArg::S => SequenceUnit::Seconds,
                    UnitArg::Ms => SequenceUnit::Milliseconds,
                },
                semantics: match semantics {
                    SemanticsArg::Event => Semantics::EventOccurrence,
                    SemanticsArg::State => Semantics::StateHolds,
                },
                history_horizon_ms,
            };
            let mut monitor = Monitor::for_catalog(&catalog, &topologies(&topology)?, &cfg)?;
            let mut verdicts: Vec<Verdict> = Vec::new();
            let mut end = None;
            for e in TraceReader::new(open_input(&trace)?) {
                let e = e?;
                end = Some(e.timepoint);
                verdicts.extend(monitor.ingest(e)?);
            }
            let rules = monitor.rules().to_vec();
            verdicts.extend(monitor.finalize(end.unwrap_or_default()));
            crate::monitor::sort_verdicts(&mut verdicts, &rules);
            let mut w = open_output(&report, stdout)?;
            writeln!(w, "{}", verdict_report(&verdicts))?;
            w.flush()?;
            let violations = verdicts.iter().filter(|v| v.outcome.is_violation()).count();
            writeln!(stderr, "{} verdicts, {violations} violations", verdicts.len())?;
            Ok(if violations > 0 { EXIT_VIOLATIONS } else { EXIT_OK })
        }
        Command::CheckSpatial => {
            let report = check_spatial(&catalog);
            writeln!(stdout, "{}", serde_json::to_string_pretty(&report)?)?;
            let overlaps = report.overlaps().count();
            writeln!(stderr, "{} pairs checked, {overlaps} overlapping", report.pairs.len())?;
            Ok(if overlaps > 0 { EXIT_VIOLATIONS } else { EXIT_OK })
        }
    }
}

fn catalog_value(catalog: &StationCatalog) -> Result<Value, Failure> {
    let devices: Vec<Value> = catalog
        .devices
        .iter()
        .map(|(id, kind)| {
            json!({
                "id": id.as_str(),
                "kind": kind.as_str(),
                "description": catalog.description(id),
            })
        })
        .collect();
    let mut topologies = serde_json::Map::new();
    for name in TopologyName::ALL {
        topologies.insert(name.as_str().into(), graph_to_value(&catalog.topology(name).graph)?);
    }
    let table: serde_json::Map<String, Value> = measurements::table()
        .into_iter()
        .map(|(k, v)| (k.to_string(), Value::from(v)))
        .collect();
    Ok(json!({
        "devices": devices,
        "topologies": topologies,
        "measurements": table,
        "sequence_unit": catalog.sequence_unit,
    }))
}

fn dump(catalog: &StationCatalog, topology: Option<&str>, format: Format, trace: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let name = topology.map(|t| t.parse::<TopologyName>().map_err(Failure)).transpose()?;
    match format {
        Format::Json => {
            let v = match name {
                Some(n) => graph_to_value(&catalog.topology(n).graph)?,
                None => catalog_value(catalog)?,
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        }
        Format::Dot => {
            let name = name.ok_or_else(|| Failure("--format dot needs --topology".into()))?;
            let events = match trace {
                Some(p) => read_trace(open_input(p)?)?,
                None => Vec::new(),
            };
            write!(out, "{}", export_dot(&catalog.topology(name).graph, &last_states(&events)))?;
        }
    }
    Ok(EXIT_OK)
}
