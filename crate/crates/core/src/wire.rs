//! JSON encodings: topology edges in the BeSpaceD tag style, JSON-lines
//! traces and scripts, fault lists and verdict reports.

use std::io::{BufRead, Write};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::ia::{DeviceKind, DeviceState, PhysicalEvent, Signal, STATE_NAMES};
use crate::model::{
    AnnotatedGraph, ComponentId, EdgeAnn, Relationship, SymbolicScalar, TemporalConstraint, TemporalCorrelation,
    TimeDuration, TimeDurationRange, TimePoint,
};
use crate::monitor::Verdict;
use crate::sim::{Command, CommandScript, FaultSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("malformed JSON{}: {message}", line_suffix(*line))]
    MalformedJson { line: Option<usize>, message: String },
    #[error("unknown type tag `{tag}` at {path}")]
    UnknownTypeTag { tag: String, path: String },
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("{0} annotations have no wire encoding")]
    UnsupportedAnnotation(&'static str),
    #[error("line {line}: timepoint {got} is earlier than the previous {last}")]
    OutOfOrderEvent { line: usize, last: TimePoint, got: TimePoint },
    #[error("i/o error: {0}")]
    Io(String),
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" on line {l}")).unwrap_or_default()
}

impl From<std::io::Error> for WireError {
    fn from(e: std::io::Error) -> Self {
        WireError::Io(e.to_string())
    }
}

type Result<T> = std::result::Result<T, WireError>;

fn schema(path: &str, message: impl Into<String>) -> WireError {
    WireError::SchemaViolation {
        path: path.to_string(),
        message: message.into(),
    }
}

fn parse(text: &str, line: Option<usize>) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| WireError::MalformedJson {
        line,
        message: e.to_string(),
    })
}

// Encoding.

fn tagged(tag: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("type".into(), Value::from(tag));
    m
}

/// Annotation states carry no signal unless one is pinned.
pub fn state_to_value(s: &DeviceState) -> Value {
    let mut m = tagged(&s.name);
    if s.signal.is_concrete() {
        m.insert("signal".into(), Value::from(s.signal.as_str()));
    }
    Value::Object(m)
}

fn component(id: &ComponentId) -> Value {
    json!({"type": "Component", "id": id.as_str()})
}

pub fn scalar_to_value(s: &SymbolicScalar) -> Value {
    match s {
        SymbolicScalar::Constant(c) => json!({"type": "SS Constant", "expression": c}),
        SymbolicScalar::Variable(v) => json!({"type": "SS Variable", "expression": {"type": v}}),
        SymbolicScalar::Addition(ops) => json!({
            "type": "SS Addition",
            "expression": ops.iter().map(scalar_to_value).collect::<Vec<_>>(),
        }),
    }
}

fn duration_to_value(d: &TimeDuration) -> Value {
    json!({"type": "TimeDuration", "start": scalar_to_value(&d.start), "scalar": scalar_to_value(&d.scalar)})
}

fn annotation_to_value(r: &Relationship) -> Result<Value> {
    Ok(match r {
        Relationship::Correlation(c) => json!({
            "type": "FestoStateCorrelation",
            "cause": state_to_value(&c.cause),
            "duration": duration_to_value(&c.duration),
            "effect": state_to_value(&c.effect),
        }),
        Relationship::Constraint(c) => {
            let mut m = tagged("FestoStateConstraint");
            m.insert("cause".into(), state_to_value(&c.cause));
            m.insert(
                "durationRange".into(),
                json!({
                    "type": "TimeDurationRange",
                    "minimum": duration_to_value(&c.range.minimum),
                    "maximum": duration_to_value(&c.range.maximum),
                }),
            );
            m.insert("effect".into(), state_to_value(&c.effect));
            if c.inverse {
                m.insert("inverse".into(), Value::Bool(true));
            }
            Value::Object(m)
        }
        other => return Err(WireError::UnsupportedAnnotation(other.name())),
    })
}

pub fn edge_to_value(e: &EdgeAnn) -> Result<Value> {
    Ok(match &e.annotation {
        Some(a) => json!({
            "type": "EdgeAnnotated",
            "source": component(&e.source),
            "target": component(&e.target),
            "annotation": annotation_to_value(a)?,
        }),
        None => json!({"type": "Edge", "source": component(&e.source), "target": component(&e.target)}),
    })
}

pub fn serialize_edge(e: &EdgeAnn) -> Result<String> {
    Ok(serde_json::to_string_pretty(&edge_to_value(e)?).expect("values always serialize"))
}

pub fn graph_to_value(g: &AnnotatedGraph) -> Result<Value> {
    g.edges().iter().map(edge_to_value).collect::<Result<Vec<_>>>().map(Value::Array)
}

// Decoding.

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| schema(&format!("{path}.{key}"), "missing field"))
}

fn tag<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    if !v.is_object() {
        return Err(schema(path, "expected an object"));
    }
    field(v, "type", path)?
        .as_str()
        .ok_or_else(|| schema(&format!("{path}.type"), "expected a string"))
}

fn unknown(tag: &str, path: &str) -> WireError {
    WireError::UnknownTypeTag {
        tag: tag.to_string(),
        path: path.to_string(),
    }
}

fn expect_tag(v: &Value, expected: &str, path: &str) -> Result<()> {
    match tag(v, path)? {
        t if t == expected => Ok(()),
        t => Err(unknown(t, path)),
    }
}

fn signal_from_value(v: &Value, path: &str) -> Result<Signal> {
    match v.as_str() {
        Some("High") => Ok(Signal::High),
        Some("Low") => Ok(Signal::Low),
        _ => Err(schema(path, "signal must be \"High\" or \"Low\"")),
    }
}

pub fn state_from_value(v: &Value, path: &str) -> Result<DeviceState> {
    let name = tag(v, path)?;
    if !STATE_NAMES.contains(&name) {
        return Err(unknown(name, path));
    }
    let signal = match v.get("signal") {
        Some(s) => signal_from_value(s, &format!("{path}.signal"))?,
        None => Signal::DontCare,
    };
    Ok(DeviceState::new(name, signal))
}

fn component_from_value(v: &Value, path: &str) -> Result<ComponentId> {
    expect_tag(v, "Component", path)?;
    let id = field(v, "id", path)?
        .as_str()
        .ok_or_else(|| schema(&format!("{path}.id"), "expected a string"))?;
    ComponentId::new(id).map_err(|e| schema(&format!("{path}.id"), e.to_string()))
}

pub fn scalar_from_value(v: &Value, path: &str) -> Result<SymbolicScalar> {
    let expr_path = format!("{path}.expression");
    let expr = |v: &Value| field(v, "expression", path).cloned();
    match tag(v, path)? {
        "SS Constant" => expr(v)?
            .as_i64()
            .map(SymbolicScalar::Constant)
            .ok_or_else(|| schema(&expr_path, "expected an integer")),
        "SS Variable" => {
            let e = expr(v)?;
            let name = tag(&e, &expr_path)?;
            if !STATE_NAMES.contains(&name) {
                return Err(unknown(name, &expr_path));
            }
            Ok(SymbolicScalar::Variable(name.to_string()))
        }
        "SS Addition" => {
            let e = expr(v)?;
            let items = e.as_array().ok_or_else(|| schema(&expr_path, "expected an array"))?;
            let ops = items
                .iter()
                .enumerate()
                .map(|(i, op)| scalar_from_value(op, &format!("{expr_path}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            SymbolicScalar::sum(ops).map_err(|err| schema(&expr_path, err.to_string()))
        }
        other => Err(unknown(other, path)),
    }
}

fn duration_from_value(v: &Value, path: &str) -> Result<TimeDuration> {
    expect_tag(v, "TimeDuration", path)?;
    Ok(TimeDuration {
        start: scalar_from_value(field(v, "start", path)?, &format!("{path}.start"))?,
        scalar: scalar_from_value(field(v, "scalar", path)?, &format!("{path}.scalar"))?,
    })
}

fn annotation_from_value(v: &Value, path: &str) -> Result<Relationship> {
    let cause = || state_from_value(field(v, "cause", path)?, &format!("{path}.cause"));
    let effect = || state_from_value(field(v, "effect", path)?, &format!("{path}.effect"));
    match tag(v, path)? {
        "FestoStateCorrelation" => Ok(Relationship::Correlation(TemporalCorrelation {
            cause: cause()?,
            duration: duration_from_value(field(v, "duration", path)?, &format!("{path}.duration"))?,
            effect: effect()?,
        })),
        "FestoStateConstraint" => {
            let rp = format!("{path}.durationRange");
            let range = field(v, "durationRange", path)?;
            expect_tag(range, "TimeDurationRange", &rp)?;
            let inverse = match v.get("inverse") {
                None => false,
                Some(b) => b.as_bool().ok_or_else(|| schema(&format!("{path}.inverse"), "expected a boolean"))?,
            };
            Ok(Relationship::Constraint(TemporalConstraint {
                cause: cause()?,
                range: TimeDurationRange {
                    minimum: duration_from_value(field(range, "minimum", &rp)?, &format!("{rp}.minimum"))?,
                    maximum: duration_from_value(field(range, "maximum", &rp)?, &format!("{rp}.maximum"))?,
                },
                effect: effect()?,
                inverse,
            }))
        }
        other => Err(unknown(other, path)),
    }
}

pub fn edge_from_value(v: &Value, path: &str) -> Result<EdgeAnn> {
    let source = || component_from_value(field(v, "source", path)?, &format!("{path}.source"));
    let target = || component_from_value(field(v, "target", path)?, &format!("{path}.target"));
    match tag(v, path)? {
        "EdgeAnnotated" => Ok(EdgeAnn::annotated(
            source()?,
            target()?,
            annotation_from_value(field(v, "annotation", path)?, &format!("{path}.annotation"))?,
        )),
        "Edge" => Ok(EdgeAnn::plain(source()?, target()?)),
        other => Err(unknown(other, path)),
    }
}

pub fn deserialize_edge(text: &str) -> Result<EdgeAnn> {
    edge_from_value(&parse(text, None)?, "$")
}

/// Accepts a JSON array of edges.
pub fn deserialize_graph(text: &str) -> Result<AnnotatedGraph> {
    let v = parse(text, None)?;
    let items = v.as_array().ok_or_else(|| schema("$", "expected an array of edges"))?;
    let edges = items
        .iter()
        .enumerate()
        .map(|(i, e)| edge_from_value(e, &format!("$[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    AnnotatedGraph::new(edges).map_err(|e| schema("$", e.to_string()))
}

// Events and traces.

fn event_tag(kind: DeviceKind) -> &'static str {
    match kind {
        DeviceKind::Sensor => "SensorEvent",
        DeviceKind::Actuator => "ActuatorEvent",
        DeviceKind::Part => "PartEvent",
    }
}

pub fn event_to_value(e: &PhysicalEvent) -> Value {
    json!({
        "type": event_tag(e.kind),
        "component": e.device.as_str(),
        "timepoint": e.timepoint.0,
        "state": state_to_value(&e.state),
    })
}

pub fn event_from_value(v: &Value, path: &str) -> Result<PhysicalEvent> {
    let kind = match tag(v, path)? {
        "SensorEvent" => DeviceKind::Sensor,
        "ActuatorEvent" => DeviceKind::Actuator,
        "PartEvent" => DeviceKind::Part,
        other => return Err(unknown(other, path)),
    };
    let device = field(v, "component", path)?
        .as_str()
        .and_then(|s| ComponentId::new(s).ok())
        .ok_or_else(|| schema(&format!("{path}.component"), "expected a non-empty string"))?;
    let t = field(v, "timepoint", path)?
        .as_i64()
        .ok_or_else(|| schema(&format!("{path}.timepoint"), "expected integer milliseconds"))?;
    let sp = format!("{path}.state");
    let state = state_from_value(field(v, "state", path)?, &sp)?;
    if !state.signal.is_concrete() {
        return Err(schema(&format!("{sp}.signal"), "events need a concrete signal"));
    }
    PhysicalEvent::new(device, kind, TimePoint(t), state).map_err(|e| schema(path, e.to_string()))
}

pub fn event_to_line(e: &PhysicalEvent) -> String {
    event_to_value(e).to_string()
}

/// Parses one trace line; `line` is 1-based and only used in errors.
pub fn event_from_line(text: &str, line: usize) -> Result<PhysicalEvent> {
    event_from_value(&parse(text, Some(line))?, &format!("line {line}"))
}

pub fn write_trace(mut w: impl Write, events: &[PhysicalEvent]) -> Result<()> {
    for e in events {
        writeln!(w, "{}", event_to_line(e))?;
    }
    w.flush()?;
    Ok(())
}

/// Lazily reads a JSON-lines trace, checking that time never goes back.
/// Blank lines are skipped.
pub struct TraceReader<R> {
    lines: std::io::Lines<R>,
    line: usize,
    last: Option<TimePoint>,
}

impl<R: BufRead> TraceReader<R> {
    pub fn new(reader: R) -> Self {
        TraceReader {
            lines: reader.lines(),
            line: 0,
            last: None,
        }
    }
}

impl<R: BufRead> Iterator for TraceReader<R> {
    type Item = Result<PhysicalEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => return Some(Err(e.into())),
            };
            self.line += 1;
            if text.trim().is_empty() {
                continue;
            }
            let event = match event_from_line(&text, self.line) {
                Ok(e) => e,
                Err(e) => return Some(Err(e)),
            };
            if let Some(last) = self.last {
                if event.timepoint < last {
                    return Some(Err(WireError::OutOfOrderEvent {
                        line: self.line,
                        last,
                        got: event.timepoint,
                    }));
                }
            }
            self.last = Some(event.timepoint);
            return Some(Ok(event));
        }
    }
}

pub fn read_trace(reader: impl BufRead) -> Result<Vec<PhysicalEvent>> {
    TraceReader::new(reader).collect()
}

// Scripts, faults, reports.

pub fn read_script(reader: impl BufRead) -> Result<CommandScript> {
    let mut commands = Vec::new();
    for (i, text) in reader.lines().enumerate() {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let c: Command = serde_json::from_str(&text).map_err(|e| WireError::MalformedJson {
            line: Some(i + 1),
            message: e.to_string(),
        })?;
        commands.push(c);
    }
    CommandScript::new(commands).map_err(|e| schema("script", e.to_string()))
}

pub fn write_script(mut w: impl Write, script: &CommandScript) -> Result<()> {
    for c in script.commands() {
        writeln!(w, "{}", serde_json::to_string(c).expect("commands serialize"))?;
    }
    w.flush()?;
    Ok(())
}

/// A JSON array of fault objects, each tagged by `"type"`.
pub fn read_faults(text: &str) -> Result<Vec<FaultSpec>> {
    serde_json::from_str(text).map_err(|e| WireError::MalformedJson {
        line: Some(e.line()),
        message: e.to_string(),
    })
}

pub fn verdict_to_value(v: &Verdict) -> Value {
    json!({
        "rule": {
            "topology": v.rule.topology,
            "edge": v.rule.edge,
            "source": v.rule.source.as_str(),
            "target": v.rule.target.as_str(),
        },
        "outcome": v.outcome,
        "cause_index": v.cause_index,
        "cause": event_to_value(&v.cause_event),
        "window": [v.window.0 .0, v.window.1 .0],
        "witness": v.witness.as_ref().map(event_to_value),
        "decided_at": v.decided_at.0,
    })
}

pub fn verdict_report(verdicts: &[Verdict]) -> String {
    let arr = Value::Array(verdicts.iter().map(verdict_to_value).collect());
    serde_json::to_string_pretty(&arr).expect("values always serialize")
}
