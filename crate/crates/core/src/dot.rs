//! Graphviz rendering of a topology coloured by the last known device states.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::ia::{DeviceState, PhysicalEvent, OBSTRUCTED, UNOBSTRUCTED};
use crate::model::{AnnotatedGraph, Binding, ComponentId, Relationship, TimeDuration};

pub const OBSTRUCTED_COLOR: &str = "red";
pub const UNOBSTRUCTED_COLOR: &str = "green";
pub const UNKNOWN_COLOR: &str = "gray";

pub fn node_color(state: Option<&DeviceState>) -> &'static str {
    match state.map(|s| s.name.as_str()) {
        Some(OBSTRUCTED) => OBSTRUCTED_COLOR,
        Some(UNOBSTRUCTED) => UNOBSTRUCTED_COLOR,
        _ => UNKNOWN_COLOR,
    }
}

fn offset(d: &TimeDuration, var: &str) -> String {
    let binding: Binding = [(var.to_string(), 0)].into();
    d.value(&binding).map_or_else(|_| "?".to_string(), |v| v.to_string())
}

/// Short rule text such as `Active →[200,300]→ Unobstructed`.
pub fn edge_label(r: &Relationship) -> String {
    match r {
        Relationship::Correlation(c) => {
            let d = offset(&c.duration, &c.cause.name);
            format!("{} →[{d}]→ {}", c.cause.name, c.effect.name)
        }
        Relationship::Constraint(c) => {
            let lo = offset(&c.range.minimum, &c.cause.name);
            let hi = offset(&c.range.maximum, &c.cause.name);
            let not = if c.inverse { "not " } else { "" };
            format!("{} →[{lo},{hi}]→ {not}{}", c.cause.name, c.effect.name)
        }
        Relationship::Delay { millis } => format!("delay {millis} ms"),
        Relationship::Spatial { relation } => format!("{relation:?}").to_lowercase(),
    }
}

/// Latest state per device after replaying `trace`.
pub fn last_states<'a>(trace: impl IntoIterator<Item = &'a PhysicalEvent>) -> BTreeMap<ComponentId, DeviceState> {
    trace.into_iter().map(|e| (e.device.clone(), e.state.clone())).collect()
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn quote(s: &str) -> String {
    format!("\"{}\"", escape(s))
}

/// Nodes come out in sorted order and edges in graph order, so equal inputs
/// give identical text.
pub fn export_dot(graph: &AnnotatedGraph, last_states: &BTreeMap<ComponentId, DeviceState>) -> String {
    let mut out = String::from("digraph topology {\n    rankdir=LR;\n    node [shape=box, style=filled, fontcolor=white];\n");
    for node in graph.nodes() {
        let state = last_states.get(&node);
        let label = match state {
            Some(s) => format!("{}\\n{}", escape(node.as_str()), escape(&s.name)),
            None => escape(node.as_str()),
        };
        writeln!(out, "    {} [label=\"{label}\", fillcolor={}];", quote(node.as_str()), node_color(state))
            .expect("writing to a String");
    }
    for e in graph.edges() {
        let attrs = e
            .annotation
            .as_ref()
            .map(|a| format!(" [label={}]", quote(&edge_label(a))))
            .unwrap_or_default();
        writeln!(out, "    {} -> {}{attrs};", quote(e.source.as_str()), quote(e.target.as_str())).expect("writing to a String");
    }
    out.push_str("}\n");
    out
}
