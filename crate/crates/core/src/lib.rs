//! Model, simulator and runtime monitor for a cap dispenser station: a cap
//! stack with an ejector and a swing-arm vacuum loader.
//!
//! * [`model`] is the generic algebra: invariants, maps, boxes, symbolic
//!   time and annotated graphs.
//! * [`ia`] adds devices, signals, signal mappings and physical events.
//! * [`station`] is the concrete catalog with its three topologies.
//! * [`sim`] turns actuator command scripts into event traces.
//! * [`monitor`] checks traces against topology rules, online or in batch.
//! * [`wire`], [`dot`] and [`cli`] handle JSON, Graphviz and the command line.
//!
//! ```
//! use capdispenser::{build_catalog, check_trace, nominal_script, simulate, MonitorConfig, SimConfig, TopologyName};
//!
//! let catalog = build_catalog();
//! let (_, trace) = simulate(&catalog, &SimConfig::default(), &nominal_script(1), &[]).unwrap();
//! let causality = catalog.topology(TopologyName::Causality);
//! let verdicts = check_trace(&catalog, &causality.graph, "causality", &trace, &MonitorConfig::default()).unwrap();
//! assert!(verdicts.iter().all(|v| !v.outcome.is_violation()));
//! ```

pub mod cli;
pub mod dot;
pub mod ia;
pub mod model;
pub mod monitor;
pub mod sim;
pub mod station;
pub mod wire;

pub use ia::{DeviceKind, DeviceState, PhysicalEvent, Signal, SignalMapping};
pub use model::{AnnotatedGraph, BeMap, Box3D, ComponentId, EdgeAnn, Relationship, TimePoint};
pub use monitor::{check_rules, check_spatial, check_trace, Monitor, MonitorConfig, Outcome, Rule, Semantics, Verdict};
pub use sim::{nominal_script, simulate, CommandScript, FaultSpec, SimConfig, Simulator};
pub use station::{build_catalog, StationCatalog, TopologyName};
