//! Industrial-automation vocabulary on top of [`crate::model`]: device
//! taxonomy, signal levels and their meaning, device states, physical events
//! and topology categories.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Atom, AnnotatedGraph, ComponentId, ComponentValue, EdgeAnn, InvariantTerm, Relationship,
    StateChange, TimePoint,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IaError {
    #[error("DontCare cannot be mapped to a concrete state")]
    DontCareInput,
    #[error("event for `{0}` carries an abstract (DontCare) state")]
    AbstractStateInEvent(ComponentId),
    #[error("edge {0} -> {1} has no annotation")]
    MissingAnnotation(ComponentId, ComponentId),
    #[error("invalid signal mapping: {0}")]
    InvalidMapping(String),
    #[error("invalid spatial variation set: {0}")]
    InvalidVariations(String),
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DeviceKind {
    Part,
    Actuator,
    Sensor,
}

impl DeviceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DeviceKind::Part => "Part",
            DeviceKind::Actuator => "Actuator",
            DeviceKind::Sensor => "Sensor",
        }
    }
}

impl fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MaterialKind {
    /// Countable items such as bottle caps, optionally individually named.
    Discrete { identity: Option<String> },
    /// Divisible material measured by a non-negative quantity.
    Analog { unit: String, quantity: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub id: ComponentId,
    pub kind: MaterialKind,
}

impl Material {
    pub fn discrete(id: ComponentId, identity: Option<String>) -> Self {
        Material {
            id,
            kind: MaterialKind::Discrete { identity },
        }
    }

    pub fn analog(id: ComponentId, unit: impl Into<String>, quantity: f64) -> Result<Self, IaError> {
        if !(quantity >= 0.0) {
            return Err(IaError::InvalidMaterial(format!("quantity {quantity} is negative")));
        }
        Ok(Material {
            id,
            kind: MaterialKind::Analog {
                unit: unit.into(),
                quantity,
            },
        })
    }
}

/// Rejects batches in which two discrete items claim the same identity.
pub fn check_unique_identities(materials: &[Material]) -> Result<(), IaError> {
    let mut seen = BTreeSet::new();
    for m in materials {
        if let MaterialKind::Discrete {
            identity: Some(ident),
        } = &m.kind
        {
            if !seen.insert(ident) {
                return Err(IaError::InvalidMaterial(format!("identity `{ident}` reused")));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Signal {
    High,
    Low,
    DontCare,
}

impl Signal {
    pub fn is_concrete(self) -> bool {
        self != Signal::DontCare
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Signal::High => "High",
            Signal::Low => "Low",
            Signal::DontCare => "DontCare",
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const ACTIVE: &str = "Active";
pub const PASSIVE: &str = "Passive";
pub const OBSTRUCTED: &str = "Obstructed";
pub const UNOBSTRUCTED: &str = "Unobstructed";
pub const GRIPPED: &str = "Gripped";
pub const RELEASED: &str = "Released";

/// Every state name the station vocabulary knows.
pub const STATE_NAMES: [&str; 6] = [ACTIVE, PASSIVE, OBSTRUCTED, UNOBSTRUCTED, GRIPPED, RELEASED];

/// Named device state plus the electrical level that indicates it.
/// `DontCare` marks an abstract state used in specifications.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeviceState {
    pub name: String,
    pub signal: Signal,
}

impl DeviceState {
    pub fn new(name: impl Into<String>, signal: Signal) -> Self {
        DeviceState {
            name: name.into(),
            signal,
        }
    }

    pub fn abstract_state(name: impl Into<String>) -> Self {
        Self::new(name, Signal::DontCare)
    }

    pub fn active(signal: Signal) -> Self {
        Self::new(ACTIVE, signal)
    }

    pub fn passive(signal: Signal) -> Self {
        Self::new(PASSIVE, signal)
    }

    pub fn obstructed(signal: Signal) -> Self {
        Self::new(OBSTRUCTED, signal)
    }

    pub fn unobstructed(signal: Signal) -> Self {
        Self::new(UNOBSTRUCTED, signal)
    }

    pub fn is_abstract(&self) -> bool {
        self.signal == Signal::DontCare
    }

    /// Drops the electrical detail.
    pub fn to_abstract(&self) -> Self {
        Self::abstract_state(self.name.clone())
    }

    /// Specification matching: names must agree and the specified signal
    /// must either be `DontCare` or equal the actual one.
    pub fn matches(&self, actual: &DeviceState) -> bool {
        self.name == actual.name && (self.signal == Signal::DontCare || self.signal == actual.signal)
    }
}

impl fmt::Display for DeviceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.signal {
            Signal::DontCare => f.write_str(&self.name),
            s => write!(f, "{}{}", self.name, s),
        }
    }
}

/// Free-function form of [`DeviceState::matches`].
pub fn state_matches(spec: &DeviceState, actual: &DeviceState) -> bool {
    spec.matches(actual)
}

/// What each signal level means for one device. Total on `High`/`Low`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMapping")]
pub struct SignalMapping {
    high: DeviceState,
    low: DeviceState,
}

#[derive(Deserialize)]
struct RawMapping {
    high: DeviceState,
    low: DeviceState,
}

impl TryFrom<RawMapping> for SignalMapping {
    type Error = IaError;

    fn try_from(raw: RawMapping) -> Result<Self, Self::Error> {
        SignalMapping::new(raw.high, raw.low)
    }
}

impl SignalMapping {
    pub fn new(high: DeviceState, low: DeviceState) -> Result<Self, IaError> {
        if high.signal != Signal::High || low.signal != Signal::Low {
            return Err(IaError::InvalidMapping(format!(
                "states must carry the signal they are mapped from (got {high}, {low})"
            )));
        }
        if high.name == low.name {
            return Err(IaError::InvalidMapping(format!(
                "High and Low both mean `{}`",
                high.name
            )));
        }
        Ok(SignalMapping { high, low })
    }

    /// High activates, Low deactivates.
    pub fn high_solenoid() -> Self {
        Self::new(DeviceState::active(Signal::High), DeviceState::passive(Signal::Low))
            .expect("valid mapping")
    }

    pub fn low_solenoid() -> Self {
        Self::new(DeviceState::passive(Signal::High), DeviceState::active(Signal::Low))
            .expect("valid mapping")
    }

    /// High means obstructed.
    pub fn high_light_sensor() -> Self {
        Self::new(
            DeviceState::obstructed(Signal::High),
            DeviceState::unobstructed(Signal::Low),
        )
        .expect("valid mapping")
    }

    pub fn low_light_sensor() -> Self {
        Self::new(
            DeviceState::unobstructed(Signal::High),
            DeviceState::obstructed(Signal::Low),
        )
        .expect("valid mapping")
    }

    pub fn high_grip_sensor() -> Self {
        Self::new(
            DeviceState::new(GRIPPED, Signal::High),
            DeviceState::new(RELEASED, Signal::Low),
        )
        .expect("valid mapping")
    }

    pub fn apply(&self, signal: Signal) -> Result<&DeviceState, IaError> {
        match signal {
            Signal::High => Ok(&self.high),
            Signal::Low => Ok(&self.low),
            Signal::DontCare => Err(IaError::DontCareInput),
        }
    }

    /// Concrete state for a state name, if the mapping produces it.
    pub fn state_named(&self, name: &str) -> Option<&DeviceState> {
        [&self.high, &self.low].into_iter().find(|s| s.name == name)
    }

    pub fn states(&self) -> [&DeviceState; 2] {
        [&self.high, &self.low]
    }
}

pub fn map_signal(mapping: &SignalMapping, signal: Signal) -> Result<DeviceState, IaError> {
    mapping.apply(signal).cloned()
}

/// Named, mutually exclusive set of positions a movable part can be in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpatialVariationSet {
    name: String,
    positions: Vec<String>,
}

impl SpatialVariationSet {
    pub fn new(name: impl Into<String>, positions: Vec<String>) -> Result<Self, IaError> {
        if positions.len() < 2 {
            return Err(IaError::InvalidVariations("needs at least two positions".into()));
        }
        let distinct: BTreeSet<_> = positions.iter().collect();
        if distinct.len() != positions.len() {
            return Err(IaError::InvalidVariations("positions must be distinct".into()));
        }
        Ok(SpatialVariationSet {
            name: name.into(),
            positions,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn positions(&self) -> &[String] {
        &self.positions
    }

    pub fn to_value(&self) -> ComponentValue {
        ComponentValue::Variations(
            self.positions
                .iter()
                .map(|p| ComponentValue::Str(p.clone()))
                .collect(),
        )
    }

    pub fn to_term(&self) -> InvariantTerm {
        InvariantTerm::Xor(
            self.positions
                .iter()
                .map(|p| InvariantTerm::Atom(Atom::Position(p.clone())))
                .collect(),
        )
    }
}

/// A device changed to a concrete state at an instant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalEvent {
    pub device: ComponentId,
    pub kind: DeviceKind,
    pub timepoint: TimePoint,
    pub state: DeviceState,
}

impl PhysicalEvent {
    pub fn new(
        device: ComponentId,
        kind: DeviceKind,
        timepoint: TimePoint,
        state: DeviceState,
    ) -> Result<Self, IaError> {
        if state.is_abstract() {
            return Err(IaError::AbstractStateInEvent(device));
        }
        Ok(PhysicalEvent {
            device,
            kind,
            timepoint,
            state,
        })
    }

    pub fn to_state_change(&self) -> StateChange<DeviceState> {
        StateChange {
            owner: self.device.clone(),
            timepoint: self.timepoint,
            state: self.state.clone(),
        }
    }
}

impl fmt::Display for PhysicalEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} -> {}", self.timepoint, self.device, self.state)
    }
}

pub fn make_event(
    device: ComponentId,
    kind: DeviceKind,
    timepoint: TimePoint,
    state: DeviceState,
) -> Result<PhysicalEvent, IaError> {
    PhysicalEvent::new(device, kind, timepoint, state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelationshipKind {
    Spatial,
    Temporal,
    SpatioTemporal,
}

impl Relationship {
    pub fn kind(&self) -> RelationshipKind {
        match self {
            Relationship::Correlation(_) | Relationship::Constraint(_) | Relationship::Delay { .. } => {
                RelationshipKind::Temporal
            }
            Relationship::Spatial { .. } => RelationshipKind::Spatial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TopologyClass {
    Empty,
    Uniform(RelationshipKind),
    Mixed,
}

/// Reports whether every edge carries the same category of relationship.
pub fn classify_topology(graph: &AnnotatedGraph) -> Result<TopologyClass, IaError> {
    let mut kinds = BTreeSet::new();
    for EdgeAnn {
        source,
        target,
        annotation,
    } in graph.edges()
    {
        let ann = annotation
            .as_ref()
            .ok_or_else(|| IaError::MissingAnnotation(source.clone(), target.clone()))?;
        kinds.insert(ann.kind() as u8);
    }
    let class = match kinds.len() {
        0 => TopologyClass::Empty,
        1 => TopologyClass::Uniform(
            graph.edges()[0]
                .annotation
                .as_ref()
                .expect("checked above")
                .kind(),
        ),
        _ => TopologyClass::Mixed,
    };
    Ok(class)
}
