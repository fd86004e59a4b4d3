//! The Cap Dispenser station: device inventory, descriptions, measured
//! geometry and the three behavioural topologies.
//!
//! Facts not pinned down by the station documentation (most topology edges,
//! a few GPIO pins, the ejector body geometry) are marked as synthetic so
//! callers can tell them apart from documented fixtures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ia::{
    DeviceKind, DeviceState, SignalMapping, SpatialVariationSet, ACTIVE, GRIPPED, OBSTRUCTED,
    PASSIVE, RELEASED, UNOBSTRUCTED,
};
use crate::model::{
    AnnotatedGraph, BeMap, Box3D, ComponentId, ComponentValue, EdgeAnn, Relationship,
    TemporalConstraint, TemporalCorrelation, TimeDuration, TimeDurationRange,
};

/// Device names as used on the wire.
pub mod ids {
    // Actuators
    pub const STACK_EJECTOR_EXTEND: &str = "Stack Ejector Extend";
    pub const LOADER_PICKUP: &str = "Loader Pickup";
    pub const LOADER_DROPOFF: &str = "Loader Dropoff";
    pub const VACUUM_GRIP: &str = "Vacuum Grip";
    pub const EJECT_AIR_PULSE: &str = "Eject Air Pulse";
    // Sensors
    pub const STACK_EMPTY: &str = "Stack Empty";
    pub const STACK_EJECTOR_EXTENDED: &str = "Stack Ejector Extended";
    pub const STACK_EJECTOR_RETRACTED: &str = "Stack Ejector Retracted";
    pub const LOADER_PICKED_UP: &str = "Loader Picked Up";
    pub const LOADER_DROPPED_OFF: &str = "Loader Dropped Off";
    pub const WORKPIECE_GRIPPED: &str = "Workpiece Gripped";
    // Parts
    pub const STACK_EJECTOR: &str = "Stack Ejector";
    pub const CAP_STACK_TUBE: &str = "Cap Stack Tube";
    pub const LOADER: &str = "Loader";
    pub const VACUUM_GRIPPER: &str = "Vacuum Gripper";

    pub const ACTUATORS: [&str; 5] = [
        STACK_EJECTOR_EXTEND,
        LOADER_PICKUP,
        LOADER_DROPOFF,
        VACUUM_GRIP,
        EJECT_AIR_PULSE,
    ];
    pub const SENSORS: [&str; 6] = [
        STACK_EMPTY,
        STACK_EJECTOR_EXTENDED,
        STACK_EJECTOR_RETRACTED,
        LOADER_PICKED_UP,
        LOADER_DROPPED_OFF,
        WORKPIECE_GRIPPED,
    ];
    pub const PARTS: [&str; 4] = [STACK_EJECTOR, CAP_STACK_TUBE, LOADER, VACUUM_GRIPPER];
}

/// Description keys.
pub mod keys {
    pub const DEVICE_CATEGORY: &str = "DeviceCategory";
    pub const DEVICE_TYPE: &str = "DeviceType";
    pub const GPIO: &str = "GPIO";
    pub const SIGNAL_MAPPING: &str = "SignalMapping";
    pub const PART_ASSOCIATION: &str = "PartAssociation";
    pub const SPATIAL_LOCATION: &str = "SpatialLocation";
    pub const SPATIAL_VARIATIONS: &str = "SpatialVariations";
}

/// Station measurements in millimetres. Derived values are written in terms
/// of the reference points they are measured from.
pub mod measurements {
    pub mod x {
        use super::width;
        pub const STATION1_EDGE_LEFT: i64 = 0;
        pub const STACK_EJECTOR_RIGHT: i64 = STATION1_EDGE_LEFT + 85;
        pub const STACK_EJECTOR_LEFT: i64 = STACK_EJECTOR_RIGHT - width::STACK_EJECTOR;
        pub const EXTEND_RETRACT_SENSOR_RIGHT: i64 = STACK_EJECTOR_RIGHT;
        pub const EXTEND_RETRACT_SENSOR_LEFT: i64 =
            EXTEND_RETRACT_SENSOR_RIGHT - width::EXTEND_RETRACT_SENSOR;
    }
    pub mod y {
        use super::depth;
        pub const STATION1_EDGE_FRONT: i64 = 0;
        pub const STACK_EJECTOR_FRONT: i64 = STATION1_EDGE_FRONT + 76;
        pub const EXTEND_SENSOR_FRONT: i64 = STACK_EJECTOR_FRONT + 122;
        pub const EXTEND_SENSOR_BACK: i64 = EXTEND_SENSOR_FRONT + depth::EXTEND_RETRACT_SENSOR;
        pub const RETRACT_SENSOR_FRONT: i64 = STACK_EJECTOR_FRONT + 236;
        pub const RETRACT_SENSOR_BACK: i64 = RETRACT_SENSOR_FRONT + depth::EXTEND_RETRACT_SENSOR;
    }
    pub mod z {
        pub const BASE: i64 = 0;
        pub const STACK_EJECTOR_BOTTOM: i64 = BASE;
        pub const EXTEND_RETRACT_SENSOR_BOTTOM: i64 = BASE + 4;
        pub const EXTEND_RETRACT_SENSOR_TOP: i64 = BASE + 20;
    }
    pub mod width {
        pub const EXTEND_RETRACT_SENSOR: i64 = 32;
        /// Placeholder, not measured.
        pub const STACK_EJECTOR: i64 = 85;
    }
    pub mod depth {
        pub const EXTEND_RETRACT_SENSOR: i64 = 10;
        /// Placeholder, not measured.
        pub const STACK_EJECTOR: i64 = 250;
    }
    pub mod height {
        use super::z;
        pub const EXTEND_RETRACT_SENSOR: i64 =
            z::EXTEND_RETRACT_SENSOR_TOP - z::EXTEND_RETRACT_SENSOR_BOTTOM;
        /// Placeholder, not measured.
        pub const STACK_EJECTOR: i64 = 30;
    }

    /// Every constant with its group-qualified name, for dumping.
    pub fn table() -> Vec<(&'static str, i64)> {
        vec![
            ("X.Station1EdgeLeft", x::STATION1_EDGE_LEFT),
            ("X.StackEjectorRight", x::STACK_EJECTOR_RIGHT),
            ("X.StackEjectorLeft", x::STACK_EJECTOR_LEFT),
            ("X.ExtendRetractSensorRight", x::EXTEND_RETRACT_SENSOR_RIGHT),
            ("X.ExtendRetractSensorLeft", x::EXTEND_RETRACT_SENSOR_LEFT),
            ("Y.Station1EdgeFront", y::STATION1_EDGE_FRONT),
            ("Y.StackEjectorFront", y::STACK_EJECTOR_FRONT),
            ("Y.ExtendSensorFront", y::EXTEND_SENSOR_FRONT),
            ("Y.ExtendSensorBack", y::EXTEND_SENSOR_BACK),
            ("Y.RetractSensorFront", y::RETRACT_SENSOR_FRONT),
            ("Y.RetractSensorBack", y::RETRACT_SENSOR_BACK),
            ("Z.Base", z::BASE),
            ("Z.StackEjectorBottom", z::STACK_EJECTOR_BOTTOM),
            ("Z.ExtendRetractSensorBottom", z::EXTEND_RETRACT_SENSOR_BOTTOM),
            ("Z.ExtendRetractSensorTop", z::EXTEND_RETRACT_SENSOR_TOP),
            ("Width.ExtendRetractSensor", width::EXTEND_RETRACT_SENSOR),
            ("Width.StackEjector", width::STACK_EJECTOR),
            ("Depth.ExtendRetractSensor", depth::EXTEND_RETRACT_SENSOR),
            ("Depth.StackEjector", depth::STACK_EJECTOR),
            ("Height.ExtendRetractSensor", height::EXTEND_RETRACT_SENSOR),
            ("Height.StackEjector", height::STACK_EJECTOR),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TopologyName {
    ProcessSequence,
    Causality,
    Avoidance,
}

impl TopologyName {
    pub const ALL: [TopologyName; 3] = [
        TopologyName::ProcessSequence,
        TopologyName::Causality,
        TopologyName::Avoidance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TopologyName::ProcessSequence => "process-sequence",
            TopologyName::Causality => "causality",
            TopologyName::Avoidance => "avoidance",
        }
    }
}

impl fmt::Display for TopologyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TopologyName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "process-sequence" | "processsequence" | "sequence" => Ok(TopologyName::ProcessSequence),
            "causality" => Ok(TopologyName::Causality),
            "avoidance" => Ok(TopologyName::Avoidance),
            other => Err(format!("unknown topology `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Documented,
    Synthetic,
}

/// A topology graph plus the provenance of each edge, index-aligned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub graph: AnnotatedGraph,
    pub provenance: Vec<Provenance>,
}

impl Topology {
    fn build(edges: Vec<(EdgeAnn, Provenance)>) -> Self {
        let (edges, provenance): (Vec<_>, Vec<_>) = edges.into_iter().unzip();
        Topology {
            graph: AnnotatedGraph::new(edges).expect("station topologies have no duplicate edges"),
            provenance,
        }
    }

    pub fn documented_edges(&self) -> impl Iterator<Item = &EdgeAnn> {
        self.graph
            .edges()
            .iter()
            .zip(&self.provenance)
            .filter(|(_, p)| **p == Provenance::Documented)
            .map(|(e, _)| e)
    }
}

/// Unit of the exact delays in the process-sequence topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceUnit {
    #[default]
    Seconds,
    Milliseconds,
}

impl SequenceUnit {
    pub fn millis_per_unit(self) -> i64 {
        match self {
            SequenceUnit::Seconds => 1000,
            SequenceUnit::Milliseconds => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationCatalog {
    pub devices: BTreeMap<ComponentId, DeviceKind>,
    pub descriptions: BTreeMap<ComponentId, BeMap>,
    pub topologies: BTreeMap<TopologyName, Topology>,
    /// Unit attached to the raw process-sequence constants.
    pub sequence_unit: SequenceUnit,
    /// Devices whose GPIO pin number is not documented.
    pub synthetic_gpio: BTreeSet<ComponentId>,
    /// Devices whose geometry is a placeholder.
    pub synthetic_geometry: BTreeSet<ComponentId>,
}

pub(crate) fn cid(s: &str) -> ComponentId {
    ComponentId::new(s).expect("station ids are non-empty")
}

fn category(kind: DeviceKind) -> (ComponentId, ComponentValue) {
    (cid(keys::DEVICE_CATEGORY), ComponentValue::str(kind.as_str()))
}

fn device_type(t: &str) -> (ComponentId, ComponentValue) {
    (cid(keys::DEVICE_TYPE), ComponentValue::str(t))
}

fn gpio(pin: i64) -> (ComponentId, ComponentValue) {
    (cid(keys::GPIO), ComponentValue::Int(pin))
}

fn mapping(m: SignalMapping) -> (ComponentId, ComponentValue) {
    (cid(keys::SIGNAL_MAPPING), ComponentValue::SignalMap(m))
}

fn part_of(part: &str) -> (ComponentId, ComponentValue) {
    (cid(keys::PART_ASSOCIATION), ComponentValue::str(part))
}

fn located(b: Box3D) -> (ComponentId, ComponentValue) {
    (cid(keys::SPATIAL_LOCATION), ComponentValue::Box(b))
}

fn variations(name: &str, positions: &[&str]) -> (ComponentId, ComponentValue) {
    let set = SpatialVariationSet::new(name, positions.iter().map(|p| p.to_string()).collect())
        .expect("static variation sets are valid");
    (cid(keys::SPATIAL_VARIATIONS), set.to_value())
}

pub fn extend_sensor_box() -> Box3D {
    use measurements::*;
    Box3D::from_anchor(
        x::EXTEND_RETRACT_SENSOR_LEFT,
        y::EXTEND_SENSOR_FRONT,
        z::EXTEND_RETRACT_SENSOR_BOTTOM,
        width::EXTEND_RETRACT_SENSOR,
        depth::EXTEND_RETRACT_SENSOR,
        height::EXTEND_RETRACT_SENSOR,
    )
    .expect("non-negative extents")
}

pub fn retract_sensor_box() -> Box3D {
    use measurements::*;
    Box3D::from_anchor(
        x::EXTEND_RETRACT_SENSOR_LEFT,
        y::RETRACT_SENSOR_FRONT,
        z::EXTEND_RETRACT_SENSOR_BOTTOM,
        width::EXTEND_RETRACT_SENSOR,
        depth::EXTEND_RETRACT_SENSOR,
        height::EXTEND_RETRACT_SENSOR,
    )
    .expect("non-negative extents")
}

pub fn stack_ejector_box() -> Box3D {
    use measurements::*;
    Box3D::from_anchor(
        x::STACK_EJECTOR_LEFT,
        y::STACK_EJECTOR_FRONT,
        z::STACK_EJECTOR_BOTTOM,
        width::STACK_EJECTOR,
        depth::STACK_EJECTOR,
        height::STACK_EJECTOR,
    )
    .expect("non-negative extents")
}

pub const EJECTOR_POSITIONS: [&str; 2] = ["Stack Ejector Retracted Position", "Stack Ejector Extended Position"];
pub const LOADER_POSITIONS: [&str; 2] = ["Loader Pickup Position", "Loader Dropoff Position"];

fn constraint(cause: &str, min: i64, max: i64, effect: &str) -> Relationship {
    Relationship::Constraint(TemporalConstraint {
        cause: DeviceState::abstract_state(cause),
        range: TimeDurationRange::offsets_from(cause, min, max),
        effect: DeviceState::abstract_state(effect),
        inverse: false,
    })
}

fn correlation(cause: &str, delta: i64, effect: &str) -> Relationship {
    Relationship::Correlation(TemporalCorrelation {
        cause: DeviceState::abstract_state(cause),
        duration: TimeDuration::offset_from(cause, delta),
        effect: DeviceState::abstract_state(effect),
    })
}

fn edge(source: &str, target: &str, rel: Relationship) -> EdgeAnn {
    EdgeAnn::annotated(cid(source), cid(target), rel)
}

/// Sensor-only exact-delay expectations. Delays are in [`SequenceUnit`]s.
pub fn build_process_sequence() -> Topology {
    use ids::*;
    Topology::build(vec![
        (
            edge(LOADER_PICKED_UP, LOADER_DROPPED_OFF, correlation(OBSTRUCTED, 3, OBSTRUCTED)),
            Provenance::Documented,
        ),
        (
            edge(STACK_EJECTOR_RETRACTED, STACK_EJECTOR_EXTENDED, correlation(UNOBSTRUCTED, 0, OBSTRUCTED)),
            Provenance::Synthetic,
        ),
        (
            edge(STACK_EJECTOR_EXTENDED, STACK_EJECTOR_RETRACTED, correlation(UNOBSTRUCTED, 0, OBSTRUCTED)),
            Provenance::Synthetic,
        ),
    ])
}

/// Actuator-to-sensor response windows, in milliseconds.
pub fn build_causality() -> Topology {
    use ids::*;
    Topology::build(vec![
        (
            edge(STACK_EJECTOR_EXTEND, STACK_EJECTOR_RETRACTED, constraint(ACTIVE, 200, 300, UNOBSTRUCTED)),
            Provenance::Documented,
        ),
        (
            edge(STACK_EJECTOR_EXTEND, STACK_EJECTOR_EXTENDED, constraint(PASSIVE, 200, 300, UNOBSTRUCTED)),
            Provenance::Synthetic,
        ),
        (
            edge(LOADER_PICKUP, LOADER_PICKED_UP, constraint(ACTIVE, 700, 900, OBSTRUCTED)),
            Provenance::Synthetic,
        ),
        (
            edge(LOADER_DROPOFF, LOADER_DROPPED_OFF, constraint(ACTIVE, 700, 900, OBSTRUCTED)),
            Provenance::Synthetic,
        ),
        (
            edge(VACUUM_GRIP, WORKPIECE_GRIPPED, constraint(ACTIVE, 100, 200, GRIPPED)),
            Provenance::Synthetic,
        ),
        (
            edge(EJECT_AIR_PULSE, WORKPIECE_GRIPPED, constraint(ACTIVE, 0, 100, RELEASED)),
            Provenance::Synthetic,
        ),
    ])
}

/// Actuator-to-actuator coordination windows, in milliseconds.
pub fn build_avoidance() -> Topology {
    use ids::*;
    Topology::build(vec![
        (
            edge(STACK_EJECTOR_EXTEND, LOADER_PICKUP, constraint(ACTIVE, -500, 1000, PASSIVE)),
            Provenance::Documented,
        ),
        (
            edge(EJECT_AIR_PULSE, VACUUM_GRIP, constraint(ACTIVE, -500, 500, PASSIVE)),
            Provenance::Synthetic,
        ),
    ])
}

/// GPIO pins. The documented numbers are 0, 1, 3, 5, 7, 25 and 26.
const GPIO_PINS: [(&str, i64, bool); 11] = [
    (ids::STACK_EJECTOR_EXTEND, 1, false),
    (ids::LOADER_PICKUP, 26, false),
    (ids::LOADER_DROPOFF, 6, true),
    (ids::VACUUM_GRIP, 5, false),
    (ids::EJECT_AIR_PULSE, 13, true),
    (ids::STACK_EMPTY, 7, false),
    (ids::STACK_EJECTOR_EXTENDED, 0, false),
    (ids::STACK_EJECTOR_RETRACTED, 3, false),
    (ids::LOADER_PICKED_UP, 25, false),
    (ids::LOADER_DROPPED_OFF, 16, true),
    (ids::WORKPIECE_GRIPPED, 20, true),
];

fn pin(device: &str) -> i64 {
    GPIO_PINS
        .iter()
        .find(|(d, _, _)| *d == device)
        .map(|(_, p, _)| *p)
        .expect("every actuator and sensor has a pin")
}

pub fn build_catalog() -> StationCatalog {
    use ids::*;
    let mut devices = BTreeMap::new();
    let mut descriptions = BTreeMap::new();
    let mut add = |id: &str, kind: DeviceKind, entries: Vec<(ComponentId, ComponentValue)>| {
        devices.insert(cid(id), kind);
        let mut all = vec![category(kind)];
        all.extend(entries);
        descriptions.insert(cid(id), BeMap::new(all).expect("static descriptions have unique keys"));
    };

    add(STACK_EJECTOR, DeviceKind::Part, vec![
        device_type("Horizontal Pusher"),
        variations("Stack Ejector Positions", &EJECTOR_POSITIONS),
        located(stack_ejector_box()),
    ]);
    add(CAP_STACK_TUBE, DeviceKind::Part, vec![device_type("Tube")]);
    add(LOADER, DeviceKind::Part, vec![
        device_type("Lever Arm"),
        variations("Loader Positions", &LOADER_POSITIONS),
    ]);
    add(VACUUM_GRIPPER, DeviceKind::Part, vec![device_type("Suction Cup")]);

    let solenoid = |part: &str, dev: &str| {
        vec![
            device_type("Solenoid"),
            gpio(pin(dev)),
            mapping(SignalMapping::high_solenoid()),
            part_of(part),
        ]
    };
    add(STACK_EJECTOR_EXTEND, DeviceKind::Actuator, solenoid(STACK_EJECTOR, STACK_EJECTOR_EXTEND));
    add(LOADER_PICKUP, DeviceKind::Actuator, solenoid(LOADER, LOADER_PICKUP));
    add(LOADER_DROPOFF, DeviceKind::Actuator, solenoid(LOADER, LOADER_DROPOFF));
    add(VACUUM_GRIP, DeviceKind::Actuator, solenoid(LOADER, VACUUM_GRIP));
    add(EJECT_AIR_PULSE, DeviceKind::Actuator, solenoid(VACUUM_GRIPPER, EJECT_AIR_PULSE));

    add(STACK_EMPTY, DeviceKind::Sensor, vec![
        device_type("Light Sensor"),
        gpio(pin(STACK_EMPTY)),
        mapping(SignalMapping::high_light_sensor()),
        part_of(CAP_STACK_TUBE),
    ]);
    add(STACK_EJECTOR_EXTENDED, DeviceKind::Sensor, vec![
        device_type("Light Sensor"),
        gpio(pin(STACK_EJECTOR_EXTENDED)),
        mapping(SignalMapping::high_light_sensor()),
        part_of(STACK_EJECTOR),
        located(extend_sensor_box()),
    ]);
    add(STACK_EJECTOR_RETRACTED, DeviceKind::Sensor, vec![
        device_type("Light Sensor"),
        gpio(pin(STACK_EJECTOR_RETRACTED)),
        mapping(SignalMapping::high_light_sensor()),
        part_of(STACK_EJECTOR),
        located(retract_sensor_box()),
    ]);
    add(LOADER_PICKED_UP, DeviceKind::Sensor, vec![
        device_type("Contact Sensor"),
        gpio(pin(LOADER_PICKED_UP)),
        mapping(SignalMapping::high_light_sensor()),
        part_of(LOADER),
    ]);
    // Active-low, like several of the station's real sensors.
    add(LOADER_DROPPED_OFF, DeviceKind::Sensor, vec![
        device_type("Contact Sensor"),
        gpio(pin(LOADER_DROPPED_OFF)),
        mapping(SignalMapping::low_light_sensor()),
        part_of(LOADER),
    ]);
    add(WORKPIECE_GRIPPED, DeviceKind::Sensor, vec![
        device_type("Vacuum Sensor"),
        gpio(pin(WORKPIECE_GRIPPED)),
        mapping(SignalMapping::high_grip_sensor()),
        part_of(VACUUM_GRIPPER),
    ]);

    let topologies = [
        (TopologyName::ProcessSequence, build_process_sequence()),
        (TopologyName::Causality, build_causality()),
        (TopologyName::Avoidance, build_avoidance()),
    ]
    .into();

    StationCatalog {
        devices,
        descriptions,
        topologies,
        sequence_unit: SequenceUnit::Seconds,
        synthetic_gpio: GPIO_PINS.iter().filter(|(_, _, s)| *s).map(|(d, _, _)| cid(d)).collect(),
        synthetic_geometry: [cid(STACK_EJECTOR)].into(),
    }
}

impl StationCatalog {
    pub fn kind_of(&self, device: &ComponentId) -> Option<DeviceKind> {
        self.devices.get(device).copied()
    }

    pub fn devices_of(&self, kind: DeviceKind) -> impl Iterator<Item = &ComponentId> {
        self.devices.iter().filter(move |(_, k)| **k == kind).map(|(id, _)| id)
    }

    pub fn description(&self, device: &ComponentId) -> Option<&BeMap> {
        self.descriptions.get(device)
    }

    pub fn signal_mapping(&self, device: &ComponentId) -> Option<&SignalMapping> {
        self.descriptions
            .get(device)?
            .get_str(keys::SIGNAL_MAPPING)?
            .as_signal_map()
    }

    pub fn part_association(&self, device: &ComponentId) -> Option<&str> {
        self.descriptions
            .get(device)?
            .get_str(keys::PART_ASSOCIATION)?
            .as_str()
    }

    pub fn gpio(&self, device: &ComponentId) -> Option<i64> {
        self.descriptions.get(device)?.get_str(keys::GPIO)?.as_int()
    }

    pub fn topology(&self, name: TopologyName) -> &Topology {
        &self.topologies[&name]
    }

    /// Boxes of every device that declares a spatial location.
    pub fn located_devices(&self) -> BTreeMap<ComponentId, Box3D> {
        self.descriptions
            .iter()
            .filter_map(|(id, d)| Some((id.clone(), *d.get_str(keys::SPATIAL_LOCATION)?.as_box()?)))
            .collect()
    }

    /// Adds or replaces a device's spatial location.
    pub fn set_location(&mut self, device: &ComponentId, kind: DeviceKind, b: Box3D) {
        self.devices.entry(device.clone()).or_insert(kind);
        let mut entries: Vec<_> = self
            .descriptions
            .get(device)
            .map(|d| d.entries().to_vec())
            .unwrap_or_else(|| vec![category(kind)]);
        entries.retain(|(k, _)| k.as_str() != keys::SPATIAL_LOCATION);
        entries.push(located(b));
        self.descriptions
            .insert(device.clone(), BeMap::new(entries).expect("keys stay unique"));
    }
}

/// Occupancy boxes of the sensors that declare a spatial location.
pub fn sensor_boxes(catalog: &StationCatalog) -> BTreeMap<ComponentId, Box3D> {
    catalog
        .located_devices()
        .into_iter()
        .filter(|(id, _)| catalog.kind_of(id) == Some(DeviceKind::Sensor))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ia::Signal;

    #[test]
    fn measurement_constants() {
        use measurements::*;
        assert_eq!(x::STACK_EJECTOR_RIGHT, 85);
        assert_eq!(x::EXTEND_RETRACT_SENSOR_LEFT, 53);
        assert_eq!(y::EXTEND_SENSOR_FRONT, 198);
        assert_eq!(y::RETRACT_SENSOR_FRONT, 312);
        assert_eq!(height::EXTEND_RETRACT_SENSOR, 16);
    }

    #[test]
    fn sensor_description_fields() {
        let c = build_catalog();
        let d = c.description(&cid(ids::STACK_EJECTOR_EXTENDED)).unwrap();
        assert_eq!(d.get_str(keys::DEVICE_TYPE), Some(&ComponentValue::str("Light Sensor")));
        assert_eq!(d.get_str(keys::GPIO), Some(&ComponentValue::Int(0)));
        assert_eq!(d.get_str(keys::PART_ASSOCIATION), Some(&ComponentValue::str(ids::STACK_EJECTOR)));
    }

    #[test]
    fn vacuum_grip_description() {
        let c = build_catalog();
        let vg = cid(ids::VACUUM_GRIP);
        assert_eq!(c.signal_mapping(&vg), Some(&SignalMapping::high_solenoid()));
        assert_eq!(c.part_association(&vg), Some(ids::LOADER));
        assert!(!c.description(&vg).unwrap().contains_key(keys::SPATIAL_LOCATION));
        assert!(!sensor_boxes(&c).contains_key(&vg));
    }

    #[test]
    fn ejector_variations_are_exclusive() {
        let c = build_catalog();
        let v = c
            .description(&cid(ids::STACK_EJECTOR))
            .unwrap()
            .get_str(keys::SPATIAL_VARIATIONS)
            .unwrap();
        assert_eq!(
            v,
            &ComponentValue::Variations(EJECTOR_POSITIONS.iter().map(|p| ComponentValue::str(*p)).collect())
        );
    }

    #[test]
    fn sensor_boxes_match_measurements() {
        let c = build_catalog();
        let boxes = sensor_boxes(&c);
        assert_eq!(boxes.len(), 2);
        assert_eq!(boxes[&cid(ids::STACK_EJECTOR_EXTENDED)], Box3D::new(53, 198, 4, 85, 208, 20));
        assert_eq!(boxes[&cid(ids::STACK_EJECTOR_RETRACTED)], Box3D::new(53, 312, 4, 85, 322, 20));
    }

    #[test]
    fn catalog_inventory() {
        let c = build_catalog();
        let names = |k| c.devices_of(k).map(|d| d.as_str().to_string()).collect::<BTreeSet<_>>();
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(names(DeviceKind::Actuator), set(&ids::ACTUATORS));
        assert_eq!(names(DeviceKind::Sensor), set(&ids::SENSORS));
        assert_eq!(names(DeviceKind::Part), set(&ids::PARTS));
    }

    #[test]
    fn description_keys_per_kind() {
        let c = build_catalog();
        for (id, d) in &c.descriptions {
            assert!(d.contains_key(keys::DEVICE_CATEGORY) && d.contains_key(keys::DEVICE_TYPE), "{id}");
            if c.kind_of(id) != Some(DeviceKind::Part) {
                for k in [keys::GPIO, keys::SIGNAL_MAPPING, keys::PART_ASSOCIATION] {
                    assert!(d.contains_key(k), "{id} lacks {k}");
                }
            }
        }
    }

    #[test]
    fn gpio_pins_unique_and_parts_exist() {
        let c = build_catalog();
        let pins: Vec<_> = c.devices.keys().filter_map(|d| c.gpio(d)).collect();
        let unique: BTreeSet<_> = pins.iter().collect();
        assert_eq!(pins.len(), unique.len());
        assert_eq!(pins.len(), 11);
        for d in c.devices.keys() {
            if let Some(p) = c.part_association(d) {
                assert_eq!(c.kind_of(&cid(p)), Some(DeviceKind::Part), "{d} -> {p}");
            }
        }
    }

    #[test]
    fn mappings_have_distinct_meanings() {
        let c = build_catalog();
        for d in c.devices.keys() {
            if let Some(m) = c.signal_mapping(d) {
                assert_ne!(m.apply(Signal::High).unwrap().name, m.apply(Signal::Low).unwrap().name);
            }
        }
    }

    #[test]
    fn topology_node_kinds() {
        let c = build_catalog();
        let kind = |n: &ComponentId| c.kind_of(n).unwrap();
        let seq = c.topology(TopologyName::ProcessSequence);
        assert!(seq.graph.nodes().iter().all(|n| kind(n) == DeviceKind::Sensor));
        let avoid = c.topology(TopologyName::Avoidance);
        assert!(avoid.graph.nodes().iter().all(|n| kind(n) == DeviceKind::Actuator));
        let cause = c.topology(TopologyName::Causality);
        for e in cause.graph.edges() {
            assert_eq!(kind(&e.source), DeviceKind::Actuator);
            assert_eq!(kind(&e.target), DeviceKind::Sensor);
        }
    }

    #[test]
    fn documented_edges() {
        let seq = build_process_sequence();
        let e = seq.documented_edges().next().unwrap();
        assert_eq!((e.source.as_str(), e.target.as_str()), (ids::LOADER_PICKED_UP, ids::LOADER_DROPPED_OFF));
        assert_eq!(e.annotation, Some(correlation(OBSTRUCTED, 3, OBSTRUCTED)));

        let causality = build_causality();
        let src = cid(ids::STACK_EJECTOR_EXTEND);
        assert!(causality.graph.edges_from(&src).any(|e| e.target.as_str() == ids::STACK_EJECTOR_RETRACTED
            && e.annotation == Some(constraint(ACTIVE, 200, 300, UNOBSTRUCTED))));
        assert!(causality.graph.edges_from(&src).any(|e| e.target.as_str() == ids::STACK_EJECTOR_EXTENDED
            && e.annotation == Some(constraint(PASSIVE, 200, 300, UNOBSTRUCTED))));

        let avoidance = build_avoidance();
        assert!(avoidance.graph.edges_from(&src).any(|e| e.target.as_str() == ids::LOADER_PICKUP
            && e.annotation == Some(constraint(ACTIVE, -500, 1000, PASSIVE))));
        assert_eq!(avoidance.provenance[0], Provenance::Documented);
        assert!(avoidance.provenance[1..].iter().all(|p| *p == Provenance::Synthetic));
    }

    #[test]
    fn documented_sequence_edge_is_acyclic_alone() {
        let seq = build_process_sequence();
        let only = AnnotatedGraph::new(seq.documented_edges().cloned().collect()).unwrap();
        assert!(only.is_acyclic());
    }

    #[test]
    fn topology_names_parse() {
        for n in TopologyName::ALL {
            assert_eq!(n.as_str().parse::<TopologyName>(), Ok(n));
        }
        assert!("bogus".parse::<TopologyName>().is_err());
    }
}
