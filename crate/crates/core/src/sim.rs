//! Deterministic discrete-event simulator of the cap dispenser.
//!
//! Actuator commands are interpreted through each actuator's signal mapping.
//! Motions take a configurable latency; end-position sensors switch when a
//! motion arrives. Output is a time-ordered stream of [`PhysicalEvent`]s.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ia::{DeviceKind, DeviceState, PhysicalEvent, Signal, ACTIVE, GRIPPED, OBSTRUCTED, RELEASED, UNOBSTRUCTED};
use crate::model::{ComponentId, TimePoint};
use crate::station::{cid, ids, StationCatalog};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("unknown actuator `{0}`")]
    UnknownActuator(ComponentId),
    #[error("unknown device `{0}` in fault specification")]
    UnknownDevice(ComponentId),
    #[error("command at {t} precedes simulation clock {clock}")]
    TimeRegression { t: TimePoint, clock: TimePoint },
    #[error("commands must carry High or Low, not DontCare")]
    AbstractSignal,
    #[error("script command {index}: {source}")]
    Script {
        index: usize,
        #[source]
        source: Box<SimError>,
    },
    #[error("script times must be nondecreasing (command {index})")]
    UnorderedScript { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EjectorPos {
    Retracted,
    Extended,
    MovingOut,
    MovingIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArmPos {
    AtPickup,
    AtDropoff,
    /// Towards the pickup area.
    MovingLeft,
    /// Towards the drop-off area.
    MovingRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    Activate,
    Deactivate,
}

/// Motion and effect latencies per `(actuator, transition)`, in ms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencyTable {
    entries: BTreeMap<(ComponentId, Transition), i64>,
    /// Uniform jitter half-width applied to every scheduled latency.
    pub jitter_ms: i64,
}

impl Default for LatencyTable {
    fn default() -> Self {
        let mut t = LatencyTable {
            entries: BTreeMap::new(),
            jitter_ms: 0,
        };
        t.set(&cid(ids::STACK_EJECTOR_EXTEND), Transition::Activate, 250);
        t.set(&cid(ids::STACK_EJECTOR_EXTEND), Transition::Deactivate, 250);
        t.set(&cid(ids::LOADER_PICKUP), Transition::Activate, 800);
        t.set(&cid(ids::LOADER_DROPOFF), Transition::Activate, 800);
        t.set(&cid(ids::VACUUM_GRIP), Transition::Activate, 150);
        t.set(&cid(ids::EJECT_AIR_PULSE), Transition::Activate, 50);
        t
    }
}

impl LatencyTable {
    pub fn set(&mut self, actuator: &ComponentId, transition: Transition, ms: i64) {
        self.entries.insert((actuator.clone(), transition), ms.max(0));
    }

    pub fn get(&self, actuator: &str, transition: Transition) -> i64 {
        self.entries
            .get(&(cid(actuator), transition))
            .copied()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum FaultSpec {
    /// Replaces the latency of one actuator transition (both when omitted).
    LatencyOverride {
        actuator: ComponentId,
        #[serde(default)]
        transition: Option<Transition>,
        latency_ms: i64,
    },
    /// The sensor keeps reporting `state` regardless of the machine.
    StuckSensor { device: ComponentId, state: String },
    /// Events of `device` never reach the output.
    DropEvents { device: ComponentId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Command {
    #[serde(rename = "time_ms")]
    pub time: TimePoint,
    pub actuator: ComponentId,
    pub signal: Signal,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CommandScript {
    commands: Vec<Command>,
}

impl CommandScript {
    pub fn new(commands: Vec<Command>) -> Result<Self, SimError> {
        for (i, c) in commands.iter().enumerate() {
            if !c.signal.is_concrete() {
                return Err(SimError::Script {
                    index: i,
                    source: Box::new(SimError::AbstractSignal),
                });
            }
            if i > 0 && c.time < commands[i - 1].time {
                return Err(SimError::UnorderedScript { index: i });
            }
        }
        Ok(CommandScript { commands })
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }
}

/// Ejector (0 = retracted, 1 = extended) or arm (0 = pickup, 1 = drop-off)
/// travel in progress.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Motion {
    from: f64,
    to: f64,
    start: i64,
    end: i64,
    generation: u64,
}

impl Motion {
    fn position_at(&self, t: i64) -> f64 {
        if self.end <= self.start {
            return self.to;
        }
        let frac = ((t - self.start) as f64 / (self.end - self.start) as f64).clamp(0.0, 1.0);
        self.from + (self.to - self.from) * frac
    }
}

/// Observable machine state. Sensor readings are derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationState {
    pub ejector_pos: EjectorPos,
    pub arm_pos: ArmPos,
    pub vacuum_on: bool,
    pub pulse_on: bool,
    pub gripped: bool,
    pub stack_count: u32,
    pub clock: TimePoint,
    /// Caps pushed out and waiting in the pickup area.
    pub caps_at_pickup: u32,
    pub caps_delivered: u32,
    pub caps_dropped: u32,
    /// Extensions that completed with a non-empty stack.
    pub completed_ejections: u32,
    pub actuators: BTreeMap<ComponentId, String>,
    /// Last end position the ejector reached (`true` = extended).
    ejector_last_extended: bool,
    /// Last end position the arm reached (`true` = drop-off).
    arm_last_dropoff: bool,
    ejector_motion: Option<Motion>,
    arm_motion: Option<Motion>,
    grip_pending: Option<u64>,
    release_pending: Option<u64>,
}

impl StationState {
    fn initial(stack_count: u32) -> Self {
        StationState {
            ejector_pos: EjectorPos::Retracted,
            arm_pos: ArmPos::AtPickup,
            vacuum_on: false,
            pulse_on: false,
            gripped: false,
            stack_count,
            clock: TimePoint(0),
            caps_at_pickup: 0,
            caps_delivered: 0,
            caps_dropped: 0,
            completed_ejections: 0,
            actuators: ids::ACTUATORS
                .iter()
                .map(|a| (cid(a), crate::ia::PASSIVE.to_string()))
                .collect(),
            ejector_last_extended: false,
            arm_last_dropoff: false,
            ejector_motion: None,
            arm_motion: None,
            grip_pending: None,
            release_pending: None,
        }
    }

    /// State name each sensor reports for this machine state.
    pub fn sensor_readings(&self) -> BTreeMap<ComponentId, &'static str> {
        let obstructed = |b: bool| if b { OBSTRUCTED } else { UNOBSTRUCTED };
        [
            (ids::STACK_EMPTY, obstructed(self.stack_count > 0)),
            (ids::STACK_EJECTOR_EXTENDED, obstructed(self.ejector_last_extended)),
            (ids::STACK_EJECTOR_RETRACTED, obstructed(!self.ejector_last_extended)),
            (ids::LOADER_PICKED_UP, obstructed(!self.arm_last_dropoff)),
            (ids::LOADER_DROPPED_OFF, obstructed(self.arm_last_dropoff)),
            (ids::WORKPIECE_GRIPPED, if self.gripped { GRIPPED } else { RELEASED }),
        ]
        .into_iter()
        .map(|(k, v)| (cid(k), v))
        .collect()
    }

    /// Spatial variation positions that currently hold, per movable part.
    pub fn positions(&self) -> (Vec<&'static str>, Vec<&'static str>) {
        use crate::station::{EJECTOR_POSITIONS, LOADER_POSITIONS};
        let ejector = match self.ejector_pos {
            EjectorPos::Retracted => vec![EJECTOR_POSITIONS[0]],
            EjectorPos::Extended => vec![EJECTOR_POSITIONS[1]],
            _ => vec![],
        };
        let arm = match self.arm_pos {
            ArmPos::AtPickup => vec![LOADER_POSITIONS[0]],
            ArmPos::AtDropoff => vec![LOADER_POSITIONS[1]],
            _ => vec![],
        };
        (ejector, arm)
    }

    /// Every cap is in exactly one place.
    pub fn caps_accounted(&self) -> u32 {
        self.stack_count + self.caps_at_pickup + u32::from(self.gripped) + self.caps_delivered + self.caps_dropped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Scheduled {
    EjectorArrive(u64),
    ArmArrive(u64),
    GripComplete(u64),
    ReleaseComplete(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub initial_stack: u32,
    pub latencies: LatencyTable,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            initial_stack: 5,
            latencies: LatencyTable::default(),
            seed: 0,
        }
    }
}

/// Single-threaded simulation run. Owns its state and event queue.
pub struct Simulator<'c> {
    catalog: &'c StationCatalog,
    state: StationState,
    latencies: LatencyTable,
    queue: BinaryHeap<Reverse<(i64, u64, Scheduled)>>,
    seq: u64,
    generation: u64,
    rng: ChaCha8Rng,
    reported: BTreeMap<ComponentId, String>,
    stuck: BTreeMap<ComponentId, String>,
    dropped: BTreeSet<ComponentId>,
    out: Vec<PhysicalEvent>,
}

impl<'c> Simulator<'c> {
    /// Starts a run at time 0. The initial reading of every sensor is
    /// available from the first call to [`Simulator::take_events`].
    pub fn new(catalog: &'c StationCatalog, config: &SimConfig, faults: &[FaultSpec]) -> Result<Self, SimError> {
        let mut latencies = config.latencies.clone();
        let mut stuck = BTreeMap::new();
        let mut dropped = BTreeSet::new();
        for f in faults {
            match f {
                FaultSpec::LatencyOverride {
                    actuator,
                    transition,
                    latency_ms,
                } => {
                    if catalog.kind_of(actuator) != Some(DeviceKind::Actuator) {
                        return Err(SimError::UnknownActuator(actuator.clone()));
                    }
                    let ts = match transition {
                        Some(t) => vec![*t],
                        None => vec![Transition::Activate, Transition::Deactivate],
                    };
                    for t in ts {
                        latencies.set(actuator, t, *latency_ms);
                    }
                }
                FaultSpec::StuckSensor { device, state } => {
                    if catalog.kind_of(device) != Some(DeviceKind::Sensor) {
                        return Err(SimError::UnknownDevice(device.clone()));
                    }
                    stuck.insert(device.clone(), state.clone());
                }
                FaultSpec::DropEvents { device } => {
                    if catalog.kind_of(device).is_none() {
                        return Err(SimError::UnknownDevice(device.clone()));
                    }
                    dropped.insert(device.clone());
                }
            }
        }
        let mut sim = Simulator {
            catalog,
            state: StationState::initial(config.initial_stack),
            latencies,
            queue: BinaryHeap::new(),
            seq: 0,
            generation: 0,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            reported: BTreeMap::new(),
            stuck,
            dropped,
            out: Vec::new(),
        };
        sim.sync_sensors(0);
        Ok(sim)
    }

    pub fn state(&self) -> &StationState {
        &self.state
    }

    /// Events produced since the last call.
    pub fn take_events(&mut self) -> Vec<PhysicalEvent> {
        std::mem::take(&mut self.out)
    }

    /// Processes every scheduled completion at or before `t`.
    pub fn advance_to(&mut self, t: TimePoint) -> Result<Vec<PhysicalEvent>, SimError> {
        if t < self.state.clock {
            return Err(SimError::TimeRegression {
                t,
                clock: self.state.clock,
            });
        }
        while let Some(Reverse((when, _, _))) = self.queue.peek() {
            if *when > t.0 {
                break;
            }
            let Reverse((when, _, item)) = self.queue.pop().expect("peeked");
            self.state.clock = TimePoint(when);
            self.complete(item, when);
        }
        self.state.clock = t;
        Ok(self.take_events())
    }

    /// Drives `actuator` with `signal` at `t`. Returns everything emitted up to
    /// and including `t`; motion completions surface on later calls.
    pub fn apply(&mut self, actuator: &ComponentId, signal: Signal, t: TimePoint) -> Result<Vec<PhysicalEvent>, SimError> {
        if self.catalog.kind_of(actuator) != Some(DeviceKind::Actuator) {
            return Err(SimError::UnknownActuator(actuator.clone()));
        }
        if !signal.is_concrete() {
            return Err(SimError::AbstractSignal);
        }
        let mut events = self.advance_to(t)?;
        let mapping = self
            .catalog
            .signal_mapping(actuator)
            .ok_or_else(|| SimError::UnknownActuator(actuator.clone()))?;
        let new_state = mapping.apply(signal).expect("concrete signal").clone();
        let current = self.state.actuators.get(actuator).cloned().unwrap_or_default();
        if current == new_state.name {
            return Ok(events);
        }
        self.state
            .actuators
            .insert(actuator.clone(), new_state.name.clone());
        self.emit(actuator, DeviceKind::Actuator, t.0, new_state.clone());
        let active = new_state.name == ACTIVE;
        self.actuate(actuator.as_str(), active, t.0);
        self.sync_sensors(t.0);
        events.extend(self.take_events());
        Ok(events)
    }

    /// Runs all outstanding motions to completion. The clock stops at the
    /// last completion that still mattered.
    pub fn finish(mut self) -> (StationState, Vec<PhysicalEvent>) {
        while let Some(Reverse((when, _, item))) = self.queue.pop() {
            if self.is_live(item) {
                self.state.clock = TimePoint(when);
                self.complete(item, when);
            }
        }
        let events = self.take_events();
        (self.state, events)
    }

    fn is_live(&self, item: Scheduled) -> bool {
        match item {
            Scheduled::EjectorArrive(g) => self.state.ejector_motion.is_some_and(|m| m.generation == g),
            Scheduled::ArmArrive(g) => self.state.arm_motion.is_some_and(|m| m.generation == g),
            Scheduled::GripComplete(g) => self.state.grip_pending == Some(g),
            Scheduled::ReleaseComplete(g) => self.state.release_pending == Some(g),
        }
    }

    fn actuate(&mut self, actuator: &str, active: bool, t: i64) {
        match actuator {
            ids::STACK_EJECTOR_EXTEND => {
                let (target, transition) = if active {
                    (1.0, Transition::Activate)
                } else {
                    (0.0, Transition::Deactivate)
                };
                let full = self.latencies.get(ids::STACK_EJECTOR_EXTEND, transition);
                self.start_ejector(target, full, t);
            }
            ids::LOADER_PICKUP if active => {
                let full = self.latencies.get(ids::LOADER_PICKUP, Transition::Activate);
                self.start_arm(0.0, full, t);
            }
            ids::LOADER_DROPOFF if active => {
                let full = self.latencies.get(ids::LOADER_DROPOFF, Transition::Activate);
                self.start_arm(1.0, full, t);
            }
            ids::VACUUM_GRIP => {
                self.state.vacuum_on = active;
                if !active {
                    self.state.grip_pending = None;
                    if self.state.gripped {
                        self.release_cap();
                    }
                }
            }
            ids::EJECT_AIR_PULSE => {
                self.state.pulse_on = active;
                if active {
                    self.state.grip_pending = None;
                    if self.state.gripped && self.state.release_pending.is_none() {
                        let gen = self.next_generation();
                        self.state.release_pending = Some(gen);
                        let lat = self.latencies.get(ids::EJECT_AIR_PULSE, Transition::Activate);
                        self.schedule(t, lat, Scheduled::ReleaseComplete(gen));
                    }
                } else {
                    self.state.release_pending = None;
                }
            }
            _ => {}
        }
        self.maybe_schedule_grip(t);
    }

    fn start_ejector(&mut self, target: f64, full: i64, t: i64) {
        let current = match (self.state.ejector_motion, self.state.ejector_pos) {
            (Some(m), _) => m.position_at(t),
            (None, EjectorPos::Extended) => 1.0,
            _ => 0.0,
        };
        if (current - target).abs() < f64::EPSILON {
            // Reversed before leaving: back at rest, nothing ejected.
            self.state.ejector_motion = None;
            self.state.ejector_pos = if target >= 1.0 {
                EjectorPos::Extended
            } else {
                EjectorPos::Retracted
            };
            return;
        }
        let gen = self.next_generation();
        let duration = ((current - target).abs() * full as f64).round() as i64;
        let end = self.schedule(t, duration, Scheduled::EjectorArrive(gen));
        self.state.ejector_motion = Some(Motion {
            from: current,
            to: target,
            start: t,
            end,
            generation: gen,
        });
        self.state.ejector_pos = if target > current {
            EjectorPos::MovingOut
        } else {
            EjectorPos::MovingIn
        };
    }

    fn start_arm(&mut self, target: f64, full: i64, t: i64) {
        let current = match (self.state.arm_motion, self.state.arm_pos) {
            (Some(m), _) => m.position_at(t),
            (None, ArmPos::AtDropoff) => 1.0,
            _ => 0.0,
        };
        if let Some(m) = self.state.arm_motion {
            if m.to == target {
                return;
            }
        }
        if self.state.arm_motion.is_none() && (current - target).abs() < f64::EPSILON {
            return;
        }
        let gen = self.next_generation();
        let duration = ((current - target).abs() * full as f64).round() as i64;
        let end = self.schedule(t, duration, Scheduled::ArmArrive(gen));
        self.state.arm_motion = Some(Motion {
            from: current,
            to: target,
            start: t,
            end,
            generation: gen,
        });
        self.state.arm_pos = if target > current {
            ArmPos::MovingRight
        } else {
            ArmPos::MovingLeft
        };
        self.state.grip_pending = None;
    }

    fn complete(&mut self, item: Scheduled, t: i64) {
        match item {
            Scheduled::EjectorArrive(gen) => {
                let Some(m) = self.state.ejector_motion.filter(|m| m.generation == gen) else {
                    return;
                };
                self.state.ejector_motion = None;
                if m.to >= 1.0 {
                    self.state.ejector_pos = EjectorPos::Extended;
                    self.state.ejector_last_extended = true;
                    if self.state.stack_count > 0 {
                        self.state.stack_count -= 1;
                        self.state.caps_at_pickup += 1;
                        self.state.completed_ejections += 1;
                    }
                } else {
                    // Remaining caps slide down one cap height; count unchanged.
                    self.state.ejector_pos = EjectorPos::Retracted;
                    self.state.ejector_last_extended = false;
                }
            }
            Scheduled::ArmArrive(gen) => {
                let Some(m) = self.state.arm_motion.filter(|m| m.generation == gen) else {
                    return;
                };
                self.state.arm_motion = None;
                if m.to >= 1.0 {
                    self.state.arm_pos = ArmPos::AtDropoff;
                    self.state.arm_last_dropoff = true;
                } else {
                    self.state.arm_pos = ArmPos::AtPickup;
                    self.state.arm_last_dropoff = false;
                }
            }
            Scheduled::GripComplete(gen) => {
                if self.state.grip_pending != Some(gen) {
                    return;
                }
                self.state.grip_pending = None;
                if self.can_grip() {
                    self.state.caps_at_pickup -= 1;
                    self.state.gripped = true;
                }
            }
            Scheduled::ReleaseComplete(gen) => {
                if self.state.release_pending != Some(gen) {
                    return;
                }
                self.state.release_pending = None;
                if self.state.gripped {
                    self.release_cap();
                }
            }
        }
        self.maybe_schedule_grip(t);
        self.sync_sensors(t);
    }

    fn can_grip(&self) -> bool {
        self.state.vacuum_on
            && !self.state.pulse_on
            && !self.state.gripped
            && self.state.arm_pos == ArmPos::AtPickup
            && self.state.caps_at_pickup > 0
    }

    fn maybe_schedule_grip(&mut self, t: i64) {
        if self.state.grip_pending.is_none() && self.can_grip() {
            let gen = self.next_generation();
            self.state.grip_pending = Some(gen);
            let lat = self.latencies.get(ids::VACUUM_GRIP, Transition::Activate);
            self.schedule(t, lat, Scheduled::GripComplete(gen));
        }
    }

    fn release_cap(&mut self) {
        self.state.gripped = false;
        self.state.release_pending = None;
        match self.state.arm_pos {
            ArmPos::AtDropoff => self.state.caps_delivered += 1,
            ArmPos::AtPickup => self.state.caps_at_pickup += 1,
            _ => self.state.caps_dropped += 1,
        }
    }

    fn next_generation(&mut self) -> u64 {
        self.generation += 1;
        self.generation
    }

    fn schedule(&mut self, t: i64, latency: i64, item: Scheduled) -> i64 {
        let jitter = self.latencies.jitter_ms;
        let latency = if jitter > 0 {
            (latency + self.rng.gen_range(-jitter..=jitter)).max(0)
        } else {
            latency
        };
        let when = t + latency;
        self.seq += 1;
        self.queue.push(Reverse((when, self.seq, item)));
        when
    }

    /// Emits an event for every sensor whose reported value changed, clears
    /// before activations.
    fn sync_sensors(&mut self, t: i64) {
        let readings = self.state.sensor_readings();
        let mut changes: Vec<(ComponentId, String)> = Vec::new();
        for (sensor, value) in readings {
            let value = self.stuck.get(&sensor).cloned().unwrap_or_else(|| value.to_string());
            if self.reported.get(&sensor) != Some(&value) {
                changes.push((sensor, value));
            }
        }
        changes.sort_by_key(|(_, v)| matches!(v.as_str(), OBSTRUCTED | GRIPPED));
        for (sensor, value) in changes {
            self.reported.insert(sensor.clone(), value.clone());
            let mapping = self.catalog.signal_mapping(&sensor).expect("sensors have mappings");
            let state = mapping
                .state_named(&value)
                .cloned()
                .unwrap_or_else(|| DeviceState::new(value, Signal::Low));
            self.emit(&sensor, DeviceKind::Sensor, t, state);
        }
    }

    fn emit(&mut self, device: &ComponentId, kind: DeviceKind, t: i64, state: DeviceState) {
        if self.dropped.contains(device) {
            return;
        }
        let event = PhysicalEvent::new(device.clone(), kind, TimePoint(t), state)
            .expect("simulator emits concrete states");
        self.out.push(event);
    }

    /// Last value each sensor reported, including stuck values.
    pub fn reported(&self) -> &BTreeMap<ComponentId, String> {
        &self.reported
    }
}

/// Runs `script` and hands every event to `sink` in order.
pub fn simulate_into(
    catalog: &StationCatalog,
    config: &SimConfig,
    script: &CommandScript,
    faults: &[FaultSpec],
    mut sink: impl FnMut(PhysicalEvent),
) -> Result<StationState, SimError> {
    let mut sim = Simulator::new(catalog, config, faults)?;
    sim.take_events().into_iter().for_each(&mut sink);
    for (index, c) in script.commands().iter().enumerate() {
        let events = sim
            .apply(&c.actuator, c.signal, c.time)
            .map_err(|e| SimError::Script {
                index,
                source: Box::new(e),
            })?;
        events.into_iter().for_each(&mut sink);
    }
    let (state, rest) = sim.finish();
    rest.into_iter().for_each(&mut sink);
    Ok(state)
}

pub fn simulate(
    catalog: &StationCatalog,
    config: &SimConfig,
    script: &CommandScript,
    faults: &[FaultSpec],
) -> Result<(StationState, Vec<PhysicalEvent>), SimError> {
    let mut out = Vec::new();
    let state = simulate_into(catalog, config, script, faults, |e| out.push(e))?;
    Ok((state, out))
}

/// Default-configuration run with the given seed.
pub fn sim_run(
    catalog: &StationCatalog,
    script: &CommandScript,
    faults: &[FaultSpec],
    seed: u64,
) -> Result<Vec<PhysicalEvent>, SimError> {
    let config = SimConfig {
        seed,
        ..SimConfig::default()
    };
    simulate(catalog, &config, script, faults).map(|(_, events)| events)
}

/// Start of the first dispensing cycle in [`nominal_script`].
pub const NOMINAL_FIRST_CYCLE_MS: i64 = 3500;
/// Length of one dispensing cycle in [`nominal_script`].
pub const NOMINAL_CYCLE_MS: i64 = 5000;

/// Parks the arm at the drop-off, then runs `cycles` dispensing cycles:
/// extend, retract, swing to pickup, grip, swing to drop-off, release.
/// Timed for the default latencies.
pub fn nominal_script(cycles: u32) -> CommandScript {
    use ids::*;
    use Signal::{High, Low};
    let mut cmds = vec![(2200, LOADER_DROPOFF, High), (3100, LOADER_DROPOFF, Low)];
    for k in 0..cycles as i64 {
        let b = NOMINAL_FIRST_CYCLE_MS + k * NOMINAL_CYCLE_MS;
        cmds.extend([
            (b, STACK_EJECTOR_EXTEND, High),
            (b + 500, STACK_EJECTOR_EXTEND, Low),
            (b + 550, LOADER_PICKUP, High),
            (b + 600, LOADER_PICKUP, Low),
            (b + 1400, VACUUM_GRIP, High),
            (b + 3550, LOADER_DROPOFF, High),
            (b + 4450, LOADER_DROPOFF, Low),
            (b + 4500, EJECT_AIR_PULSE, High),
            (b + 4600, VACUUM_GRIP, Low),
            (b + 4700, EJECT_AIR_PULSE, Low),
        ]);
    }
    CommandScript::new(
        cmds.into_iter()
            .map(|(t, a, s)| Command {
                time: TimePoint(t),
                actuator: cid(a),
                signal: s,
            })
            .collect(),
    )
    .expect("nominal script is ordered")
}
