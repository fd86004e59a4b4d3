//! Streaming verification of state-change traces against topology rules,
//! plus a static spatial-consistency check over the catalog geometry.
//!
//! # Rule semantics
//!
//! Every cause occurrence opens one obligation with the closed window
//! `[t + min, t + max]`. In the default event-occurrence mode:
//!
//! * A matching effect event (other than the cause event itself) inside the
//!   window satisfies a normal rule and violates an inverse rule. The
//!   earliest such event is the witness; windows reaching into the past are
//!   answered from retained history.
//! * Otherwise the obligation expires at the first event strictly after the
//!   window, or at finalization. A normal rule then reports `ViolatedEarly`
//!   if a matching effect arrived before the window, `ViolatedLate` if the
//!   expiring event is itself a matching effect, else `ViolatedMissing`.
//!   An inverse rule reports `Satisfied`.
//!
//! In state-holds mode the target's inferred state must match the effect for
//! the whole window (normal rules) or at no point in it (inverse rules);
//! decisions are made at expiry.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ia::{DeviceKind, DeviceState, PhysicalEvent};
use crate::model::{AnnotatedGraph, Binding, ComponentId, ModelError, Relationship, TimeDuration, TimePoint};
use crate::station::{SequenceUnit, StationCatalog, TopologyName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonitorError {
    #[error("event at {got} arrived after an event at {last}")]
    OutOfOrderEvent { last: TimePoint, got: TimePoint },
    #[error("unknown device `{0}`")]
    UnknownDevice(ComponentId),
    #[error("edge {index} ({from} -> {target}) is not a temporal rule: {reason}")]
    InvalidRule {
        index: usize,
        from: ComponentId,
        target: ComponentId,
        reason: String,
    },
    #[error("history horizon {given} ms is shorter than the {needed} ms lookback the rules need")]
    HorizonTooShort { needed: i64, given: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Semantics {
    #[default]
    EventOccurrence,
    StateHolds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorConfig {
    pub correlation_tolerance_ms: i64,
    pub sequence_unit: SequenceUnit,
    pub semantics: Semantics,
    /// `None` picks the smallest horizon the rules allow.
    pub history_horizon_ms: Option<i64>,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            correlation_tolerance_ms: 0,
            sequence_unit: SequenceUnit::Seconds,
            semantics: Semantics::EventOccurrence,
            history_horizon_ms: None,
        }
    }
}

/// Identifies the topology edge a rule came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RuleRef {
    pub topology: String,
    pub edge: usize,
    pub source: ComponentId,
    pub target: ComponentId,
}

/// A topology edge compiled to a concrete window relative to the cause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub id: RuleRef,
    pub cause: DeviceState,
    pub effect: DeviceState,
    pub min: i64,
    pub max: i64,
    pub inverse: bool,
}

impl Rule {
    fn is_cause(&self, e: &PhysicalEvent) -> bool {
        e.device == self.id.source && self.cause.matches(&e.state)
    }

    fn is_effect(&self, e: &PhysicalEvent) -> bool {
        e.device == self.id.target && self.effect.matches(&e.state)
    }
}

fn relative(d: &TimeDuration, var: &str) -> Result<i64, ModelError> {
    let binding: Binding = [(var.to_string(), 0)].into();
    d.value(&binding)
}

/// Compiles every edge of `graph` into a [`Rule`].
pub fn compile_rules(topology: &str, graph: &AnnotatedGraph, cfg: &MonitorConfig) -> Result<Vec<Rule>, MonitorError> {
    graph
        .edges()
        .iter()
        .enumerate()
        .map(|(index, e)| {
            let invalid = |reason: String| MonitorError::InvalidRule {
                index,
                from: e.source.clone(),
                target: e.target.clone(),
                reason,
            };
            let id = RuleRef {
                topology: topology.to_string(),
                edge: index,
                source: e.source.clone(),
                target: e.target.clone(),
            };
            let rule = match &e.annotation {
                Some(Relationship::Correlation(c)) => {
                    let delta = relative(&c.duration, &c.cause.name).map_err(|err| invalid(err.to_string()))?
                        * cfg.sequence_unit.millis_per_unit();
                    let tol = cfg.correlation_tolerance_ms.abs();
                    Rule {
                        id,
                        cause: c.cause.clone(),
                        effect: c.effect.clone(),
                        min: delta - tol,
                        max: delta + tol,
                        inverse: false,
                    }
                }
                Some(Relationship::Constraint(c)) => {
                    let min = relative(&c.range.minimum, &c.cause.name).map_err(|err| invalid(err.to_string()))?;
                    let max = relative(&c.range.maximum, &c.cause.name).map_err(|err| invalid(err.to_string()))?;
                    if min > max {
                        return Err(invalid(format!("window [{min}, {max}] is empty")));
                    }
                    Rule {
                        id,
                        cause: c.cause.clone(),
                        effect: c.effect.clone(),
                        min,
                        max,
                        inverse: c.inverse,
                    }
                }
                Some(other) => return Err(invalid(format!("{} annotations are not checkable", other.name()))),
                None => return Err(invalid("edge has no annotation".into())),
            };
            Ok(rule)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Satisfied,
    ViolatedMissing,
    ViolatedEarly,
    ViolatedLate,
    ViolatedForbidden,
    /// Window still open when the stream ended.
    Pending,
}

impl Outcome {
    pub fn is_violation(self) -> bool {
        matches!(
            self,
            Outcome::ViolatedMissing | Outcome::ViolatedEarly | Outcome::ViolatedLate | Outcome::ViolatedForbidden
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub rule: RuleRef,
    /// Position of the cause event in the ingested stream.
    pub cause_index: u64,
    pub cause_event: PhysicalEvent,
    pub window: (TimePoint, TimePoint),
    pub outcome: Outcome,
    pub witness: Option<PhysicalEvent>,
    pub decided_at: TimePoint,
}

#[derive(Debug, Clone)]
struct Obligation {
    rule: usize,
    cause_index: u64,
    cause: PhysicalEvent,
    lo: i64,
    hi: i64,
    early: Option<PhysicalEvent>,
    /// State mode: last target event at or before `lo`.
    establishing: Option<PhysicalEvent>,
    first_bad: Option<PhysicalEvent>,
    first_good: Option<PhysicalEvent>,
}

/// Single-consumer monitor state machine.
pub struct Monitor {
    rules: Vec<Rule>,
    devices: Option<BTreeSet<ComponentId>>,
    semantics: Semantics,
    horizon: i64,
    history: VecDeque<(u64, PhysicalEvent)>,
    /// Per device: the newest event older than the horizon, then every newer one.
    timelines: BTreeMap<ComponentId, VecDeque<PhysicalEvent>>,
    pending: Vec<Obligation>,
    last_time: Option<TimePoint>,
    next_index: u64,
}

impl Monitor {
    /// `devices` restricts accepted events; `None` accepts any device.
    pub fn new(rules: Vec<Rule>, devices: Option<BTreeSet<ComponentId>>, cfg: &MonitorConfig) -> Result<Self, MonitorError> {
        let needed = rules.iter().map(|r| (-r.min).max(0)).max().unwrap_or(0);
        let horizon = match cfg.history_horizon_ms {
            Some(given) if given < needed => return Err(MonitorError::HorizonTooShort { needed, given }),
            Some(given) => given,
            None => needed,
        };
        Ok(Monitor {
            rules,
            devices,
            semantics: cfg.semantics,
            horizon,
            history: VecDeque::new(),
            timelines: BTreeMap::new(),
            pending: Vec::new(),
            last_time: None,
            next_index: 0,
        })
    }

    /// Monitor for the named topologies of a catalog.
    pub fn for_catalog(catalog: &StationCatalog, topologies: &[TopologyName], cfg: &MonitorConfig) -> Result<Self, MonitorError> {
        let mut rules = Vec::new();
        for name in topologies {
            rules.extend(compile_rules(name.as_str(), &catalog.topology(*name).graph, cfg)?);
        }
        Monitor::new(rules, Some(catalog.devices.keys().cloned().collect()), cfg)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn horizon_ms(&self) -> i64 {
        self.horizon
    }

    pub fn pending_count(&self) -> usize {
        self.pending.len()
    }

    pub fn ingest(&mut self, e: PhysicalEvent) -> Result<Vec<Verdict>, MonitorError> {
        if let Some(last) = self.last_time {
            if e.timepoint < last {
                return Err(MonitorError::OutOfOrderEvent { last, got: e.timepoint });
            }
        }
        if let Some(devs) = &self.devices {
            if !devs.contains(&e.device) {
                return Err(MonitorError::UnknownDevice(e.device.clone()));
            }
        }
        let t = e.timepoint.0;
        let index = self.next_index;
        self.next_index += 1;
        self.last_time = Some(e.timepoint);
        let mut verdicts = Vec::new();

        if self.semantics == Semantics::StateHolds {
            self.timelines.entry(e.device.clone()).or_default().push_back(e.clone());
        }

        // Progress obligations opened by earlier events.
        let mut still_pending = Vec::with_capacity(self.pending.len());
        for mut ob in std::mem::take(&mut self.pending) {
            let decided = match self.semantics {
                Semantics::EventOccurrence => self.observe_event(&mut ob, &e),
                Semantics::StateHolds => {
                    self.observe_state(&mut ob, &e);
                    None
                }
            };
            match decided {
                Some(v) => verdicts.push(v),
                None => still_pending.push(ob),
            }
        }
        self.pending = still_pending;

        // Open obligations for every rule this event triggers.
        for (ri, rule) in self.rules.iter().enumerate() {
            if !rule.is_cause(&e) {
                continue;
            }
            let mut ob = Obligation {
                rule: ri,
                cause_index: index,
                cause: e.clone(),
                lo: t + rule.min,
                hi: t + rule.max,
                early: None,
                establishing: None,
                first_bad: None,
                first_good: None,
            };
            match self.semantics {
                Semantics::EventOccurrence => {
                    let lookback = self
                        .history
                        .iter()
                        .find(|(_, h)| {
                            (ob.lo..=ob.hi).contains(&h.timepoint.0) && rule.is_effect(h)
                        })
                        .map(|(_, h)| h.clone());
                    if let Some(w) = lookback {
                        let outcome = if rule.inverse {
                            Outcome::ViolatedForbidden
                        } else {
                            Outcome::Satisfied
                        };
                        verdicts.push(self.verdict(&ob, outcome, Some(w), t));
                        continue;
                    }
                }
                Semantics::StateHolds => {
                    ob.establishing = self
                        .timelines
                        .get(&rule.id.target)
                        .and_then(|tl| tl.iter().rev().find(|h| h.timepoint.0 <= ob.lo))
                        .cloned();
                    // Target events already seen inside (lo, t].
                    if let Some(tl) = self.timelines.get(&rule.id.target) {
                        let (lo, hi) = (ob.lo, ob.hi);
                        for h in tl.iter().filter(|h| h.timepoint.0 > lo && h.timepoint.0 <= hi) {
                            Self::record_in_window(rule, &mut ob, h);
                        }
                    }
                }
            }
            self.pending.push(ob);
        }

        // Expire windows that closed before this event.
        let (expired, open): (Vec<_>, Vec<_>) = std::mem::take(&mut self.pending).into_iter().partition(|ob| ob.hi < t);
        self.pending = open;
        for ob in expired {
            verdicts.push(self.expire(&ob, t, None));
        }

        if self.semantics == Semantics::EventOccurrence {
            self.history.push_back((index, e));
            while self.history.front().is_some_and(|(_, h)| h.timepoint.0 < t - self.horizon) {
                self.history.pop_front();
            }
        } else {
            let horizon = self.horizon;
            for tl in self.timelines.values_mut() {
                while tl.len() > 1 && tl[1].timepoint.0 < t - horizon {
                    tl.pop_front();
                }
            }
        }
        Ok(verdicts)
    }

    /// Resolves everything whose window closed by `end_time`; the rest is
    /// reported as `Pending`.
    pub fn finalize(self, end_time: TimePoint) -> Vec<Verdict> {
        let end = end_time.0;
        let mut out = Vec::new();
        for ob in &self.pending {
            if ob.hi <= end {
                out.push(self.expire(ob, end, None));
            } else {
                out.push(self.verdict(ob, Outcome::Pending, None, end));
            }
        }
        out
    }

    fn observe_event(&self, ob: &mut Obligation, e: &PhysicalEvent) -> Option<Verdict> {
        let rule = &self.rules[ob.rule];
        if !rule.is_effect(e) {
            return None;
        }
        let t = e.timepoint.0;
        if t < ob.lo {
            if ob.early.is_none() && !rule.inverse {
                ob.early = Some(e.clone());
            }
            None
        } else if t <= ob.hi {
            let outcome = if rule.inverse {
                Outcome::ViolatedForbidden
            } else {
                Outcome::Satisfied
            };
            Some(self.verdict(ob, outcome, Some(e.clone()), t))
        } else {
            Some(self.expire(ob, t, Some(e)))
        }
    }

    fn observe_state(&self, ob: &mut Obligation, e: &PhysicalEvent) {
        let rule = &self.rules[ob.rule];
        if e.device != rule.id.target {
            return;
        }
        let t = e.timepoint.0;
        if t <= ob.lo {
            ob.establishing = Some(e.clone());
        } else if t <= ob.hi {
            Self::record_in_window(rule, ob, e);
        }
    }

    fn record_in_window(rule: &Rule, ob: &mut Obligation, e: &PhysicalEvent) {
        if rule.effect.matches(&e.state) {
            ob.first_good.get_or_insert_with(|| e.clone());
        } else {
            ob.first_bad.get_or_insert_with(|| e.clone());
        }
    }

    /// Decision for a window that has closed. `late` is a matching effect
    /// that arrived after the window and triggered the expiry.
    fn expire(&self, ob: &Obligation, at: i64, late: Option<&PhysicalEvent>) -> Verdict {
        let rule = &self.rules[ob.rule];
        match self.semantics {
            Semantics::EventOccurrence => {
                if rule.inverse {
                    self.verdict(ob, Outcome::Satisfied, None, at)
                } else if let Some(early) = &ob.early {
                    self.verdict(ob, Outcome::ViolatedEarly, Some(early.clone()), at)
                } else if let Some(late) = late {
                    self.verdict(ob, Outcome::ViolatedLate, Some(late.clone()), at)
                } else {
                    self.verdict(ob, Outcome::ViolatedMissing, None, at)
                }
            }
            Semantics::StateHolds => {
                let holds_at_lo = ob.establishing.as_ref().is_some_and(|h| rule.effect.matches(&h.state));
                if rule.inverse {
                    if holds_at_lo {
                        self.verdict(ob, Outcome::ViolatedForbidden, ob.establishing.clone(), at)
                    } else if let Some(g) = &ob.first_good {
                        self.verdict(ob, Outcome::ViolatedForbidden, Some(g.clone()), at)
                    } else {
                        self.verdict(ob, Outcome::Satisfied, None, at)
                    }
                } else if holds_at_lo && ob.first_bad.is_none() {
                    self.verdict(ob, Outcome::Satisfied, ob.establishing.clone(), at)
                } else {
                    let witness = ob.first_bad.clone().or_else(|| ob.establishing.clone());
                    self.verdict(ob, Outcome::ViolatedMissing, witness, at)
                }
            }
        }
    }

    fn verdict(&self, ob: &Obligation, outcome: Outcome, witness: Option<PhysicalEvent>, at: i64) -> Verdict {
        Verdict {
            rule: self.rules[ob.rule].id.clone(),
            cause_index: ob.cause_index,
            cause_event: ob.cause.clone(),
            window: (TimePoint(ob.lo), TimePoint(ob.hi)),
            outcome,
            witness,
            decided_at: TimePoint(at),
        }
    }
}

/// Sorts by decision time, then rule, then cause position.
pub fn sort_verdicts(verdicts: &mut [Verdict], rules: &[Rule]) {
    let order: BTreeMap<&RuleRef, usize> = rules.iter().enumerate().map(|(i, r)| (&r.id, i)).collect();
    verdicts.sort_by_key(|v| (v.decided_at, order.get(&v.rule).copied().unwrap_or(usize::MAX), v.cause_index));
}

/// Batch check: ingest the whole trace, then finalize at its last timestamp.
pub fn check_rules(
    rules: Vec<Rule>,
    devices: Option<BTreeSet<ComponentId>>,
    trace: &[PhysicalEvent],
    cfg: &MonitorConfig,
) -> Result<Vec<Verdict>, MonitorError> {
    let mut monitor = Monitor::new(rules.clone(), devices, cfg)?;
    let mut verdicts = Vec::new();
    for e in trace {
        verdicts.extend(monitor.ingest(e.clone())?);
    }
    let end = trace.last().map_or(TimePoint(0), |e| e.timepoint);
    verdicts.extend(monitor.finalize(end));
    sort_verdicts(&mut verdicts, &rules);
    Ok(verdicts)
}

pub fn check_trace(
    catalog: &StationCatalog,
    topology: &AnnotatedGraph,
    topology_name: &str,
    trace: &[PhysicalEvent],
    cfg: &MonitorConfig,
) -> Result<Vec<Verdict>, MonitorError> {
    let rules = compile_rules(topology_name, topology, cfg)?;
    check_rules(rules, Some(catalog.devices.keys().cloned().collect()), trace, cfg)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpatialPair {
    pub device_a: ComponentId,
    pub device_b: ComponentId,
    pub overlap: bool,
    pub shared_volume: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpatialReport {
    pub pairs: Vec<SpatialPair>,
}

impl SpatialReport {
    pub fn overlaps(&self) -> impl Iterator<Item = &SpatialPair> {
        self.pairs.iter().filter(|p| p.overlap)
    }
}

/// Pairwise overlap of located devices. A device is not checked against the
/// part it is mounted on, since it sits inside that part's envelope.
pub fn check_spatial(catalog: &StationCatalog) -> SpatialReport {
    let located: Vec<_> = catalog.located_devices().into_iter().collect();
    let mounted_on = |a: &ComponentId, b: &ComponentId| catalog.part_association(a) == Some(b.as_str());
    let mut pairs = Vec::new();
    for (i, (a, box_a)) in located.iter().enumerate() {
        for (b, box_b) in &located[i + 1..] {
            if mounted_on(a, b) || mounted_on(b, a) {
                continue;
            }
            let overlap = box_a.overlaps(box_b);
            pairs.push(SpatialPair {
                device_a: a.clone(),
                device_b: b.clone(),
                overlap,
                shared_volume: if overlap { box_a.shared_volume(box_b) } else { 0 },
            });
        }
    }
    SpatialReport { pairs }
}

/// Same check restricted to devices of one kind.
pub fn check_spatial_kind(catalog: &StationCatalog, kind: DeviceKind) -> SpatialReport {
    let mut report = check_spatial(catalog);
    report
        .pairs
        .retain(|p| catalog.kind_of(&p.device_a) == Some(kind) && catalog.kind_of(&p.device_b) == Some(kind));
    report
}
