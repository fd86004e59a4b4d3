//! Domain-agnostic modelling constructs: formula terms, time, occupancy boxes,
//! key/value maps, annotated graphs and temporal rules.
//!
//! Every value here is immutable once built and is `Send + Sync`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ia::{DeviceState, SignalMapping};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate key `{0}` in map")]
    DuplicateKey(ComponentId),
    #[error("component id must not be empty")]
    EmptyComponentId,
    #[error("variable `{0}` has no binding")]
    UnboundVariable(String),
    #[error("negative extent ({w}, {d}, {h})")]
    NegativeExtent { w: i64, d: i64, h: i64 },
    #[error("{0} requires at least {1} terms")]
    TooFewTerms(&'static str, usize),
    #[error("time interval end {end} precedes start {start}")]
    InvertedInterval { start: i64, end: i64 },
    #[error("term is not an exclusive-or")]
    NotAnXor,
    #[error("active term is not a member of the exclusive-or")]
    NotAMember,
    #[error("duplicate edge {from} -> {target} with identical annotation")]
    DuplicateEdge {
        from: ComponentId,
        target: ComponentId,
    },
}

/// Unique name of a device or concept.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ComponentId(String);

impl ComponentId {
    pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
        let id = id.into();
        if id.is_empty() {
            return Err(ModelError::EmptyComponentId);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ComponentId {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ComponentId> for String {
    fn from(id: ComponentId) -> Self {
        id.0
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.0)
    }
}

/// Integer milliseconds.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TimePoint(pub i64);

impl TimePoint {
    pub fn millis(self) -> i64 {
        self.0
    }

    pub fn offset(self, delta_ms: i64) -> TimePoint {
        TimePoint(self.0 + delta_ms)
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ms", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TimeInterval {
    start: TimePoint,
    end: TimePoint,
}

impl TimeInterval {
    pub fn new(start: TimePoint, end: TimePoint) -> Result<Self, ModelError> {
        if end < start {
            return Err(ModelError::InvertedInterval {
                start: start.0,
                end: end.0,
            });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> TimePoint {
        self.start
    }

    pub fn end(&self) -> TimePoint {
        self.end
    }

    /// Closed interval membership.
    pub fn contains(&self, t: TimePoint) -> bool {
        self.start <= t && t <= self.end
    }
}

/// Axis-aligned box in integer millimetres, always stored with
/// `x1 <= x2`, `y1 <= y2`, `z1 <= z2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "RawBox")]
pub struct Box3D {
    x1: i64,
    y1: i64,
    z1: i64,
    x2: i64,
    y2: i64,
    z2: i64,
}

#[derive(Deserialize)]
struct RawBox {
    x1: i64,
    y1: i64,
    z1: i64,
    x2: i64,
    y2: i64,
    z2: i64,
}

impl From<RawBox> for Box3D {
    fn from(r: RawBox) -> Self {
        Box3D::new(r.x1, r.y1, r.z1, r.x2, r.y2, r.z2)
    }
}

impl Box3D {
    /// Builds a box from two opposite corners in any order.
    pub fn new(x1: i64, y1: i64, z1: i64, x2: i64, y2: i64, z2: i64) -> Self {
        Self {
            x1: x1.min(x2),
            y1: y1.min(y2),
            z1: z1.min(z2),
            x2: x1.max(x2),
            y2: y1.max(y2),
            z2: z1.max(z2),
        }
    }

    /// Box anchored at its left/front/bottom corner with the given width,
    /// depth and height.
    pub fn from_anchor(x: i64, y: i64, z: i64, w: i64, d: i64, h: i64) -> Result<Self, ModelError> {
        if w < 0 || d < 0 || h < 0 {
            return Err(ModelError::NegativeExtent { w, d, h });
        }
        Ok(Self::new(x, y, z, x + w, y + d, z + h))
    }

    pub fn min_corner(&self) -> (i64, i64, i64) {
        (self.x1, self.y1, self.z1)
    }

    pub fn max_corner(&self) -> (i64, i64, i64) {
        (self.x2, self.y2, self.z2)
    }

    pub fn volume(&self) -> i64 {
        (self.x2 - self.x1) * (self.y2 - self.y1) * (self.z2 - self.z1)
    }

    /// True iff the boxes share positive volume. Touching faces, edges or
    /// corners do not count.
    pub fn overlaps(&self, other: &Box3D) -> bool {
        self.x1.max(other.x1) < self.x2.min(other.x2)
            && self.y1.max(other.y1) < self.y2.min(other.y2)
            && self.z1.max(other.z1) < self.z2.min(other.z2)
    }

    /// Closed intersection; may be degenerate when the boxes only touch.
    pub fn intersection(&self, other: &Box3D) -> Option<Box3D> {
        let x1 = self.x1.max(other.x1);
        let y1 = self.y1.max(other.y1);
        let z1 = self.z1.max(other.z1);
        let x2 = self.x2.min(other.x2);
        let y2 = self.y2.min(other.y2);
        let z2 = self.z2.min(other.z2);
        if x1 > x2 || y1 > y2 || z1 > z2 {
            return None;
        }
        Some(Box3D {
            x1,
            y1,
            z1,
            x2,
            y2,
            z2,
        })
    }

    pub fn shared_volume(&self, other: &Box3D) -> i64 {
        self.intersection(other).map_or(0, |b| b.volume())
    }
}

impl fmt::Display for Box3D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{})-({},{},{})",
            self.x1, self.y1, self.z1, self.x2, self.y2, self.z2
        )
    }
}

/// Value side of a description entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ComponentValue {
    Str(String),
    Int(i64),
    Box(Box3D),
    /// Mutually exclusive alternatives.
    Variations(Vec<ComponentValue>),
    SignalMap(SignalMapping),
    StateName(String),
}

impl ComponentValue {
    pub fn str(s: impl Into<String>) -> Self {
        ComponentValue::Str(s.into())
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ComponentValue::Str(s) | ComponentValue::StateName(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            ComponentValue::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_box(&self) -> Option<&Box3D> {
        match self {
            ComponentValue::Box(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_signal_map(&self) -> Option<&SignalMapping> {
        match self {
            ComponentValue::SignalMap(m) => Some(m),
            _ => None,
        }
    }
}

/// Leaf payloads of [`InvariantTerm`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "atom", content = "payload", rename_all = "snake_case")]
pub enum Atom {
    Component(ComponentId),
    Value(ComponentValue),
    Time(TimePoint),
    Interval(TimeInterval),
    Occupy(Box3D),
    Position(String),
}

/// Formula tree every model object can be expressed in.
///
/// Ordering is by variant tag first, then by the canonical JSON encoding of
/// the payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "term", content = "body", rename_all = "snake_case")]
pub enum InvariantTerm {
    Atom(Atom),
    BigAnd(Vec<InvariantTerm>),
    Xor(Vec<InvariantTerm>),
    Implies(Box<InvariantTerm>, Box<InvariantTerm>),
}

impl InvariantTerm {
    pub fn atom(a: Atom) -> Self {
        InvariantTerm::Atom(a)
    }

    pub fn big_and(terms: Vec<InvariantTerm>) -> Result<Self, ModelError> {
        if terms.is_empty() {
            return Err(ModelError::TooFewTerms("BigAnd", 1));
        }
        Ok(InvariantTerm::BigAnd(terms))
    }

    pub fn xor(terms: Vec<InvariantTerm>) -> Result<Self, ModelError> {
        if terms.is_empty() {
            return Err(ModelError::TooFewTerms("Xor", 1));
        }
        Ok(InvariantTerm::Xor(terms))
    }

    pub fn implies(premise: InvariantTerm, conclusion: InvariantTerm) -> Self {
        InvariantTerm::Implies(Box::new(premise), Box::new(conclusion))
    }

    fn tag_rank(&self) -> u8 {
        match self {
            InvariantTerm::Atom(_) => 0,
            InvariantTerm::BigAnd(_) => 1,
            InvariantTerm::Xor(_) => 2,
            InvariantTerm::Implies(..) => 3,
        }
    }

    fn payload_key(&self) -> String {
        let payload = match self {
            InvariantTerm::Atom(a) => serde_json::to_string(a),
            InvariantTerm::BigAnd(ts) | InvariantTerm::Xor(ts) => serde_json::to_string(ts),
            InvariantTerm::Implies(p, c) => serde_json::to_string(&(p, c)),
        };
        payload.expect("model terms always serialize")
    }
}

impl Ord for InvariantTerm {
    fn cmp(&self, other: &Self) -> Ordering {
        self.tag_rank()
            .cmp(&other.tag_rank())
            .then_with(|| self.payload_key().cmp(&other.payload_key()))
    }
}

impl PartialOrd for InvariantTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Returns whether exactly one member of the exclusive-or is active.
pub fn xor_check(xor: &InvariantTerm, active: &BTreeSet<InvariantTerm>) -> Result<bool, ModelError> {
    let InvariantTerm::Xor(members) = xor else {
        return Err(ModelError::NotAnXor);
    };
    if active.iter().any(|a| !members.contains(a)) {
        return Err(ModelError::NotAMember);
    }
    Ok(active.len() == 1)
}

/// Conjunction of `key ==> value` implications with unique keys.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<(ComponentId, ComponentValue)>", into = "Vec<(ComponentId, ComponentValue)>")]
pub struct BeMap {
    entries: Vec<(ComponentId, ComponentValue)>,
}

impl BeMap {
    pub fn new(entries: Vec<(ComponentId, ComponentValue)>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for (k, _) in &entries {
            if !seen.insert(k) {
                return Err(ModelError::DuplicateKey(k.clone()));
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &ComponentId) -> Option<&ComponentValue> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// Lookup by raw key name.
    pub fn get_str(&self, key: &str) -> Option<&ComponentValue> {
        self.entries
            .iter()
            .find(|(k, _)| k.as_str() == key)
            .map(|(_, v)| v)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.get_str(key).is_some()
    }

    pub fn entries(&self) -> &[(ComponentId, ComponentValue)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn premises(&self) -> BTreeSet<InvariantTerm> {
        self.entries
            .iter()
            .map(|(k, _)| InvariantTerm::Atom(Atom::Component(k.clone())))
            .collect()
    }

    pub fn conclusions(&self) -> BTreeSet<InvariantTerm> {
        self.entries
            .iter()
            .map(|(_, v)| InvariantTerm::Atom(Atom::Value(v.clone())))
            .collect()
    }

    pub fn elements(&self) -> BTreeSet<InvariantTerm> {
        let mut all = self.premises();
        all.extend(self.conclusions());
        all
    }

    /// The map as a formula; `None` for the empty map.
    pub fn to_term(&self) -> Option<InvariantTerm> {
        let terms: Vec<_> = self
            .entries
            .iter()
            .map(|(k, v)| {
                InvariantTerm::implies(
                    InvariantTerm::Atom(Atom::Component(k.clone())),
                    InvariantTerm::Atom(Atom::Value(v.clone())),
                )
            })
            .collect();
        InvariantTerm::big_and(terms).ok()
    }
}

impl TryFrom<Vec<(ComponentId, ComponentValue)>> for BeMap {
    type Error = ModelError;

    fn try_from(entries: Vec<(ComponentId, ComponentValue)>) -> Result<Self, Self::Error> {
        BeMap::new(entries)
    }
}

impl From<BeMap> for Vec<(ComponentId, ComponentValue)> {
    fn from(m: BeMap) -> Self {
        m.entries
    }
}

/// Binding of symbolic variables (state names) to integers.
pub type Binding = HashMap<String, i64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scalar", content = "value", rename_all = "snake_case")]
pub enum SymbolicScalar {
    Constant(i64),
    /// Refers to the time of a state specification, e.g. `"Active"`.
    Variable(String),
    Addition(Vec<SymbolicScalar>),
}

impl SymbolicScalar {
    pub fn sum(operands: Vec<SymbolicScalar>) -> Result<Self, ModelError> {
        if operands.len() < 2 {
            return Err(ModelError::TooFewTerms("Addition", 2));
        }
        Ok(SymbolicScalar::Addition(operands))
    }

    pub fn eval(&self, binding: &Binding) -> Result<i64, ModelError> {
        match self {
            SymbolicScalar::Constant(n) => Ok(*n),
            SymbolicScalar::Variable(v) => binding
                .get(v)
                .copied()
                .ok_or_else(|| ModelError::UnboundVariable(v.clone())),
            SymbolicScalar::Addition(ops) => ops.iter().try_fold(0i64, |acc, op| Ok(acc + op.eval(binding)?)),
        }
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            SymbolicScalar::Constant(_) => {}
            SymbolicScalar::Variable(v) => {
                out.insert(v.as_str());
            }
            SymbolicScalar::Addition(ops) => ops.iter().for_each(|op| op.collect_vars(out)),
        }
    }
}

/// Duration expressed as the difference `scalar - start`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeDuration {
    pub start: SymbolicScalar,
    pub scalar: SymbolicScalar,
}

impl TimeDuration {
    /// `var` → `var + delta`, the shape every station rule uses.
    pub fn offset_from(var: &str, delta: i64) -> Self {
        let v = SymbolicScalar::Variable(var.to_string());
        TimeDuration {
            start: v.clone(),
            scalar: SymbolicScalar::Addition(vec![v, SymbolicScalar::Constant(delta)]),
        }
    }

    pub fn value(&self, binding: &Binding) -> Result<i64, ModelError> {
        Ok(self.scalar.eval(binding)? - self.start.eval(binding)?)
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut vars = self.start.variables();
        vars.extend(self.scalar.variables());
        vars
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeDurationRange {
    pub minimum: TimeDuration,
    pub maximum: TimeDuration,
}

impl TimeDurationRange {
    pub fn offsets_from(var: &str, min: i64, max: i64) -> Self {
        TimeDurationRange {
            minimum: TimeDuration::offset_from(var, min),
            maximum: TimeDuration::offset_from(var, max),
        }
    }
}

/// Effect follows cause after an exact delay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalCorrelation {
    pub cause: DeviceState,
    pub duration: TimeDuration,
    pub effect: DeviceState,
}

/// Effect occurs (or, when `inverse`, must not occur) within a window
/// relative to the cause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalConstraint {
    pub cause: DeviceState,
    pub range: TimeDurationRange,
    pub effect: DeviceState,
    #[serde(default)]
    pub inverse: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialRelation {
    Disjoint,
    Touching,
    Overlapping,
    Contains,
}

impl SpatialRelation {
    pub fn between(a: &Box3D, b: &Box3D) -> Self {
        if a.overlaps(b) {
            match a.intersection(b) {
                Some(i) if i == *a || i == *b => SpatialRelation::Contains,
                _ => SpatialRelation::Overlapping,
            }
        } else if a.intersection(b).is_some() {
            SpatialRelation::Touching
        } else {
            SpatialRelation::Disjoint
        }
    }
}

/// Edge annotation payloads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "relationship", rename_all = "snake_case")]
pub enum Relationship {
    Correlation(TemporalCorrelation),
    Constraint(TemporalConstraint),
    /// Plain delay such as "alarm follows smoke after 1 s".
    Delay { millis: i64 },
    Spatial { relation: SpatialRelation },
}

impl Relationship {
    pub fn name(&self) -> &'static str {
        match self {
            Relationship::Correlation(_) => "correlation",
            Relationship::Constraint(_) => "constraint",
            Relationship::Delay { .. } => "delay",
            Relationship::Spatial { .. } => "spatial",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeAnn {
    pub source: ComponentId,
    pub target: ComponentId,
    pub annotation: Option<Relationship>,
}

impl EdgeAnn {
    pub fn plain(source: ComponentId, target: ComponentId) -> Self {
        EdgeAnn {
            source,
            target,
            annotation: None,
        }
    }

    pub fn annotated(source: ComponentId, target: ComponentId, annotation: Relationship) -> Self {
        EdgeAnn {
            source,
            target,
            annotation: Some(annotation),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<EdgeAnn>", into = "Vec<EdgeAnn>")]
pub struct AnnotatedGraph {
    edges: Vec<EdgeAnn>,
}

impl AnnotatedGraph {
    pub fn new(edges: Vec<EdgeAnn>) -> Result<Self, ModelError> {
        let mut g = AnnotatedGraph::default();
        for e in edges {
            g.push(e)?;
        }
        Ok(g)
    }

    /// Parallel edges are allowed only when their annotations differ.
    pub fn push(&mut self, edge: EdgeAnn) -> Result<(), ModelError> {
        if self.edges.contains(&edge) {
            return Err(ModelError::DuplicateEdge {
                from: edge.source,
                target: edge.target,
            });
        }
        self.edges.push(edge);
        Ok(())
    }

    pub fn edges(&self) -> &[EdgeAnn] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn nodes(&self) -> BTreeSet<ComponentId> {
        self.edges
            .iter()
            .flat_map(|e| [e.source.clone(), e.target.clone()])
            .collect()
    }

    pub fn edges_from<'a>(&'a self, node: &'a ComponentId) -> impl Iterator<Item = &'a EdgeAnn> + 'a {
        self.edges.iter().filter(move |e| &e.source == node)
    }

    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm over the node set.
        let nodes: Vec<_> = self.nodes().into_iter().collect();
        let index = |id: &ComponentId| nodes.binary_search(id).expect("node present");
        let mut indegree = vec![0usize; nodes.len()];
        for e in &self.edges {
            indegree[index(&e.target)] += 1;
        }
        let mut ready: Vec<usize> = (0..nodes.len()).filter(|&i| indegree[i] == 0).collect();
        let mut visited = 0;
        while let Some(n) = ready.pop() {
            visited += 1;
            for e in self.edges.iter().filter(|e| index(&e.source) == n) {
                let t = index(&e.target);
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    ready.push(t);
                }
            }
        }
        visited == nodes.len()
    }
}

impl TryFrom<Vec<EdgeAnn>> for AnnotatedGraph {
    type Error = ModelError;

    fn try_from(edges: Vec<EdgeAnn>) -> Result<Self, Self::Error> {
        AnnotatedGraph::new(edges)
    }
}

impl From<AnnotatedGraph> for Vec<EdgeAnn> {
    fn from(g: AnnotatedGraph) -> Self {
        g.edges
    }
}

/// `(owner, time, new state)` triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateChange<S> {
    pub owner: ComponentId,
    pub timepoint: TimePoint,
    pub state: S,
}

impl<S> StateChange<S> {
    pub fn as_tuple(&self) -> (&ComponentId, TimePoint, &S) {
        (&self.owner, self.timepoint, &self.state)
    }
}
