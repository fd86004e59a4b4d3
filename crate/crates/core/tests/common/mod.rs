//! Shared helpers: a whole-trace reference checker and random generators.
#![allow(dead_code)]

use capdispenser::ia::{ACTIVE, OBSTRUCTED, PASSIVE, UNOBSTRUCTED};
use capdispenser::monitor::{Outcome, Rule, RuleRef, Semantics, Verdict};
use capdispenser::{ComponentId, DeviceKind, DeviceState, PhysicalEvent, Signal, TimePoint};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// Reference verdicts computed from the complete trace with no streaming
/// state. Each obligation is judged by scanning every event.
pub fn oracle(rules: &[Rule], trace: &[PhysicalEvent], semantics: Semantics) -> Vec<Verdict> {
    let end = trace.last().map_or(0, |e| e.timepoint.0);
    let mut out = Vec::new();
    for (ri, rule) in rules.iter().enumerate() {
        for (c, cause) in trace.iter().enumerate() {
            if cause.device != rule.id.source || !rule.cause.matches(&cause.state) {
                continue;
            }
            let tc = cause.timepoint.0;
            let (lo, hi) = (tc + rule.min, tc + rule.max);
            let is_effect = |e: &PhysicalEvent| e.device == rule.id.target && rule.effect.matches(&e.state);
            let expiry = (c..trace.len()).find(|&j| trace[j].timepoint.0 > hi);
            let expiry_time = match expiry {
                Some(m) => Some(trace[m].timepoint.0),
                None if hi <= end => Some(end),
                None => None,
            };
            let decision = match semantics {
                Semantics::EventOccurrence => {
                    let in_window = (0..trace.len())
                        .find(|&j| j != c && is_effect(&trace[j]) && (lo..=hi).contains(&trace[j].timepoint.0));
                    if let Some(w) = in_window {
                        let outcome = if rule.inverse { Outcome::ViolatedForbidden } else { Outcome::Satisfied };
                        Some((outcome, Some(w), tc.max(trace[w].timepoint.0)))
                    } else {
                        expiry_time.map(|at| {
                            if rule.inverse {
                                return (Outcome::Satisfied, None, at);
                            }
                            let early = (c + 1..trace.len()).find(|&j| is_effect(&trace[j]) && trace[j].timepoint.0 < lo);
                            match (early, expiry) {
                                (Some(e), _) => (Outcome::ViolatedEarly, Some(e), at),
                                (None, Some(m)) if m != c && is_effect(&trace[m]) => (Outcome::ViolatedLate, Some(m), at),
                                _ => (Outcome::ViolatedMissing, None, at),
                            }
                        })
                    }
                }
                Semantics::StateHolds => expiry_time.map(|at| {
                    let on_target = |j: &usize| trace[*j].device == rule.id.target;
                    let establishing = (0..trace.len()).filter(on_target).filter(|&j| trace[j].timepoint.0 <= lo).last();
                    let inside: Vec<usize> = (0..trace.len())
                        .filter(on_target)
                        .filter(|&j| trace[j].timepoint.0 > lo && trace[j].timepoint.0 <= hi)
                        .collect();
                    let holds_at_lo = establishing.is_some_and(|j| rule.effect.matches(&trace[j].state));
                    let first_bad = inside.iter().copied().find(|&j| !rule.effect.matches(&trace[j].state));
                    let first_good = inside.iter().copied().find(|&j| rule.effect.matches(&trace[j].state));
                    if rule.inverse {
                        if holds_at_lo {
                            (Outcome::ViolatedForbidden, establishing, at)
                        } else if first_good.is_some() {
                            (Outcome::ViolatedForbidden, first_good, at)
                        } else {
                            (Outcome::Satisfied, None, at)
                        }
                    } else if holds_at_lo && first_bad.is_none() {
                        (Outcome::Satisfied, establishing, at)
                    } else {
                        (Outcome::ViolatedMissing, first_bad.or(establishing), at)
                    }
                }),
            };
            let (outcome, witness, at) = decision.unwrap_or((Outcome::Pending, None, end));
            out.push((
                at,
                ri,
                c,
                Verdict {
                    rule: rule.id.clone(),
                    cause_index: c as u64,
                    cause_event: cause.clone(),
                    window: (TimePoint(lo), TimePoint(hi)),
                    outcome,
                    witness: witness.map(|j| trace[j].clone()),
                    decided_at: TimePoint(at),
                },
            ));
        }
    }
    out.sort_by_key(|(at, ri, c, _)| (*at, *ri, *c));
    out.into_iter().map(|(_, _, _, v)| v).collect()
}

pub const DEVICES: [&str; 4] = ["A", "B", "C", "D"];
const NAMES: [&str; 4] = [ACTIVE, PASSIVE, OBSTRUCTED, UNOBSTRUCTED];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn device(i: usize) -> ComponentId {
    ComponentId::new(DEVICES[i]).unwrap()
}

fn concrete(rng: &mut impl Rng) -> DeviceState {
    let sig = if rng.gen_bool(0.5) { Signal::High } else { Signal::Low };
    DeviceState::new(NAMES[rng.gen_range(0..NAMES.len())], sig)
}

fn spec(rng: &mut impl Rng) -> DeviceState {
    let s = concrete(rng);
    if rng.gen_bool(0.75) {
        s.to_abstract()
    } else {
        s
    }
}

/// Non-decreasing timestamps with frequent ties.
pub fn random_trace(rng: &mut impl Rng, len: usize) -> Vec<PhysicalEvent> {
    let mut t = rng.gen_range(0..100);
    (0..len)
        .map(|_| {
            t += if rng.gen_bool(0.2) { 0 } else { rng.gen_range(1..60) };
            let d = rng.gen_range(0..DEVICES.len());
            PhysicalEvent::new(device(d), DeviceKind::Sensor, TimePoint(t), concrete(rng)).unwrap()
        })
        .collect()
}

/// Windows may start before the cause, end before it, or be a single instant.
pub fn random_rules(rng: &mut impl Rng, count: usize) -> Vec<Rule> {
    (0..count)
        .map(|i| {
            let min = rng.gen_range(-400..400);
            let width = if rng.gen_bool(0.15) { 0 } else { rng.gen_range(0..500) };
            Rule {
                id: RuleRef {
                    topology: "random".into(),
                    edge: i,
                    source: device(rng.gen_range(0..DEVICES.len())),
                    target: device(rng.gen_range(0..DEVICES.len())),
                },
                cause: spec(rng),
                effect: spec(rng),
                min,
                max: min + width,
                inverse: rng.gen_bool(0.3),
            }
        })
        .collect()
}
