//! Acceptance checks, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the terminal.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use capdispenser::ia::{ACTIVE, OBSTRUCTED};
use capdispenser::model::{ComponentValue, ModelError, TemporalConstraint, TemporalCorrelation, TimeDuration, TimeDurationRange};
use capdispenser::monitor::{check_rules, check_spatial, compile_rules, MonitorConfig, Outcome, Semantics};
use capdispenser::sim::{Command as SimCommand, SimConfig};
use capdispenser::station::{build_catalog, extend_sensor_box, ids, retract_sensor_box, sensor_boxes, TopologyName};
use capdispenser::wire::{edge_to_value, write_trace};
use capdispenser::{
    simulate, AnnotatedGraph, BeMap, Box3D, CommandScript, ComponentId, DeviceKind, DeviceState, EdgeAnn, Relationship,
    Signal, TimePoint,
};
use common::{device, fixture, oracle, random_rules, random_trace, rng};
use rand::Rng;
use serde_json::Value;

type Check = Result<String, String>;

fn ensure(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(limit: Duration, started: Instant) -> Result<Duration, String> {
    let took = started.elapsed();
    ensure(took < limit, format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_capdispenser"))
}

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

/// Runs `simulate | monitor` as two processes joined by a pipe.
fn pipeline(sim_args: &[&str], monitor_args: &[&str]) -> Result<(i32, Value), String> {
    let mut sim = bin()
        .arg("simulate")
        .args(sim_args)
        .args(["--out", "-"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let monitor = bin()
        .arg("monitor")
        .args(["--trace", "-", "--report", "-"])
        .args(monitor_args)
        .stdin(sim.stdout.take().unwrap())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .output()
        .map_err(|e| e.to_string())?;
    let sim_status = sim.wait().map_err(|e| e.to_string())?;
    ensure(sim_status.success(), "simulate failed")?;
    let report = serde_json::from_slice(&monitor.stdout).map_err(|e| e.to_string())?;
    Ok((monitor.status.code().unwrap_or(-1), report))
}

fn criterion_1() -> Check {
    let started = Instant::now();
    let c = build_catalog();
    let cases = [
        (TopologyName::ProcessSequence, "process_sequence_edge.json"),
        (TopologyName::Causality, "causality_edge.json"),
        (TopologyName::Avoidance, "avoidance_edge.json"),
    ];
    for (name, file) in cases {
        let expected: Value = serde_json::from_str(&fixture(file)).map_err(|e| e.to_string())?;
        let edge = c.topology(name).documented_edges().next().ok_or("no documented edge")?;
        let got = edge_to_value(edge).map_err(|e| e.to_string())?;
        ensure(got == expected, format!("{file} differs"))?;
    }
    let took = within(Duration::from_secs(1), started)?;
    Ok(format!("3 edges structurally equal to fixtures in {took:?}"))
}

fn criterion_2() -> Check {
    let c = build_catalog();
    let (ext, ret) = (extend_sensor_box(), retract_sensor_box());
    ensure(ext == Box3D::new(53, 198, 4, 85, 208, 20), format!("extend box {ext}"))?;
    ensure(ret == Box3D::new(53, 312, 4, 85, 322, 20), format!("retract box {ret}"))?;
    ensure(ext.volume() == 5120 && ret.volume() == 5120, "volumes")?;
    ensure(!ext.overlaps(&ret) && !ret.overlaps(&ext), "sensor boxes overlap")?;
    let sensors = sensor_boxes(&c);
    ensure(sensors.get(&ComponentId::new(ids::STACK_EJECTOR_EXTENDED).unwrap()) == Some(&ext), "catalog extend box")?;
    ensure(sensors.get(&ComponentId::new(ids::STACK_EJECTOR_RETRACTED).unwrap()) == Some(&ret), "catalog retract box")?;

    // Devices whose geometry is documented, checked pairwise without exclusions.
    let documented: Vec<_> = c
        .located_devices()
        .into_iter()
        .filter(|(id, _)| !c.synthetic_geometry.contains(id))
        .collect();
    for (i, (a, ba)) in documented.iter().enumerate() {
        for (b, bb) in &documented[i + 1..] {
            ensure(!ba.overlaps(bb), format!("{a} overlaps {b}"))?;
        }
    }
    let overlaps = check_spatial(&c).overlaps().count();
    ensure(overlaps == 0, format!("{overlaps} overlaps in full catalog"))?;
    Ok(format!(
        "boxes {ext} and {ret}, 5120 mm3 each, {} documented boxes disjoint",
        documented.len()
    ))
}

fn criterion_3() -> Check {
    let started = Instant::now();
    let nominal = scenario("nominal.jsonl");
    let (code, report) = pipeline(&["--scenario", &nominal], &["--topology", "all"])?;
    let verdicts = report.as_array().ok_or("report is not an array")?;
    let violated = |v: &&Value| v["outcome"].as_str().is_some_and(|o| o.starts_with("Violated"));
    ensure(code == 0, format!("nominal exit {code}"))?;
    ensure(!verdicts.is_empty(), "nominal run produced no verdicts")?;
    ensure(verdicts.iter().filter(violated).count() == 0, "nominal run has violations")?;

    let faults = scenario("ejector_slow.json");
    let (code, report) = pipeline(&["--scenario", &nominal, "--faults", &faults], &["--topology", "all"])?;
    let verdicts = report.as_array().ok_or("report is not an array")?;
    ensure(code == 1, format!("fault exit {code}"))?;
    let on_edge = |v: &&Value| {
        v["rule"]["topology"] == "causality"
            && v["rule"]["source"] == ids::STACK_EJECTOR_EXTEND
            && v["rule"]["target"] == ids::STACK_EJECTOR_RETRACTED
    };
    let edge_obligations: Vec<_> = verdicts.iter().filter(on_edge).collect();
    let bad: Vec<_> = verdicts.iter().filter(violated).collect();
    ensure(!edge_obligations.is_empty(), "no obligations on the ejector edge")?;
    ensure(bad == edge_obligations, "violations differ from the ejector edge obligations")?;
    ensure(
        bad.iter().all(|v| v["outcome"] == "ViolatedLate" || v["outcome"] == "ViolatedMissing"),
        "wrong violation kind",
    )?;
    let took = within(Duration::from_secs(1), started)?;
    Ok(format!(
        "nominal clean; fault violates exactly {} ejector obligations; {took:?}",
        bad.len()
    ))
}

fn criterion_4() -> Check {
    let started = Instant::now();
    let mut r = rng(0x0AC1E);
    let mut outcomes: BTreeMap<Outcome, usize> = BTreeMap::new();
    let mut events = 0;
    let mut negative = 0;
    let mut inverse = 0;
    const TRACES: usize = 500;
    for i in 0..TRACES {
        let len = r.gen_range(0..=1000);
        let trace = random_trace(&mut r, len);
        let nrules = r.gen_range(1..=6);
        let rules = random_rules(&mut r, nrules);
        negative += rules.iter().filter(|x| x.min < 0).count();
        inverse += rules.iter().filter(|x| x.inverse).count();
        let sem = if i % 5 == 4 { Semantics::StateHolds } else { Semantics::EventOccurrence };
        let cfg = MonitorConfig {
            semantics: sem,
            ..MonitorConfig::default()
        };
        let mut got = check_rules(rules.clone(), None, &trace, &cfg).map_err(|e| e.to_string())?;
        let mut want = oracle(&rules, &trace, sem);
        let key = |v: &capdispenser::Verdict| serde_json::to_string(v).unwrap();
        got.sort_by_key(key);
        want.sort_by_key(key);
        ensure(got == want, format!("trace {i} ({len} events, {sem:?}) differs"))?;
        for v in &got {
            *outcomes.entry(v.outcome).or_default() += 1;
        }
        events += len;
    }
    ensure(outcomes.len() == 6, format!("not every outcome exercised: {outcomes:?}"))?;
    ensure(negative > 0 && inverse > 0, "generator lacks negative or inverse windows")?;
    let took = within(Duration::from_secs(60), started)?;
    let total: usize = outcomes.values().sum();
    Ok(format!(
        "{TRACES} traces, {events} events, {total} verdicts identical; {negative} negative-min and {inverse} inverse rules; {took:?}"
    ))
}

fn random_script(r: &mut impl Rng) -> CommandScript {
    let mut t = 0;
    let n = r.gen_range(0..80);
    let commands = (0..n)
        .map(|_| {
            t += r.gen_range(0..400);
            SimCommand {
                time: TimePoint(t),
                actuator: ComponentId::new(ids::ACTUATORS[r.gen_range(0..ids::ACTUATORS.len())]).unwrap(),
                signal: if r.gen_bool(0.5) { Signal::High } else { Signal::Low },
            }
        })
        .collect();
    CommandScript::new(commands).unwrap()
}

fn criterion_5() -> Check {
    let mut r = rng(5);
    let cid = |s: &str| ComponentId::new(s).unwrap();

    // Maps.
    let elon = BeMap::new(vec![
        (cid("Name"), ComponentValue::str("Elon Musk")),
        (cid("Address"), ComponentValue::str("Mars")),
    ])
    .map_err(|e| e.to_string())?;
    ensure(elon.get(&cid("Address")) == Some(&ComponentValue::str("Mars")), "Address lookup")?;
    let dup = BeMap::new(vec![
        (cid("Address"), ComponentValue::str("Mars")),
        (cid("Address"), ComponentValue::str("Earth")),
    ]);
    ensure(dup == Err(ModelError::DuplicateKey(cid("Address"))), "duplicate key accepted")?;
    for _ in 0..200 {
        let keys: BTreeSet<String> = (0..r.gen_range(0..8)).map(|_| format!("k{}", r.gen_range(0..20))).collect();
        let entries: Vec<_> = keys.iter().map(|k| (cid(k), ComponentValue::Int(r.gen_range(-9..9)))).collect();
        let m = BeMap::new(entries.clone()).map_err(|e| e.to_string())?;
        let back: BeMap = serde_json::from_str(&serde_json::to_string(&m).unwrap()).map_err(|e| e.to_string())?;
        ensure(back == m && entries.iter().all(|(k, v)| m.get(k) == Some(v)), "map round trip")?;
    }

    // Boxes.
    for _ in 0..2000 {
        let mut b = || {
            let (x, y, z) = (r.gen_range(0..10), r.gen_range(0..10), r.gen_range(0..10));
            Box3D::from_anchor(x, y, z, r.gen_range(0..6), r.gen_range(0..6), r.gen_range(0..6)).unwrap()
        };
        let (a, c) = (b(), b());
        ensure(a.overlaps(&c) == c.overlaps(&a), "overlap not symmetric")?;
        ensure(a.overlaps(&a) == (a.volume() > 0), "overlap not reflexive")?;
        ensure(a.overlaps(&c) == (a.shared_volume(&c) > 0), "overlap disagrees with shared volume")?;
        let (_, hi) = (a.min_corner(), a.max_corner());
        let touching = Box3D::from_anchor(hi.0, a.min_corner().1, a.min_corner().2, 2, 2, 2).unwrap();
        ensure(!a.overlaps(&touching), "touching faces overlap")?;
    }

    // Simulator: exclusion, determinism, conservation.
    let cat = build_catalog();
    let exclusive = [
        (ids::STACK_EJECTOR_EXTENDED, ids::STACK_EJECTOR_RETRACTED),
        (ids::LOADER_PICKED_UP, ids::LOADER_DROPPED_OFF),
    ];
    let mut traces = 0;
    for i in 0..200u64 {
        let script = random_script(&mut r);
        let mut config = SimConfig {
            seed: i,
            initial_stack: (i % 6) as u32,
            ..SimConfig::default()
        };
        config.latencies.jitter_ms = (i % 30) as i64;
        let (state, a) = simulate(&cat, &config, &script, &[]).map_err(|e| e.to_string())?;
        let (_, b) = simulate(&cat, &config, &script, &[]).map_err(|e| e.to_string())?;
        let (mut ba, mut bb) = (Vec::new(), Vec::new());
        write_trace(&mut ba, &a).unwrap();
        write_trace(&mut bb, &b).unwrap();
        ensure(ba == bb, "simulator not deterministic")?;
        ensure(state.caps_accounted() == config.initial_stack, "caps not conserved")?;
        let mut last: BTreeMap<&str, &str> = BTreeMap::new();
        for e in &a {
            if e.kind == DeviceKind::Sensor {
                last.insert(e.device.as_str(), e.state.name.as_str());
            }
            for (x, y) in exclusive {
                let both = last.get(x) == Some(&OBSTRUCTED) && last.get(y) == Some(&OBSTRUCTED);
                ensure(!both, format!("{x} and {y} both obstructed at {}", e.timepoint))?;
            }
        }
        traces += 1;
    }

    // Correlation against the equivalent point window.
    for _ in 0..100 {
        let trace = random_trace(&mut r, 300);
        let delta = r.gen_range(-2..3);
        let (src, dst) = (device(r.gen_range(0..4)), device(r.gen_range(0..4)));
        let cause = DeviceState::abstract_state(ACTIVE);
        let effect = DeviceState::abstract_state(OBSTRUCTED);
        let corr = Relationship::Correlation(TemporalCorrelation {
            cause: cause.clone(),
            duration: TimeDuration::offset_from(ACTIVE, delta),
            effect: effect.clone(),
        });
        let cons = Relationship::Constraint(TemporalConstraint {
            cause,
            range: TimeDurationRange::offsets_from(ACTIVE, delta * 1000, delta * 1000),
            effect,
            inverse: false,
        });
        let cfg = MonitorConfig::default();
        let verdicts = |rel| {
            let g = AnnotatedGraph::new(vec![EdgeAnn::annotated(src.clone(), dst.clone(), rel)]).unwrap();
            check_rules(compile_rules("t", &g, &cfg).unwrap(), None, &trace, &cfg).unwrap()
        };
        ensure(verdicts(corr) == verdicts(cons), "correlation differs from point constraint")?;
    }
    Ok(format!("maps, 2000 box pairs, {traces} simulator traces, 100 correlation checks"))
}

fn criterion_6() -> Check {
    let nominal = scenario("nominal.jsonl");
    let faults = scenario("ejector_slow.json");
    let (code, _) = pipeline(&["--scenario", &nominal], &["--topology", "causality"])?;
    ensure(code == 0, format!("nominal exit {code}"))?;
    let (code, _) = pipeline(&["--scenario", &nominal, "--faults", &faults], &["--topology", "causality"])?;
    ensure(code == 1, format!("fault exit {code}"))?;

    let feed = |args: &[&str], input: &[u8]| -> Result<i32, String> {
        let mut child = bin()
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| e.to_string())?;
        child.stdin.take().unwrap().write_all(input).map_err(|e| e.to_string())?;
        Ok(child.wait().map_err(|e| e.to_string())?.code().unwrap_or(-1))
    };
    let malformed: [(&[&str], &[u8]); 5] = [
        (&["monitor", "--trace", "-"], b"{\"type\":"),
        (&["monitor", "--trace", "-", "--topology", "nonsense"], b""),
        (&["simulate", "--scenario", "-", "--out", "-"], b"not json\n"),
        (&["monitor", "--bogus-flag"], b""),
        (&["model", "dump", "--format", "dot"], b""),
    ];
    for (args, input) in malformed {
        let code = feed(args, input)?;
        ensure(code == 2, format!("{args:?} exited {code}"))?;
    }
    Ok("nominal 0, fault 1, five malformed or usage cases 2".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 6] = [
        ("golden edge fixtures", criterion_1),
        ("sensor geometry", criterion_2),
        ("nominal and fault runs", criterion_3),
        ("streaming equals reference", criterion_4),
        ("property suites", criterion_5),
        ("CLI exit codes", criterion_6),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
