//! Checks a nominal and a slow-ejector run against every topology.

use std::error::Error;

use capdispenser::model::ComponentId;
use capdispenser::monitor::{check_trace, MonitorConfig};
use capdispenser::sim::{nominal_script, simulate, FaultSpec, SimConfig, Transition};
use capdispenser::station::{build_catalog, ids, TopologyName};

pub fn run() -> Result<(), Box<dyn Error>> {
    let catalog = build_catalog();
    let slow = FaultSpec::LatencyOverride {
        actuator: ComponentId::new(ids::STACK_EJECTOR_EXTEND)?,
        transition: Some(Transition::Activate),
        latency_ms: 350,
    };
    for (label, faults) in [("nominal", vec![]), ("slow ejector", vec![slow])] {
        let (_, trace) = simulate(&catalog, &SimConfig::default(), &nominal_script(2), &faults)?;
        println!("{label}:");
        for name in TopologyName::ALL {
            let verdicts = check_trace(&catalog, &catalog.topology(name).graph, name.as_str(), &trace, &MonitorConfig::default())?;
            let bad: Vec<_> = verdicts.iter().filter(|v| v.outcome.is_violation()).collect();
            println!("  {name}: {} verdicts, {} violations", verdicts.len(), bad.len());
            for v in bad {
                println!(
                    "    {:?} {} -> {} caused at {}, window [{}, {}]",
                    v.outcome, v.rule.source, v.rule.target, v.cause_event.timepoint, v.window.0, v.window.1
                );
            }
        }
    }
    Ok(())
}

fn main() {
    run().expect("monitor_trace");
}
