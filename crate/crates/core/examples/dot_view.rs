//! Causality graph coloured by the sensor states halfway through a cycle.

use std::error::Error;

use capdispenser::dot::{export_dot, last_states};
use capdispenser::model::TimePoint;
use capdispenser::sim::{nominal_script, simulate, SimConfig};
use capdispenser::station::{build_catalog, TopologyName};

pub fn run() -> Result<(), Box<dyn Error>> {
    let catalog = build_catalog();
    let (_, trace) = simulate(&catalog, &SimConfig::default(), &nominal_script(1), &[])?;
    let snapshot = last_states(trace.iter().filter(|e| e.timepoint <= TimePoint(3800)));
    print!("{}", export_dot(&catalog.topology(TopologyName::Causality).graph, &snapshot));
    Ok(())
}

fn main() {
    run().expect("dot_view");
}
