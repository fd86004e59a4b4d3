//! Lists every device with its kind, pin, signal mapping and owning part.

use std::error::Error;

use capdispenser::ia::Signal;
use capdispenser::station::{build_catalog, TopologyName};

pub fn run() -> Result<(), Box<dyn Error>> {
    let catalog = build_catalog();
    for (id, kind) in &catalog.devices {
        let pin = catalog.gpio(id).map_or("-".to_string(), |p| p.to_string());
        let mapping = catalog
            .signal_mapping(id)
            .map(|m| format!("High={} Low={}", m.apply(Signal::High).unwrap().name, m.apply(Signal::Low).unwrap().name))
            .unwrap_or_default();
        let part = catalog.part_association(id).unwrap_or("");
        println!("{kind:<8} {id:<26} gpio {pin:>3}  {mapping:<36} {part}");
    }
    for name in TopologyName::ALL {
        let t = catalog.topology(name);
        println!("{name}: {} edges, {} documented", t.graph.len(), t.documented_edges().count());
    }
    Ok(())
}

fn main() {
    run().expect("describe_station");
}
