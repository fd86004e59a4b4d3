//! Serializes the documented topology edges and parses them back.

use std::error::Error;

use capdispenser::station::{build_catalog, TopologyName};
use capdispenser::wire::{deserialize_edge, serialize_edge};

pub fn run() -> Result<(), Box<dyn Error>> {
    let catalog = build_catalog();
    for name in TopologyName::ALL {
        for edge in catalog.topology(name).documented_edges() {
            let text = serialize_edge(edge)?;
            println!("// {name}\n{text}");
            assert_eq!(&deserialize_edge(&text)?, edge);
        }
    }
    Ok(())
}

fn main() {
    run().expect("topology_json");
}
