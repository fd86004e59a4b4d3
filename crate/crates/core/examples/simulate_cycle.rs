//! One eject/pick/place cycle through the simulator, printed as a trace.

use std::error::Error;

use capdispenser::sim::{nominal_script, simulate, SimConfig};
use capdispenser::station::build_catalog;
use capdispenser::wire::write_trace;

pub fn run() -> Result<(), Box<dyn Error>> {
    let catalog = build_catalog();
    let (state, trace) = simulate(&catalog, &SimConfig::default(), &nominal_script(1), &[])?;
    for e in &trace {
        println!("{e}");
    }
    println!(
        "delivered {} cap(s), {} left in the stack, clock {}",
        state.caps_delivered, state.stack_count, state.clock
    );
    let mut jsonl = Vec::new();
    write_trace(&mut jsonl, &trace)?;
    println!("{} bytes of JSON lines", jsonl.len());
    Ok(())
}

fn main() {
    run().expect("simulate_cycle");
}
