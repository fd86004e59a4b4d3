//! The simulator and the monitor on separate threads, joined by a channel.

use std::error::Error;
use std::sync::mpsc;
use std::thread;

use capdispenser::monitor::{Monitor, MonitorConfig};
use capdispenser::sim::{nominal_script, simulate_into, SimConfig};
use capdispenser::station::{build_catalog, TopologyName};

pub fn run() -> Result<(), Box<dyn Error>> {
    let (tx, rx) = mpsc::channel();
    let producer = thread::spawn(move || {
        let catalog = build_catalog();
        simulate_into(&catalog, &SimConfig::default(), &nominal_script(3), &[], |e| {
            tx.send(e).expect("monitor hung up");
        })
        .map(|state| state.caps_delivered)
    });

    let catalog = build_catalog();
    let mut monitor = Monitor::for_catalog(&catalog, &TopologyName::ALL, &MonitorConfig::default())?;
    let mut end = None;
    let mut decided = 0;
    for event in rx {
        end = Some(event.timepoint);
        for v in monitor.ingest(event)? {
            decided += 1;
            if v.outcome.is_violation() {
                println!("{:?} on {} -> {}", v.outcome, v.rule.source, v.rule.target);
            }
        }
    }
    let tail = monitor.finalize(end.unwrap_or_default());
    let delivered = producer.join().expect("simulator thread")?;
    println!("{decided} verdicts while streaming, {} at the end, {delivered} caps delivered", tail.len());
    Ok(())
}

fn main() {
    run().expect("streaming_monitor");
}
