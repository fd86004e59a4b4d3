//! Sensor boxes from the measurement table and the pairwise overlap check.

use std::error::Error;

use capdispenser::ia::DeviceKind;
use capdispenser::model::{Box3D, ComponentId};
use capdispenser::monitor::check_spatial;
use capdispenser::station::{build_catalog, measurements, sensor_boxes};

pub fn run() -> Result<(), Box<dyn Error>> {
    for (name, mm) in measurements::table() {
        println!("{name:<40} {mm:>5} mm");
    }
    let mut catalog = build_catalog();
    for (id, b) in sensor_boxes(&catalog) {
        println!("{id}: {:?}-{:?}, {} mm3", b.min_corner(), b.max_corner(), b.volume());
    }
    println!("overlaps: {}", check_spatial(&catalog).overlaps().count());

    // A badly placed extra sensor shows up immediately.
    let stray = ComponentId::new("Stray Sensor")?;
    catalog.set_location(&stray, DeviceKind::Sensor, Box3D::from_anchor(60, 200, 10, 10, 10, 10)?);
    for p in check_spatial(&catalog).overlaps() {
        println!("{} overlaps {} by {} mm3", p.device_a, p.device_b, p.shared_volume);
    }
    Ok(())
}

fn main() {
    run().expect("occupancy");
}
