//! Key/value maps as conjunctions of implications, plus XOR position sets.

use std::collections::BTreeSet;
use std::error::Error;

use capdispenser::ia::SpatialVariationSet;
use capdispenser::model::{xor_check, Atom, BeMap, ComponentId, ComponentValue, InvariantTerm};

fn id(s: &str) -> ComponentId {
    ComponentId::new(s).expect("non-empty")
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let person = BeMap::new(vec![
        (id("Name"), ComponentValue::str("Elon Musk")),
        (id("Address"), ComponentValue::str("Mars")),
    ])?;
    println!("Address -> {:?}", person.get(&id("Address")));
    println!("{} implications, {} distinct elements", person.len(), person.elements().len());

    let dup = BeMap::new(vec![
        (id("Address"), ComponentValue::str("Mars")),
        (id("Address"), ComponentValue::str("Earth")),
    ]);
    println!("duplicate key: {}", dup.unwrap_err());

    let ejector = SpatialVariationSet::new(
        "Stack Ejector",
        vec!["Retracted Position".into(), "Extended Position".into()],
    )?;
    let xor = ejector.to_term();
    let retracted = InvariantTerm::atom(Atom::Position("Retracted Position".into()));
    let extended = InvariantTerm::atom(Atom::Position("Extended Position".into()));
    let one: BTreeSet<_> = [retracted.clone()].into();
    let both: BTreeSet<_> = [retracted, extended].into();
    println!("one position holds: {}", xor_check(&xor, &one)?);
    println!("both positions hold: {}", xor_check(&xor, &both)?);
    Ok(())
}

fn main() {
    run().expect("bemap_basics");
}
