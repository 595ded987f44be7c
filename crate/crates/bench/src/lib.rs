//! Criterion benchmarks for the engine live in `benches/`; this crate holds
//! the fixtures they share.

use std::path::Path;

use treelink::fragmenter::{
    fragment, generate_dataset, write_fragments, SensorDataSpec, DEFAULT_BASE,
};
use treelink::rdf::vocab;
use treelink::Triple;

pub fn dataset(count: usize) -> Vec<Triple> {
    generate_dataset(&SensorDataSpec {
        count,
        ..SensorDataSpec::default()
    })
    .expect("default spec is valid")
}

/// Writes `count` measurements split into `n` leaves under `dir`.
pub fn write_fixture(dir: &Path, count: usize, n: usize) -> SensorDataSpec {
    let spec = SensorDataSpec {
        count,
        ..SensorDataSpec::default()
    };
    let data = generate_dataset(&spec).expect("default spec is valid");
    let set = fragment(&data, n, vocab::SAREF_HAS_TIMESTAMP, DEFAULT_BASE).expect("n <= count");
    write_fragments(&set, dir).expect("writable temp dir");
    spec
}
