//! Evolves a shipped reference config into a run directory and prints its decay-rate table.
//!
//! `cargo run --release --example evolve_reference -- smalldata-Kminus1 /tmp/run`

use std::path::{Path, PathBuf};

use ssev::harness::{cmd_evolve, rates::rates_for_series};

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "smalldata-K0".into());
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join(format!("ssev-{name}")));
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.txt"));

    let run = cmd_evolve(&config, &out).expect("evolution failed");
    println!("{name}: t = {} after {} steps, {} records in {}", run.sim.t(), run.sim.steps, run.recorder.records.len(), out.display());
    let report = rates_for_series(|c| run.recorder.series(c), run.window());
    print!("{}", report.summary());
}
