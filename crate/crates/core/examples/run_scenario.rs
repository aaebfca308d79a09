//! Runs a scenario file through the library API and prints one line per
//! (sweep value, variant). Same pipeline as `marc-sim simulate`.
//!
//! cargo run --example run_scenario -- [scenario.toml] [eval_slots] [out.csv]

use std::path::PathBuf;

use marc_sim::experiment::{load_scenario, run_experiment};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/access_limits.toml"));
    let mut scenario = match load_scenario(&path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    };
    if let Some(slots) = args.next() {
        scenario.eval_slots = slots.parse().expect("eval_slots");
    }
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("marc_scenario.csv"));

    match run_experiment(&scenario, &out, None) {
        Ok(rows) => {
            for row in &rows {
                println!("{}", row.summary());
            }
            println!("{} rows written to {}", rows.len(), out.display());
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
