//! Runs a scenario from a TOML file and prints its report, as the CLI does.
//!
//! cargo run --example run_config -- crates/core/configs/classical-charged.toml [output-dir]

use std::path::PathBuf;

use cotangent::scenario::{run_scenario, RunOptions, ScenarioConfig};

fn main() -> cotangent::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/classical-charged.toml"));
    let output_dir = Some(args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("cotangent-run")));

    let outcome = run_scenario(&ScenarioConfig::load(&config)?, &RunOptions { output_dir, ..Default::default() })?;
    print!("{}", outcome.report.to_text(true));
    for name in &outcome.report.outputs {
        println!("wrote {}", outcome.output_dir.join(name).display());
    }
    std::process::exit(outcome.exit_code());
}
