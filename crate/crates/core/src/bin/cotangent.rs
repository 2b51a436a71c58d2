use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cotangent::scenario::{list_scenarios, run_scenario, RunOptions, ScenarioConfig, ScenarioId};

#[derive(Parser)]
#[command(version, about = "Constrained mechanics on the cotangent bundle and its quantization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a TOML config, or a built-in one with --scenario.
    Run {
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        scenario: Option<ScenarioId>,
        /// Print every check, including the parts of grouped checks.
        #[arg(short, long)]
        verbose: bool,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// List the available scenarios and what they exercise.
    ListScenarios {
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, output, seed, scenario, verbose, json } => {
            let loaded = match (&config, scenario) {
                (Some(path), _) => ScenarioConfig::load(path),
                (None, Some(id)) => Ok(ScenarioConfig::for_scenario(id)),
                (None, None) => {
                    eprintln!("error: give a config file or --scenario");
                    return ExitCode::from(2);
                }
            };
            let options = RunOptions { output_dir: output, seed, scenario };
            match loaded.and_then(|c| run_scenario(&c, &options)) {
                Ok(outcome) => {
                    if json {
                        match outcome.report.to_json() {
                            Ok(text) => println!("{text}"),
                            Err(e) => {
                                eprintln!("error: {e}");
                                return ExitCode::from(2);
                            }
                        }
                    } else {
                        print!("{}", outcome.report.to_text(verbose));
                        println!("outputs in {}", outcome.output_dir.display());
                    }
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::ListScenarios { json } => {
            let list = list_scenarios();
            if json {
                println!("{}", serde_json::to_string_pretty(&list).expect("listing serializes"));
            } else {
                for s in list {
                    println!("{:<18} {}", s.id, s.topics.join(", "));
                }
            }
            ExitCode::SUCCESS
        }
    }
}
