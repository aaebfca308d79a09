use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use marc_sim::experiment::{load_scenario, parse_variant, run_experiment, DEFAULT_EVAL_SLOTS};
use marc_sim::Error;

#[derive(Parser)]
#[command(name = "marc-sim", version, about = "Buffer-aided multiple-access relay channel simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train λ* and evaluate every sweep point of a scenario; write one CSV row per point and variant.
    ///
    /// Command-line flags take precedence over values in the scenario file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Master seed for evaluation and training.
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluation slots per run [file default: 1000000].
        #[arg(long)]
        slots: Option<u64>,
        /// Per-slot CSV trace of every evaluation run (large; use with few slots).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Comma-separated K_R:K_B pairs, e.g. 1:1,2:3.
        #[arg(long, value_delimiter = ',', value_parser = parse_variant)]
        variants: Option<Vec<(usize, usize)>>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let Cli { command } = Cli::parse();
    match command {
        Command::Simulate {
            config,
            out,
            seed,
            slots,
            trace,
            variants,
        } => match simulate(config, out, seed, slots, trace, variants) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}

fn simulate(
    config: PathBuf,
    out: PathBuf,
    seed: Option<u64>,
    slots: Option<u64>,
    trace: Option<PathBuf>,
    variants: Option<Vec<(usize, usize)>>,
) -> Result<(), Error> {
    let mut scenario = load_scenario(&config).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("cannot read {}: {io}", config.display())),
        other => other,
    })?;
    if let Some(seed) = seed {
        scenario = scenario.with_seed(seed);
    }
    if let Some(slots) = slots {
        if slots == 0 {
            return Err(Error::Config("--slots must be at least 1".into()));
        }
        scenario.eval_slots = slots;
    }
    if let Some(variants) = variants {
        scenario = scenario.with_variants(variants)?;
    }
    if scenario.eval_slots < DEFAULT_EVAL_SLOTS / 100 {
        log::warn!("only {} evaluation slots; results will be noisy", scenario.eval_slots);
    }
    for row in run_experiment(&scenario, &out, trace.as_deref())? {
        println!("{}", row.summary());
    }
    Ok(())
}
