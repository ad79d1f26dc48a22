use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use muxmem::{execute, parse_config, CliError, Scenario};

/// Emit figure data for a temporally multiplexed DLCZ memory.
#[derive(Debug, Parser)]
#[command(name = "muxmem", version)]
struct Args {
    /// mode-sweep, max-modes, cavity-design, pulse-enhancement, echo,
    /// protocol-run, crosstalk, storage-decay or repeater-rate
    scenario: Scenario,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `rng_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `trials`.
    #[arg(long)]
    trials: Option<u64>,
}

fn run(args: Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let mut cfg = parse_config(&text)?;
    match cfg.scenario {
        Some(s) if s != args.scenario => {
            return Err(CliError::Config(format!(
                "config is for scenario `{s}` but `{}` was requested",
                args.scenario
            )))
        }
        _ => cfg.scenario = Some(args.scenario),
    }
    if let Some(out) = args.out {
        cfg.output_path = out;
    }
    if let Some(seed) = args.seed {
        cfg.rng_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;

    let workers = match std::env::var("MUXMEM_THREADS") {
        Ok(v) => Some(
            v.parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::Config(format!("MUXMEM_THREADS: `{v}` is not a positive integer")))?,
        ),
        Err(_) => None,
    };
    if let Some(n) = workers {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let written = execute(&cfg, workers)?;
    println!("{}", written.csv.display());
    println!("{}", written.summary.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("muxmem: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
