use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cacm::harness::{
    bounds_table, emit_csv, run_experiment, selftest, ExperimentConfig, RateCurve, BOUNDS_HEADER,
};

#[derive(Parser)]
#[command(name = "cacm", version, about = "Correlation-aware cache-aided coded multicast simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo experiment and write simulated rates.
    Simulate(RunArgs),
    /// Evaluate the closed-form bounds on the configured memory grid.
    Bounds(RunArgs),
    /// Simulated rates with the matching bound columns.
    Compare(RunArgs),
    /// Check the worked instances.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    parallel: Option<usize>,
    /// Write the conflict graph of the first trial at each memory point as DOT.
    #[arg(long)]
    dump_graphs: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::from_path(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if self.out.is_some() {
            cfg.output = self.out.clone();
        }
        if self.parallel.is_some() {
            cfg.parallel = self.parallel;
        }
        if self.dump_graphs.is_some() {
            cfg.dump_graphs = self.dump_graphs.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_curve(curve: &RateCurve, cfg: &ExperimentConfig) -> Result<()> {
    match &cfg.output {
        Some(path) => emit_csv(curve, path)?,
        None => print!("{}", curve.to_csv()?),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.load()?;
            write_curve(&run_experiment(&cfg)?.without_bounds(), &cfg)
        }
        Command::Compare(args) => {
            let cfg = args.load()?;
            write_curve(&run_experiment(&cfg)?, &cfg)
        }
        Command::Bounds(args) => {
            let cfg = args.load()?;
            let mut text = format!("{BOUNDS_HEADER}\n");
            for row in bounds_table(&cfg)? {
                text.push_str(&row.csv_line());
                text.push('\n');
            }
            match &cfg.output {
                Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Selftest => {
            let checks = selftest()?;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().any(|c| !c.passed) {
                bail!("selftest failed");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
