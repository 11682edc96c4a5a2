use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use symvqe::config::{preset, resolve_seed, ExperimentConfig, PRESET_NAMES, SEED_ENV};
use symvqe::experiment::run_experiment;
use symvqe::trace::{format_report, Trace};

#[derive(Parser)]
#[command(name = "symvqe", version, about = "Symmetry-sector ground states by variational minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its trace.
    Run {
        /// key=value config file; layered over --preset when both are given.
        config: Option<PathBuf>,
        /// Start from a shipped experiment.
        #[arg(long)]
        preset: Option<String>,
        /// Overrides the config seed and SYMVQE_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the trace output path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print a trace file as a table.
    Report { trace: PathBuf },
    /// List shipped presets, or print one as a config file.
    Presets { name: Option<String> },
}

fn load_config(config: Option<PathBuf>, preset_name: Option<String>) -> Result<ExperimentConfig> {
    let base = preset_name.as_deref().map(preset).transpose()?;
    match (config, base) {
        (Some(path), base) => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse(&text, base).with_context(|| format!("in {}", path.display()))
        }
        (None, Some(base)) => Ok(base),
        (None, None) => bail!("give a config file, --preset NAME, or both"),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            preset,
            seed,
            output,
        } => {
            let mut cfg = load_config(config, preset)?;
            let env = std::env::var(SEED_ENV).ok();
            resolve_seed(&mut cfg, seed, env.as_deref())?;
            if let Some(path) = output {
                cfg.output_path = path;
            }
            let outcome = run_experiment(&cfg)?;
            let last = outcome.vqe.last();
            println!("trace         {}", cfg.output_path.display());
            if let Some(path) = cfg.theta_path.as_ref().filter(|_| outcome.trained.is_some()) {
                println!("theta         {}", path.display());
            }
            println!("iterations    {}", outcome.vqe.traces.len());
            println!("energy        {:.10}", last.energy);
            println!("energy_error  {:.3e}", last.energy_error);
            println!("fidelity      {:.6}", last.fidelity);
            if let Some(t) = &outcome.trained {
                println!("trained_error {:.3e}", t.achieved_mean_error);
            }
        }
        Command::Report { trace } => {
            let text = std::fs::read_to_string(&trace).with_context(|| format!("reading {}", trace.display()))?;
            let parsed = Trace::parse(&text).with_context(|| format!("in {}", trace.display()))?;
            print!("{}", format_report(&parsed));
        }
        Command::Presets { name: None } => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
        }
        Command::Presets { name: Some(name) } => {
            for (k, v) in preset(&name)?.to_kv() {
                println!("{k}={v}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
