use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use orvi::experiment::{presets, run_experiment, verify::verify, ExperimentConfig, RunOptions, StageError};
use orvi::Error;

#[derive(Parser)]
#[command(name = "orvi", version, about = "Data-driven value iteration for linear output regulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunFlags {
    /// Directory for CSVs, report.json and manifest.json.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Poison the model-side plant matrices with NaN.
    #[arg(long)]
    blinded: bool,
    /// Reserved; every run is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Model-side checks of a config (or preset name).
    Verify { config: String },
    /// Built-in experiments.
    Preset {
        #[command(subcommand)]
        command: PresetCommand,
    },
}

#[derive(Subcommand)]
enum PresetCommand {
    List,
    /// Print a preset's TOML.
    Show {
        name: String,
    },
    Run {
        name: String,
        #[command(flatten)]
        flags: RunFlags,
    },
}

const EXIT_RANK: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;
const EXIT_CONFIG: u8 = 4;

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Rank { .. } => EXIT_RANK,
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        Error::Config(_) | Error::Dimension { .. } | Error::Grid(_) | Error::Polynomial(_) => EXIT_CONFIG,
        _ => 1,
    }
}

fn load_config(arg: &str) -> Result<ExperimentConfig, Error> {
    if presets::source(arg).is_some() {
        return presets::load(arg);
    }
    let text = std::fs::read_to_string(arg).map_err(|e| Error::Config(format!("{arg}: {e}")))?;
    ExperimentConfig::from_toml(&text)
}

fn run(cfg: &ExperimentConfig, flags: &RunFlags) -> ExitCode {
    let opts = RunOptions { out_dir: Some(flags.out_dir.clone()), blinded: flags.blinded };
    match run_experiment(cfg, &opts) {
        Ok(out) => {
            let r = &out.report;
            for s in &r.stages {
                println!("{:<10} {:<6} {}", s.stage, s.status, s.detail);
            }
            if let Some(o) = &r.oracle {
                if let Some(g) = o.gain_error {
                    println!("gain error vs oracle: {g:.3e}");
                }
                if let Some(e) = o.e_rho_error {
                    println!("E_rho error vs oracle: {e:.3e}");
                }
            }
            println!("outputs in {}", flags.out_dir.display());
            match &r.vi {
                Some(v) if !v.converged => ExitCode::from(EXIT_NONCONVERGENCE),
                _ => ExitCode::SUCCESS,
            }
        }
        Err(StageError { stage, source, report }) => {
            for s in &report.stages {
                println!("{:<10} {:<6} {}", s.stage, s.status, s.detail);
            }
            eprintln!("error in stage `{stage}`: {source}");
            ExitCode::from(error_code(&source))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, flags } => {
            match std::fs::read_to_string(&config)
                .map_err(|e| Error::Config(format!("{}: {e}", config.display())))
                .and_then(|t| ExperimentConfig::from_toml(&t))
            {
                Ok(cfg) => run(&cfg, &flags),
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(error_code(&e))
                }
            }
        }
        Command::Verify { config } => match load_config(&config) {
            Ok(cfg) => {
                let rep = verify(&cfg);
                for c in &rep.checks {
                    let tag = match (c.passed, c.required) {
                        (true, _) => "pass",
                        (false, true) => "FAIL",
                        (false, false) => "note",
                    };
                    let val = match (c.value, c.threshold) {
                        (Some(v), Some(t)) => format!(" [{v:.3e} vs {t:.1e}]"),
                        _ => String::new(),
                    };
                    println!("{tag:<5} {}{val} {}", c.name, c.detail);
                }
                if rep.all_passed {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(error_code(&e))
            }
        },
        Command::Preset { command } => match command {
            PresetCommand::List => {
                for (name, desc) in presets::list() {
                    println!("{name:<28} {desc}");
                }
                ExitCode::SUCCESS
            }
            PresetCommand::Show { name } => match presets::source(&name) {
                Some(t) => {
                    print!("{t}");
                    ExitCode::SUCCESS
                }
                None => {
                    eprintln!("unknown preset `{name}`");
                    ExitCode::from(EXIT_CONFIG)
                }
            },
            PresetCommand::Run { name, flags } => match presets::load(&name) {
                Ok(cfg) => run(&cfg, &flags),
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(error_code(&e))
                }
            },
        },
    }
}
