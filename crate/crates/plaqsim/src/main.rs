use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use plaqsim::config::ExperimentConfig;
use plaqsim::{runner, verify, Error};

/// Exit codes: 0 success, 2 config error, 3 numeric/runtime error,
/// 4 acceptance failure.
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_ACCEPTANCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "plaqsim",
    about = "SU(2) plaquette-string simulation: spectra, Trotter evolution, noise, and mitigation"
)]
struct Cli {
    /// Experiment config file (TOML). Defaults to the built-in standard
    /// two-plaquette experiment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for data files; overrides the config's
    /// `outputs.directory` (default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the output format (csv or tsv).
    #[arg(long, global = true)]
    format: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact-diagonalization study: spectrum, gap, ground state.
    Spectrum,
    /// Noiseless and noisy Trotter evolution with the mitigation pipeline.
    Evolve,
    /// Build and export the readout calibration matrix.
    Calibrate,
    /// Run the acceptance checks.
    Verify,
    /// Print the built-in standard config as TOML.
    PrintConfig,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::standard(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(format) = &cli.format {
        config.outputs.format = format.clone();
    }
    config.validate()?;
    Ok(config)
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if matches!(cli.command, Command::Verify) {
        let mut failures = 0;
        for result in verify::all_checks() {
            println!("{}", result.line());
            if !result.passed {
                failures += 1;
            }
        }
        return if failures == 0 {
            println!("all acceptance criteria passed");
            ExitCode::SUCCESS
        } else {
            eprintln!("{failures} acceptance criteria failed");
            ExitCode::from(EXIT_ACCEPTANCE)
        };
    }

    if matches!(cli.command, Command::PrintConfig) {
        match ExperimentConfig::standard().to_toml() {
            Ok(text) => {
                print!("{text}");
                return ExitCode::SUCCESS;
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    }

    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out_dir: PathBuf = cli
        .out
        .clone()
        .or_else(|| config.outputs.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let outcome: Result<u8, Error> = match cli.command {
        Command::Spectrum => runner::run_spectrum(&config, &out_dir).map(|report| {
            println!(
                "energy density per plaquette: {:.6}",
                report.energy_density_per_plaquette
            );
            println!("physical-sector gap: {:.6}", report.gap);
            for check in &report.golden_checks {
                println!(
                    "[{}] {}: {:.6} (expected {:.6} +- {:.1e})",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.actual,
                    check.expected,
                    check.tolerance
                );
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if report.golden_checks.iter().all(|c| c.passed) {
                0
            } else {
                EXIT_ACCEPTANCE
            }
        }),
        Command::Evolve => runner::run_evolution(&config, &out_dir).map(|report| {
            println!(
                "{} grid cells processed, {} failed",
                report.cells.len(),
                report.failed.len()
            );
            for (t, n, e) in &report.failed {
                eprintln!("cell t = {t}, n_trot = {n}: {e}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if report.failed.is_empty() {
                0
            } else {
                EXIT_NUMERIC
            }
        }),
        Command::Calibrate => runner::run_calibrate(&config, &out_dir).map(|files| {
            for f in &files {
                println!("wrote {}", f.display());
            }
            0
        }),
        Command::Verify | Command::PrintConfig => unreachable!("handled above"),
    };

    match outcome {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
