use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use uwa_harness::{config::ExperimentConfig, experiment, ingest};

#[derive(Parser)]
#[command(
    name = "uwa-harness",
    about = "Monte-Carlo experiment harness for the ZP-OFDM impulsive-noise receiver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulated experiment described by a TOML config.
    Run {
        /// Experiment configuration (TOML).
        config: PathBuf,
        /// Override the output CSV path from the config.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Number of trials to execute in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run the front-ends and receiver on a recorded waveform.
    Ingest {
        /// Raw f32 waveform (with its sidecar .toml header).
        waveform: PathBuf,
        /// Experiment configuration (TOML).
        config: PathBuf,
        /// Reference payload ('0'/'1' text) to score BER against.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Override the output CSV path from the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a configuration file and report every violation.
    Validate {
        /// Experiment configuration (TOML).
        config: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, ExitCode> {
    ExperimentConfig::load(path).map_err(|e| {
        eprintln!("config error: {e}");
        ExitCode::from(2)
    })
}

fn finish(rows: &[experiment::MetricsRow], out: &PathBuf) -> ExitCode {
    if let Err(e) = experiment::write_csv(rows, out) {
        eprintln!("output error: {e}");
        return ExitCode::from(3);
    }
    for s in experiment::summarize(rows) {
        let ber = s
            .mean_ber
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "-".into());
        let snr = s
            .mean_snr_db
            .map(|v| format!("{v:.2} dB"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<10} blocks={:<5} mean BER={ber:<10} mean SNR={snr}",
            s.frontend, s.blocks
        );
    }
    println!("wrote {} rows to {}", rows.len(), out.display());
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output,
            jobs,
        } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match experiment::run_experiment(&cfg, jobs) {
                Ok(rows) => finish(&rows, &output.unwrap_or(cfg.output_path)),
                Err(e) => {
                    eprintln!("run failed: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Ingest {
            waveform,
            config,
            reference,
            output,
        } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match ingest::ingest_waveform(&cfg, &waveform, reference.as_deref()) {
                Ok(rows) => finish(&rows, &output.unwrap_or(cfg.output_path)),
                Err(e) => {
                    eprintln!("ingest failed: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Validate { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let errs = cfg.validation_errors();
            if errs.is_empty() {
                println!("configuration is valid");
                ExitCode::SUCCESS
            } else {
                for e in &errs {
                    eprintln!("invalid: {e}");
                }
                ExitCode::from(2)
            }
        }
    }
}
