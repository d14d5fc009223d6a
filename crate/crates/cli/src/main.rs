use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qmetro::harness::{self, HarnessError, NmrConfig, RunConfig};

#[derive(Parser)]
#[command(
    name = "qmetro",
    version,
    about = "Control-enhanced frequency estimation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured schemes over a time grid and write a CSV.
    Run {
        /// TOML config, or a result file carrying its resolved config.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write one `T QFI` data file per scheme next to the CSV.
        #[arg(long)]
        plot_data: bool,
    },
    /// Coherence time T2 = 1/(pi * linewidth).
    T2 {
        #[arg(long, allow_negative_numbers = true)]
        linewidth_hz: f64,
    },
    /// Standard vs control-enhanced schemes with linewidth-calibrated dephasing.
    Nmr {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            plot_data,
        } => {
            let mut cfg = RunConfig::parse(&harness::read_config_text(&config)?)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            harness::run_to_file(&cfg, out.as_deref(), plot_data)?;
        }
        Command::T2 { linewidth_hz } => {
            println!("{}", harness::t2_from_linewidth(linewidth_hz)?);
        }
        Command::Nmr { config, out, seed } => {
            let mut cfg = NmrConfig::parse(&harness::read_config_text(&config)?)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            harness::nmr_to_file(&cfg, out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
