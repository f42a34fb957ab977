//! `qseal`: entanglement-seal simulator, monitor, and offline tools.

use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qseal_core::DecisionConfig;
use qseal::{config::RunConfig, run_monitor, run_source, tools};

#[derive(Parser)]
#[command(name = "qseal", version, about = "Tamper-indicating entanglement seal tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the source seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of windows.
    #[arg(long)]
    windows: Option<u32>,
    /// Override the transport host.
    #[arg(long)]
    host: Option<String>,
    /// Override the transport port.
    #[arg(long)]
    port: Option<u16>,
    /// Override the alarm log path.
    #[arg(long)]
    alarm_log: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig, qseal::Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.source.seed = seed;
        }
        if let Some(windows) = self.windows {
            cfg.windows = windows;
        }
        if let Some(host) = &self.host {
            cfg.wire.host = host.clone();
        }
        if let Some(port) = self.port {
            cfg.wire.port = port;
        }
        if let Some(path) = &self.alarm_log {
            cfg.output.alarm_log = path.display().to_string();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate detector windows and stream event packets over UDP.
    Simulate(ConfigArgs),
    /// Receive packets, estimate per window, and append to the alarm log.
    Monitor(ConfigArgs),
    /// Estimate the correlation parameter from coincidence totals.
    Estimate {
        #[arg(long, default_value_t = 0.0)]
        ksd: f64,
        #[arg(long, default_value_t = 0.0)]
        kss: f64,
        #[arg(long, default_value_t = 0.0)]
        kds: f64,
        #[arg(long, default_value_t = 0.0)]
        kdd: f64,
    },
    /// Write the ROC curve for an operating point as CSV.
    Roc {
        #[arg(long, default_value_t = 0.5)]
        e0: f64,
        #[arg(long, default_value_t = 0.8)]
        e1: f64,
        #[arg(long, default_value_t = 0.03)]
        sigma: f64,
        #[arg(long, default_value_t = 0.62)]
        epsilon: f64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn run() -> Result<(), qseal::Error> {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout();
    match cli.command {
        Command::Simulate(args) => run_source(&args.load()?),
        Command::Monitor(args) => run_monitor(args.load()?).map(|summary| {
            eprintln!(
                "processed {} windows, {} malformed packets",
                summary.records.len(),
                summary.malformed_packets
            );
        }),
        Command::Estimate { ksd, kss, kds, kdd } => {
            if [ksd, kss, kds, kdd].iter().any(|&k| k < 0.0 || !k.is_finite()) {
                return Err(qseal::Error::Config(
                    "coincidence totals must be non-negative".into(),
                ));
            }
            tools::tool_estimate(ksd, kss, kds, kdd, &mut stdout)
        }
        Command::Roc {
            e0,
            e1,
            sigma,
            epsilon,
            out,
        } => {
            let cfg = DecisionConfig {
                epsilon,
                e0,
                e1,
                sigma,
                min_coincidences: 0.0,
            };
            let mut csv = File::create(&out)?;
            tools::tool_roc(&cfg, &mut csv, &mut stdout)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
