use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kcomb::config::RunConfig;
use kcomb::error::ErrorClass;

mod dsp;
mod report;
mod run;

#[derive(Debug, Parser)]
#[command(
    name = "kcomb",
    version,
    about = "Kerr microcomb steady states, quantum noise and photocurrent analysis"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Overrides the oracle and DSP seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the sweep and DSP analysis frequency, Hz.
    #[arg(long, global = true)]
    omega_hz: Option<f64>,
    /// Overrides `output_dir`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for data-parallel loops (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Oscillation threshold and first unstable sideband pair.
    Threshold { config: PathBuf },
    /// Pump sweep with branch tracking and intensity-noise columns.
    Sweep { config: PathBuf },
    /// Fock-space invariant suite.
    Oracle { config: PathBuf },
    /// Photocurrent processing.
    #[command(subcommand)]
    Dsp(DspCommand),
}

#[derive(Debug, Subcommand)]
pub enum DspCommand {
    /// Synthesize a correlated record and shot-noise calibration runs.
    Synth {
        config: PathBuf,
        /// Also write the record as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Fit shot-noise curves from calibration runs.
    Calibrate {
        config: PathBuf,
        #[arg(required = true)]
        runs: Vec<PathBuf>,
    },
    /// Balance, combine and normalize a record.
    Process {
        config: PathBuf,
        traces: PathBuf,
        #[arg(long)]
        calibration: PathBuf,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<kcomb::Error> for Failure {
    fn from(e: kcomb::Error) -> Self {
        let code = match e.class() {
            ErrorClass::Config => 1,
            ErrorClass::Domain => 2,
            ErrorClass::Numerical => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

/// Loads the configuration and applies command-line overrides.
pub fn load(path: &std::path::Path, g: &Global) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = g.seed {
        cfg.oracle.seed = seed;
        cfg.dsp.seed = seed;
    }
    if let Some(w) = g.omega_hz {
        cfg.sweep.omega_hz = w;
        cfg.dsp.omega_hz = w;
    }
    if let Some(d) = &g.out_dir {
        cfg.output_dir = d.clone();
    }
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    kcomb::par::with_threads(g.threads, || match &cli.command {
        Command::Threshold { config } => run::threshold(&load(config, g)?),
        Command::Sweep { config } => run::sweep(&load(config, g)?),
        Command::Oracle { config } => run::oracle(&load(config, g)?),
        Command::Dsp(cmd) => dsp::run(cmd, g),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
