//! `fosc`: confined-oscillator spectra, coherent states, statistics and
//! drive simulations written as deterministic CSV files.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use crate::config::{RunConfig, OUTPUT_DIR_ENV};

#[derive(Debug, Parser)]
#[command(name = "fosc", version, about = "Confined harmonic oscillator as an f-deformed oscillator")]
pub struct Cli {
    /// Flat key = value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config file and $FOSC_OUTPUT_DIR).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override a config entry, e.g. `--set m=2`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumKind {
    /// Closed-form levels of the tan² model potential.
    Model,
    /// Finite differences on the tan² model potential.
    ModelFd,
    /// Finite differences on the oscillator between hard walls.
    Hardwall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    Rectangular,
    Resonant,
    PointCharge,
    Tabulated,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels of a confined oscillator -> spectrum.csv
    Spectrum {
        #[arg(long, value_enum, default_value = "model")]
        kind: SpectrumKind,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        /// Well half-width.
        #[arg(long)]
        a: Option<f64>,
        #[arg(long, default_value_t = 2000)]
        grid_points: usize,
    },
    /// All 25 cells of the confined-oscillator comparison table -> table1.csv
    Table1 {
        #[arg(long, default_value_t = 2000)]
        grid_points: usize,
    },
    /// Curves for figure 1-4 -> figN.csv
    Fig {
        which: u8,
        #[arg(long, default_value_t = fosc::stats::DEFAULT_SWEEP_POINTS)]
        points: usize,
        /// Comma-separated a/l0 values.
        #[arg(long, value_delimiter = ',')]
        a: Vec<f64>,
        /// Comma-separated |beta|^2 values.
        #[arg(long, value_delimiter = ',')]
        beta_sq: Vec<f64>,
        /// Comma-separated quadrature phases in degrees.
        #[arg(long, value_delimiter = ',')]
        phi: Vec<f64>,
    },
    /// Propagator and S-matrix scale factors -> scales.csv
    Scales {
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[arg(long)]
        a: Option<f64>,
    },
    /// Fock coefficients of a nonlinear coherent state -> state.csv
    State {
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        beta_abs: Option<f64>,
        /// Degrees.
        #[arg(long)]
        beta_phase: Option<f64>,
    },
    /// Diagonal of the resolution-of-identity integral -> identity.csv
    Identity {
        #[arg(long)]
        a: Option<f64>,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value_t = 8)]
        panels: usize,
    },
    /// Drive field modes from the vacuum with a classical current -> drive.csv
    Drive {
        #[arg(long, value_enum)]
        profile: ProfileKind,
        /// Well half-width.
        #[arg(long)]
        a: Option<f64>,
        /// Current amplitude as `re` or `re,im`.
        #[arg(long, default_value = "1")]
        amplitude: String,
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
        #[arg(long, default_value_t = 1.0)]
        charge: f64,
        #[arg(long, default_value_t = 0.5)]
        velocity: f64,
        /// CSV with columns k,t,re,im for the tabulated profile.
        #[arg(long)]
        series: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        modes: usize,
        /// End time; defaults to the end of the current's support.
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long, default_value_t = 11)]
        samples: usize,
        /// Quantization volume; defaults to 2a.
        #[arg(long)]
        volume: Option<f64>,
    },
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<fosc::Error> for CliError {
    fn from(e: fosc::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(CliError::Usage)?,
        None => RunConfig::default(),
    };
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        if !dir.is_empty() {
            cfg.output_dir = PathBuf::from(dir);
        }
    }
    for kv in &cli.overrides {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim()).map_err(CliError::Usage)?;
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    cfg.validate().map_err(CliError::Usage)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve_config(&cli)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))?;
    }
    let path = commands::dispatch(&cli.command, &cfg)?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => {
                    eprintln!("error: {msg}\n");
                    eprintln!("{}", Cli::command().render_usage());
                }
                CliError::Numerical(msg) => eprintln!("numerical failure: {msg}"),
                CliError::Io(msg) => eprintln!("i/o failure: {msg}"),
            }
            ExitCode::from(e.code())
        }
    }
}
