//! Argument parsing and exit codes.
//!
//! Exit status: 0 success, 1 validation failure, 2 configuration or usage
//! error, 3 I/O or malformed input file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, ExperimentConfig};
use crate::io::{self, IoError};
use crate::run::{self, RunError};

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fsqpt",
    version,
    about = "Fluorescence-detected process tomography of excitonic dimers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// JSON config or run manifest; unset fields keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one config path, e.g. `--set dimer.coupling_j=100`. Repeatable.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    pub overrides: Vec<String>,
    /// Shorthand for `--set output_dir=DIR`.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Shorthand for `--set ensemble.seed=N`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Shorthand for `--set homogeneous_only=true`.
    #[arg(long)]
    pub homogeneous: bool,
}

impl ConfigArgs {
    fn load(&self, fallback: Option<PathBuf>) -> Result<ExperimentConfig, ConfigError> {
        let mut sets = self.overrides.clone();
        if let Some(d) = &self.output_dir {
            sets.push(format!(
                "output_dir={}",
                serde_json::Value::String(d.display().to_string())
            ));
        }
        if let Some(s) = self.seed {
            sets.push(format!("ensemble.seed={s}"));
        }
        if self.homogeneous {
            sets.push("homogeneous_only=true".into());
        }
        let path = self.config.clone().or(fallback);
        ExperimentConfig::load(path.as_deref(), &sets)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate signal and pathway tables for every Γ, plus the ground truth.
    Simulate(ConfigArgs),
    /// Invert the signal tables of a run directory back into χ(T).
    Reconstruct {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Run directory; defaults to the config's output_dir. Its
        /// manifest.json is used as the config when --config is absent.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Check Hermiticity, trace closure and Choi positivity of a tensor file.
    Validate {
        /// Tensor CSV, e.g. chi_truth.csv or chi_gamma_1.00.csv.
        tensor: PathBuf,
        /// Largest accepted defect; the Choi eigenvalue may dip to −tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
    /// Summarize a reconstructed run: residuals and agreement across Γ.
    Report {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Reconstructed run directory, as for `reconstruct`.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("{0}")]
    Validation(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Run(RunError::Io(e))
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(ConfigError::Read { .. }) => EXIT_IO,
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Run(RunError::Io(_)) => EXIT_IO,
            Failure::Run(_) => EXIT_CONFIG,
            Failure::Validation(_) => EXIT_VALIDATION,
        }
    }
}

/// Picks the run directory and its manifest for commands that read a run.
fn run_dir(cfg: &ConfigArgs, dir: &Option<PathBuf>) -> Result<(ExperimentConfig, PathBuf), Failure> {
    let manifest = dir.as_ref().map(|d| io::manifest_file(d)).filter(|m| m.exists());
    let c = cfg.load(manifest)?;
    let d = dir.clone().unwrap_or_else(|| c.output_dir.clone());
    if !d.is_dir() {
        return Err(IoError::Io {
            path: d,
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "run directory not found"),
        }
        .into());
    }
    Ok((c, d))
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    run::init_threads()?;
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.load(None)?;
            for f in run::simulate(&cfg)? {
                println!("{}", f.display());
            }
            Ok(())
        }
        Command::Reconstruct { cfg, dir } => {
            let (c, d) = run_dir(&cfg, &dir)?;
            let recs = run::reconstruct_dir(&c, &d)?;
            print!("{}", run::reconstruction_text(&c, &recs));
            Ok(())
        }
        Command::Validate { tensor, tolerance } => {
            if tolerance.is_nan() || tolerance <= 0.0 {
                return Err(RunError::Usage("--tolerance must be > 0".into()).into());
            }
            let v = run::validate_file(&tensor, tolerance)?;
            print!("{}", v.text());
            if v.passed() {
                Ok(())
            } else {
                Err(Failure::Validation(format!(
                    "{} failed validation at tolerance {tolerance:e}",
                    tensor.display()
                )))
            }
        }
        Command::Report { cfg, dir } => {
            let (c, d) = run_dir(&cfg, &dir)?;
            let s = run::summarize(&c, &d)?;
            let text = s.text();
            io::write_text(&d.join("summary.txt"), &text)?;
            print!("{text}");
            Ok(())
        }
    }
}

pub fn execute(cli: Cli) -> ExitCode {
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fsqpt: {e}");
            ExitCode::from(e.code())
        }
    }
}
