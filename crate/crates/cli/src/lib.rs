//! Command-line front end: CSV ingestion, JSON run configurations, and the
//! `fit`, `predict`, `simulate`, `validate` and `generate` commands.
//!
//! Exit codes: 0 success, 1 usage, I/O or validation error, 2 a model did
//! not converge.

pub mod commands;
pub mod config;
pub mod error;
pub mod generate;
pub mod io;
pub mod report;

use std::ffi::OsString;
use std::io::IsTerminal;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use zigev_core::simulation::{ModelPreset, ScenarioPreset, DEFAULT_TAU_TRUE};

use crate::commands::{cmd_fit, cmd_predict, cmd_simulate, cmd_validate, output_dir, write_file};
use crate::config::{RunConfig, StudyConfig};
use crate::error::{exit, CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "zigev", version, about = "Zero-inflated GEV regression for binary data with immunes")]
pub struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit models to a CSV dataset described by a JSON config.
    Fit {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `fit.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Treat a failed identifiability check as an error.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated models, e.g. `m0,m1,m2`.
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
    },
    /// Predict probabilities for new rows from a saved fit report.
    Predict {
        /// `fit_report.json` written by `fit`.
        #[arg(long)]
        fit: PathBuf,
        /// CSV with the covariate columns used by the fit.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo study from a preset string or a JSON config.
    Simulate {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        /// e.g. `M1,Scenario1,n=500,N=50,seed=7`.
        #[arg(long)]
        preset: Option<String>,
        /// Overrides the study seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the identifiability of the configured specification.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Write a synthetic dataset as CSV.
    Generate {
        #[arg(long, value_enum, default_value = "dengue")]
        kind: DatasetKind,
        /// Scenario for the M1/M2 kinds.
        #[arg(long, default_value = "Scenario1")]
        scenario: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TAU_TRUE)]
        tau: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatasetKind {
    /// Synthetic look-alike of a 515-row dengue serology survey.
    Dengue,
    M1,
    M2,
}

fn color_enabled() -> bool {
    std::io::stdout().is_terminal() && std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty())
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {t} threads: {e}")))?;
    }
    match cli.command {
        Command::Fit {
            config,
            seed,
            strict,
            out,
            models,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.fit.seed = s;
            }
            if let Some(m) = models {
                cfg.models = m;
            }
            cfg.strict |= strict;
            let out = output_dir(out, cfg.output_dir.as_ref());
            cmd_fit(cfg, &out, color_enabled())
        }
        Command::Predict { fit, data, models, out } => {
            cmd_predict(&fit, &data, &models.unwrap_or_default(), &output_dir(out, None))
        }
        Command::Simulate {
            config,
            preset,
            seed,
            out,
        } => {
            let mut cfg = match (config, preset) {
                (Some(path), _) => StudyConfig::load(&path)?,
                (None, Some(p)) => StudyConfig::from_preset(&p)?,
                (None, None) => return Err(CliError::Usage("simulate needs --config or --preset".into())),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out = output_dir(out, cfg.output_dir.as_ref());
            cmd_simulate(cfg, &out)
        }
        Command::Validate { config, strict } => {
            let cfg = RunConfig::load(&config)?;
            cmd_validate(&cfg, strict || cfg.strict)
        }
        Command::Generate {
            kind,
            scenario,
            n,
            seed,
            tau,
            out,
        } => {
            let text = match kind {
                DatasetKind::Dengue => generate::synthetic_dengue(n.unwrap_or(515), seed)?,
                DatasetKind::M1 | DatasetKind::M2 => {
                    let model = if kind == DatasetKind::M1 { ModelPreset::M1 } else { ModelPreset::M2 };
                    let scenario: ScenarioPreset = scenario.parse()?;
                    generate::preset_dataset(model, scenario, n.unwrap_or(1000), tau, seed)?
                }
            };
            write_file(&out, &text)?;
            if kind == DatasetKind::Dengue {
                eprintln!("wrote SYNTHETIC dengue-like data to {}", out.display());
            }
            Ok(exit::SUCCESS)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::FAILURE } else { exit::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit::FAILURE
        }
    }
}
