//! Run configuration: a flat JSON file, overridden by command-line flags,
//! validated once before any computation starts.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use collectikit::counts::DEFAULT_BOOTSTRAP;
use collectikit::optics::Fig2Setup;
use collectikit::states::CanonicalState;
use collectikit::witness::NormalizationPolicy;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Table1,
    WernerSweep,
    QualityScan,
    SimulateCounts,
    SetupSim,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Table1 => "table1",
            Experiment::WernerSweep => "werner-sweep",
            Experiment::QualityScan => "quality-scan",
            Experiment::SimulateCounts => "simulate-counts",
            Experiment::SetupSim => "setup-sim",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "collectikit",
    version,
    about = "Collectibility witness experiments on hyper-entangled photon pairs"
)]
pub struct Args {
    pub experiment: Experiment,
    /// Flat JSON file with any of the flag names as keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// bell, separable, mixed or werner:p
    #[arg(long)]
    pub state: Option<String>,
    /// joint, cond, cond-sym or basis
    #[arg(long)]
    pub policy: Option<String>,
    /// Witness weighting parameter in [0, 1].
    #[arg(long = "P", allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Visibility of a mixed degree of freedom, or the distinguishability τ for setup-sim.
    #[arg(long, allow_negative_numbers = true)]
    pub visibility: Option<f64>,
    /// Source pairs per setting; calibrated when absent.
    #[arg(long)]
    pub pairs: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bootstrap resamples.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub setup: Option<String>,
}

/// Keys accepted in the JSON config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub experiment: Option<Experiment>,
    pub state: Option<String>,
    pub policy: Option<String>,
    #[serde(rename = "P", alias = "p")]
    pub p: Option<f64>,
    pub visibility: Option<f64>,
    pub pairs: Option<u64>,
    pub seed: Option<u64>,
    pub bootstrap: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub setup: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

/// Validated configuration. Optional fields fall back to per-experiment defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub state: Option<CanonicalState>,
    pub policy: NormalizationPolicy,
    #[serde(rename = "P")]
    pub p: Option<f64>,
    pub visibility: Option<f64>,
    pub pairs: Option<u64>,
    pub seed: u64,
    pub bootstrap: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub setup: String,
}

impl RunConfig {
    pub fn from_args(args: Args) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        if let Some(e) = file.experiment {
            if e != args.experiment {
                log::info!(
                    "config file experiment `{e}` overridden by `{}`",
                    args.experiment
                );
            }
        }
        let state = args
            .state
            .or(file.state)
            .map(|s| CanonicalState::from_str(&s).map_err(CliError::input))
            .transpose()?;
        let policy = args
            .policy
            .or(file.policy)
            .map(|s| NormalizationPolicy::from_str(&s).map_err(CliError::input))
            .transpose()?
            .unwrap_or_default();
        let config = RunConfig {
            experiment: args.experiment,
            state,
            policy,
            p: args.p.or(file.p),
            visibility: args.visibility.or(file.visibility),
            pairs: args.pairs.or(file.pairs),
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            bootstrap: args
                .bootstrap
                .or(file.bootstrap)
                .unwrap_or(DEFAULT_BOOTSTRAP),
            format: args.format.or(file.format).unwrap_or_default(),
            out: args.out.or(file.out),
            setup: args
                .setup
                .or(file.setup)
                .unwrap_or_else(|| Fig2Setup::NAME.to_string()),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if let Some(s) = &self.state {
            s.validate().map_err(CliError::input)?;
        }
        unit("P", self.p)?;
        unit("visibility", self.visibility)?;
        if self.pairs == Some(0) {
            return Err(CliError::Input("pairs must be at least 1".into()));
        }
        if self.bootstrap < 2 {
            return Err(CliError::Input(format!(
                "bootstrap must be at least 2, got {}",
                self.bootstrap
            )));
        }
        Fig2Setup::by_name(&self.setup).map_err(CliError::input)?;
        Ok(())
    }
}

fn unit(name: &str, value: Option<f64>) -> CliResult<()> {
    match value {
        Some(x) if !(0.0..=1.0).contains(&x) => {
            Err(CliError::Input(format!("{name} = {x} is outside [0, 1]")))
        }
        _ => Ok(()),
    }
}
