//! `transit-balance` subcommands.
//!
//! `build` ingests the input tables and writes one `network_<window>.json` per
//! window. `characterize` and `diagnose` read those files back, so they can be
//! rerun without re-ingesting. Each stage writes a `<stage>_summary.json` that
//! `report` turns into `report.md`.

mod build;
mod characterize;
mod diagnose;
mod files;
mod report;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::community::DEFAULT_SEED;
use crate::community::DEFAULT_SWEEP;
use crate::ingest::{IngestError, WindowSchedule};
use crate::stats::DEFAULT_BINS;

pub use build::{cmd_build, BuildSummary, NetworkSummary};
pub use characterize::{
    cmd_characterize, CharacterizeSummary, CurveSummary, LayerSummary, WindowCharacterization,
};
pub use diagnose::{cmd_diagnose, DiagnoseSummary, FlaggedEdge, WindowDiagnosis};
pub use files::{
    read_networks, write_network, EdgeRecord, NetworkFile, StopRecord, FORMAT_VERSION,
};
pub use report::cmd_report;

#[derive(Debug, Parser)]
#[command(
    name = "transit-balance",
    version,
    about = "Supply and demand imbalance analysis for bus networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the paired supply/demand networks, one per time window.
    Build(RunConfig),
    /// Weight distributions, CDFs, allometry, communities and modularity curves.
    Characterize(RunConfig),
    /// Flag bottleneck and waste edges and attribute them to lines.
    Diagnose(RunConfig),
    /// Collect the stage summaries into report.md.
    Report(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitMethod {
    Ols,
    Mle,
}

impl FitMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FitMethod::Ols => "ols",
            FitMethod::Mle => "mle",
        }
    }
}

/// Resolution sweep `lo:hi:n`, log-spaced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let (lo, hi, count) = DEFAULT_SWEEP;
        SweepSpec { lo, hi, count }
    }
}

impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts.as_slice() else {
            return Err(format!("expected lo:hi:n, got {s:?}"));
        };
        let lo: f64 = lo.trim().parse().map_err(|e| format!("lo: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("hi: {e}"))?;
        let count: usize = count.trim().parse().map_err(|e| format!("n: {e}"))?;
        if !(lo > 0.0 && lo.is_finite() && hi.is_finite() && hi >= lo) {
            return Err(format!("need 0 < lo <= hi, got {lo}:{hi}"));
        }
        if count == 0 {
            return Err("n must be at least 1".into());
        }
        Ok(SweepSpec { lo, hi, count })
    }
}

impl std::fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// stops.csv: stop_id,lat,lon
    #[arg(long)]
    pub stops: Option<PathBuf>,
    /// lines.csv: line_id,vehicles,trips_per_vehicle[,window:trips ...]
    #[arg(long)]
    pub lines: Option<PathBuf>,
    /// routes.csv: line_id,seq,stop_id
    #[arg(long)]
    pub routes: Option<PathBuf>,
    /// demand.csv: origin_stop,destination_stop,count[,hhmm]
    #[arg(long)]
    pub demand: Option<PathBuf>,
    /// Window schedule such as "02:00-05:00,05:00-08:00,...".
    #[arg(long)]
    pub windows: Option<String>,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// Resolution sweep lo:hi:n for the modularity curve.
    #[arg(long, default_value_t = SweepSpec::default())]
    pub sweep: SweepSpec,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Give edges present in only one layer weight zero in the other.
    #[arg(long)]
    pub zero_fill: bool,
    #[arg(long, value_enum, default_value_t = FitMethod::Ols)]
    pub fit: FitMethod,
    /// Also list cut edges that are neither bottleneck nor waste.
    #[arg(long)]
    pub verbose: bool,
}

impl RunConfig {
    /// Defaults with every input path unset.
    pub fn new(out: impl Into<PathBuf>) -> Self {
        RunConfig {
            stops: None,
            lines: None,
            routes: None,
            demand: None,
            windows: None,
            bins: DEFAULT_BINS,
            sweep: SweepSpec::default(),
            seed: DEFAULT_SEED,
            out: out.into(),
            zero_fill: false,
            fit: FitMethod::Ols,
            verbose: false,
        }
    }

    pub fn schedule(&self) -> Result<WindowSchedule, CliError> {
        match &self.windows {
            Some(spec) => Ok(spec.parse()?),
            None => Ok(WindowSchedule::default()),
        }
    }

    fn require<'a>(&self, path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
        path.as_deref()
            .ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] IngestError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    /// Nothing could be analyzed.
    #[error("{0}")]
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Degenerate(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Format {
            path: PathBuf::new(),
            message: e.to_string(),
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build(config) => cmd_build(&config).map(drop),
        Command::Characterize(config) => cmd_characterize(&config).map(drop),
        Command::Diagnose(config) => cmd_diagnose(&config).map(drop),
        Command::Report(config) => cmd_report(&config).map(drop),
    }
}
