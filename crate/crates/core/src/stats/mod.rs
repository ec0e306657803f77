//! Edge-weight distribution statistics: log-binned densities and power-law
//! fits, empirical CDFs and their crossing, kernel smoothing, and log-log
//! scaling between the two layers.

mod binning;
mod ecdf;
mod kernel;
mod regression;

use thiserror::Error;

pub use binning::{
    fit_power_law, fit_power_law_mle, log_bin_edges, log_binned_density, BinnedDistribution,
    PowerLawFit, DEFAULT_BINS,
};
pub use ecdf::{cdf_crossing, empirical_cdf, Crossing, EmpiricalCdf};
pub use kernel::{nadaraya_watson, silverman_bandwidth, Bandwidth, SmoothedCurve, Z_95};
pub use regression::{allometric_fit, ols, AllometricFit, LinearFit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("no positive support: every weight is zero")]
    NoPositiveSupport,
    #[error("degenerate support: zero-width span")]
    DegenerateSupport,
    #[error("insufficient support: need {need}, got {got}")]
    InsufficientSupport { need: usize, got: usize },
    #[error("empty input")]
    Empty,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("bandwidth must be positive and finite")]
    InvalidBandwidth,
    #[error("invalid value: {0}")]
    InvalidValue(String),
}
