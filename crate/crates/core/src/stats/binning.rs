//! Log-binned densities and power-law exponent fits.

use crate::scalar::Scalar;

use super::regression::ols;
use super::StatsError;

pub const DEFAULT_BINS: usize = 50;

/// Histogram density over geometrically spaced bins.
///
/// Bin `i` is `[edges[i], edges[i + 1])`; the last bin also includes its right edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDistribution<T> {
    bin_edges: Vec<T>,
    counts: Vec<usize>,
    densities: Vec<T>,
    excluded_zeros: usize,
}

impl<T: Scalar> BinnedDistribution<T> {
    /// Wraps precomputed edges and densities, e.g. for synthetic inputs. Counts are
    /// unknown and reported as zero; a bin is non-empty when its density is positive.
    pub fn from_parts(bin_edges: Vec<T>, densities: Vec<T>) -> Result<Self, StatsError> {
        if bin_edges.len() != densities.len() + 1 || densities.is_empty() {
            return Err(StatsError::LengthMismatch(bin_edges.len(), densities.len()));
        }
        if bin_edges.windows(2).any(|e| !(e[0] < e[1])) || !(bin_edges[0] > T::zero()) {
            return Err(StatsError::DegenerateSupport);
        }
        if densities.iter().any(|d| !(*d >= T::zero())) {
            return Err(StatsError::InvalidValue("negative density".into()));
        }
        Ok(BinnedDistribution {
            counts: vec![0; densities.len()],
            bin_edges,
            densities,
            excluded_zeros: 0,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.densities.len()
    }

    pub fn bin_edges(&self) -> &[T] {
        &self.bin_edges
    }

    pub fn densities(&self) -> &[T] {
        &self.densities
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Zero weights left out of the histogram.
    pub fn excluded_zeros(&self) -> usize {
        self.excluded_zeros
    }

    /// Geometric mean of each bin's edges.
    pub fn centers(&self) -> Vec<T> {
        self.bin_edges
            .windows(2)
            .map(|e| (e[0] * e[1]).sqrt())
            .collect()
    }

    pub fn widths(&self) -> Vec<T> {
        self.bin_edges.windows(2).map(|e| e[1] - e[0]).collect()
    }

    /// Riemann sum of density times width; one for histograms built from data.
    pub fn total_mass(&self) -> T {
        self.densities
            .iter()
            .zip(self.widths())
            .map(|(&d, w)| d * w)
            .sum()
    }

    /// `(center, density)` of bins with positive density.
    pub fn support(&self) -> Vec<(T, T)> {
        self.centers()
            .into_iter()
            .zip(self.densities.iter().copied())
            .filter(|(_, d)| *d > T::zero())
            .collect()
    }
}

/// Geometric bin edges from `min` to `max` inclusive.
pub fn log_bin_edges<T: Scalar>(min: T, max: T, n_bins: usize) -> Vec<T> {
    let ratio = max / min;
    let n = T::count(n_bins);
    let mut edges: Vec<T> = (0..=n_bins)
        .map(|i| min * ratio.powf(T::count(i) / n))
        .collect();
    edges[0] = min;
    edges[n_bins] = max;
    edges
}

/// Density of positive `weights` over `n_bins` geometric bins spanning
/// `[min positive, max]`. Zeros are excluded and counted.
pub fn log_binned_density<T: Scalar>(
    weights: &[T],
    n_bins: usize,
) -> Result<BinnedDistribution<T>, StatsError> {
    if n_bins == 0 {
        return Err(StatsError::InvalidValue("n_bins must be positive".into()));
    }
    if let Some(bad) = weights
        .iter()
        .find(|w| !(**w >= T::zero()) || !w.is_finite())
    {
        return Err(StatsError::InvalidValue(format!(
            "weight {bad} is negative or not finite"
        )));
    }
    let positive: Vec<T> = weights.iter().copied().filter(|w| *w > T::zero()).collect();
    let excluded_zeros = weights.len() - positive.len();
    if positive.is_empty() {
        return Err(StatsError::NoPositiveSupport);
    }
    let min = positive.iter().copied().fold(T::infinity(), T::min);
    let max = positive.iter().copied().fold(T::neg_infinity(), T::max);
    if !(min < max) {
        return Err(StatsError::DegenerateSupport);
    }
    let edges = log_bin_edges(min, max, n_bins);
    if edges.windows(2).any(|e| !(e[0] < e[1])) {
        return Err(StatsError::DegenerateSupport);
    }

    let log_min = min.ln();
    let log_span = max.ln() - log_min;
    let mut counts = vec![0usize; n_bins];
    for &w in &positive {
        let guess = ((w.ln() - log_min) / log_span * T::count(n_bins))
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(n_bins - 1);
        let mut idx = guess;
        while idx > 0 && w < edges[idx] {
            idx -= 1;
        }
        while idx + 1 < n_bins && w >= edges[idx + 1] {
            idx += 1;
        }
        counts[idx] += 1;
    }

    let total = T::count(positive.len());
    let densities = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, e)| T::count(c) / (total * (e[1] - e[0])))
        .collect();
    Ok(BinnedDistribution {
        bin_edges: edges,
        counts,
        densities,
        excluded_zeros,
    })
}

/// Power-law density `exp(intercept) · w^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit<T> {
    pub alpha: T,
    /// Natural-log density at `ln w = 0`.
    pub intercept: T,
    pub r_squared: T,
    /// Bins used by the fit.
    pub points: usize,
}

impl<T: Scalar> PowerLawFit<T> {
    pub fn density_at(&self, w: T) -> T {
        (self.intercept + self.alpha * w.ln()).exp()
    }
}

/// Least squares on `(ln center, ln density)` over non-empty bins.
pub fn fit_power_law<T: Scalar>(
    dist: &BinnedDistribution<T>,
) -> Result<PowerLawFit<T>, StatsError> {
    let support = dist.support();
    if support.len() < 3 {
        return Err(StatsError::InsufficientSupport {
            need: 3,
            got: support.len(),
        });
    }
    let (xs, ys): (Vec<T>, Vec<T>) = support.iter().map(|(c, d)| (c.ln(), d.ln())).unzip();
    let fit = ols(&xs, &ys)?;
    Ok(PowerLawFit {
        alpha: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        points: support.len(),
    })
}

/// Continuous maximum-likelihood exponent with `x_min` fixed at the smallest
/// positive weight. `r_squared` measures the resulting line against the binned
/// points of `dist` and is clamped at zero.
pub fn fit_power_law_mle<T: Scalar>(
    weights: &[T],
    dist: &BinnedDistribution<T>,
) -> Result<PowerLawFit<T>, StatsError> {
    let positive: Vec<T> = weights.iter().copied().filter(|w| *w > T::zero()).collect();
    if positive.is_empty() {
        return Err(StatsError::NoPositiveSupport);
    }
    let x_min = positive.iter().copied().fold(T::infinity(), T::min);
    let log_sum: T = positive.iter().map(|&w| (w / x_min).ln()).sum();
    if !(log_sum > T::zero()) {
        return Err(StatsError::DegenerateSupport);
    }
    let exponent = T::one() + T::count(positive.len()) / log_sum;
    let intercept = (exponent - T::one()).ln() + (exponent - T::one()) * x_min.ln();
    let fit = PowerLawFit {
        alpha: -exponent,
        intercept,
        r_squared: T::zero(),
        points: positive.len(),
    };

    let support = dist.support();
    let n = T::count(support.len().max(1));
    let mean = support.iter().map(|(_, d)| d.ln()).sum::<T>() / n;
    let (mut ss_res, mut ss_tot) = (T::zero(), T::zero());
    for &(c, d) in &support {
        let y = d.ln();
        let r = y - (intercept + fit.alpha * c.ln());
        ss_res = ss_res + r * r;
        ss_tot = ss_tot + (y - mean) * (y - mean);
    }
    let r_squared = if ss_tot > T::zero() {
        (T::one() - ss_res / ss_tot).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    Ok(PowerLawFit { r_squared, ..fit })
}
