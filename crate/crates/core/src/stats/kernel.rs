//! Gaussian-kernel Nadaraya-Watson smoothing with a pointwise normal band.

use crate::scalar::{cmp, Scalar};

use super::StatsError;

/// Standard normal quantile for a two-sided 95% band.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth<T> {
    Fixed(T),
    /// Silverman's rule of thumb on the x sample, applied to `log10 x` when x
    /// is positive and spans more than two decades.
    Auto,
}

/// Smoothed estimate on a grid. `None` marks grid points where every kernel
/// weight underflowed.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedCurve<T> {
    pub grid: Vec<T>,
    pub mean: Vec<Option<T>>,
    pub ci_low: Vec<Option<T>>,
    pub ci_high: Vec<Option<T>>,
    pub bandwidth: T,
    /// Kernel distances were measured on `log10 x`.
    pub log_space: bool,
}

/// Silverman's rule: `0.9 · min(sd, IQR / 1.34) · n^(-1/5)`, falling back to
/// whichever spread is positive.
pub fn silverman_bandwidth<T: Scalar>(x: &[T]) -> Option<T> {
    if x.len() < 2 {
        return None;
    }
    let n = T::count(x.len());
    let mean = x.iter().copied().sum::<T>() / n;
    let var = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (n - T::one());
    let sd = var.sqrt();
    let mut sorted = x.to_vec();
    sorted.sort_by(cmp);
    let iqr = (quantile(&sorted, T::lit(0.75)) - quantile(&sorted, T::lit(0.25))) / T::lit(1.34);
    let spread = match (sd > T::zero(), iqr > T::zero()) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => return None,
    };
    Some(T::lit(0.9) * spread * n.powf(T::lit(-0.2)))
}

// Linear interpolation between order statistics.
fn quantile<T: Scalar>(sorted: &[T], q: T) -> T {
    let pos = q * T::count(sorted.len() - 1);
    let lo = pos.floor().to_usize().unwrap_or(0);
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - T::count(lo);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Kernel-weighted mean `m(g) = Σ K((g − x_i)/h) y_i / Σ K((g − x_i)/h)` with
/// `K(u) = exp(−u²/2)`, and band `m ± 1.96 · s(g) / √n_eff(g)` where `s²` is the
/// kernel-weighted residual variance and `n_eff = (ΣK)² / ΣK²`.
pub fn nadaraya_watson<T: Scalar>(
    x: &[T],
    y: &[T],
    bandwidth: Bandwidth<T>,
    grid: &[T],
) -> Result<SmoothedCurve<T>, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::InsufficientSupport {
            need: 2,
            got: x.len(),
        });
    }
    let (h, log_space) = match bandwidth {
        Bandwidth::Fixed(h) => (h, false),
        Bandwidth::Auto => {
            let (lo, hi) = x
                .iter()
                .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            let log_space = lo > T::zero() && hi / lo > T::lit(100.0);
            let sample: Vec<T> = if log_space {
                x.iter().map(|v| v.log10()).collect()
            } else {
                x.to_vec()
            };
            let h = silverman_bandwidth(&sample).ok_or(StatsError::InvalidBandwidth)?;
            (h, log_space)
        }
    };
    if !(h > T::zero()) || !h.is_finite() {
        return Err(StatsError::InvalidBandwidth);
    }
    let tx: Vec<T> = if log_space {
        x.iter().map(|v| v.log10()).collect()
    } else {
        x.to_vec()
    };
    let z = T::lit(Z_95);
    let half = T::lit(0.5);

    let mut mean = Vec::with_capacity(grid.len());
    let mut ci_low = Vec::with_capacity(grid.len());
    let mut ci_high = Vec::with_capacity(grid.len());
    for &g in grid {
        let g = if log_space { g.log10() } else { g };
        let weights: Vec<T> = tx
            .iter()
            .map(|&xi| {
                let u = (g - xi) / h;
                (-half * u * u).exp()
            })
            .collect();
        let sum_k: T = weights.iter().copied().sum();
        if !(sum_k > T::zero()) || !sum_k.is_finite() {
            mean.push(None);
            ci_low.push(None);
            ci_high.push(None);
            continue;
        }
        let m = weights.iter().zip(y).map(|(&k, &yi)| k * yi).sum::<T>() / sum_k;
        let var = weights
            .iter()
            .zip(y)
            .map(|(&k, &yi)| k * (yi - m) * (yi - m))
            .sum::<T>()
            / sum_k;
        let sum_k2: T = weights.iter().map(|&k| k * k).sum();
        let n_eff = sum_k * sum_k / sum_k2;
        let se = (var / n_eff).sqrt();
        mean.push(Some(m));
        ci_low.push(Some(m - z * se));
        ci_high.push(Some(m + z * se));
    }
    Ok(SmoothedCurve {
        grid: grid.to_vec(),
        mean,
        ci_low,
        ci_high,
        bandwidth: h,
        log_space,
    })
}
