use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{log_spaced, louvain, modularity_curve, symmetrize, ModularityCurvePoint};
use crate::ingest::BuiltNetwork;
use crate::model::{Layer, PairedNetwork};
use crate::stats::{
    allometric_fit, cdf_crossing, empirical_cdf, fit_power_law, fit_power_law_mle,
    log_binned_density, nadaraya_watson, Bandwidth, BinnedDistribution, Crossing, EmpiricalCdf,
    PowerLawFit,
};

use super::files::{opt, write_csv, write_json};
use super::{read_networks, CliError, FitMethod, RunConfig};

const BAND_POINTS: usize = 512;

pub const CHARACTERIZE_SUMMARY: &str = "characterize_summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    pub layer: String,
    pub fit_method: String,
    pub alpha: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub fit_points: Option<usize>,
    pub excluded_zeros: Option<usize>,
    pub communities: Option<usize>,
    pub modularity: Option<f64>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllometrySummary {
    pub a: f64,
    pub beta: f64,
    pub r_squared: f64,
    pub n: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowCharacterization {
    pub window: String,
    pub slug: String,
    pub layers: Vec<LayerSummary>,
    /// `coincident`, `no crossing`, or the crossing weight.
    pub crossing: Option<String>,
    pub crossing_weight: Option<f64>,
    pub allometry: Option<AllometrySummary>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub resolution: f64,
    pub k: usize,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub layer: String,
    pub points: Vec<CurvePoint>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizeSummary {
    pub networks: Vec<WindowCharacterization>,
    pub curves: Vec<CurveSummary>,
}

/// Writes the distribution, CDF, allometry and community files of every
/// built network, and the modularity curves of the full-day network.
///
/// Degenerate layers are reported and skipped. Fails with
/// [`CliError::Degenerate`] only when no layer of any network has positive
/// support.
pub fn cmd_characterize(config: &RunConfig) -> Result<CharacterizeSummary, CliError> {
    let networks = read_networks(&config.out)?;
    let results: Vec<(WindowCharacterization, Vec<String>)> = networks
        .par_iter()
        .map(|b| characterize_network(b, config))
        .collect::<Result<_, _>>()?;

    let mut summary = CharacterizeSummary {
        networks: Vec::with_capacity(results.len()),
        curves: Vec::new(),
    };
    for (w, lines) in results {
        for line in lines {
            println!("{line}");
        }
        summary.networks.push(w);
    }
    if let Some(full) = networks.iter().find(|b| b.window.is_none()) {
        for layer in Layer::BOTH {
            let curve = curve_for(&full.network, layer, config)?;
            match (&curve.error, curve.points.first(), curve.points.last()) {
                (Some(e), _, _) => println!("[{}] {layer} modularity curve: {e}", full.slug()),
                (None, Some(first), Some(last)) => {
                    let best = curve
                        .points
                        .iter()
                        .max_by(|a, b| a.q.total_cmp(&b.q))
                        .expect("non-empty curve");
                    println!(
                        "[{}] {layer} modularity curve: {} points, k {}..{}, max q={:.4} at k={}",
                        full.slug(),
                        curve.points.len(),
                        first.k,
                        last.k,
                        best.q,
                        best.k
                    );
                }
                _ => println!("[{}] {layer} modularity curve: empty", full.slug()),
            }
            summary.curves.push(curve);
        }
    }
    write_json(&config.out.join(CHARACTERIZE_SUMMARY), &summary)?;

    let any_support = summary
        .networks
        .iter()
        .flat_map(|w| &w.layers)
        .any(|l| l.excluded_zeros.is_some());
    if !any_support {
        return Err(CliError::Degenerate(
            "no layer of any network has positive support".into(),
        ));
    }
    Ok(summary)
}

fn characterize_network(
    built: &BuiltNetwork<f64>,
    config: &RunConfig,
) -> Result<(WindowCharacterization, Vec<String>), CliError> {
    let slug = built.slug();
    let net = &built.network;
    let out = config.out.as_path();
    let mut printed = Vec::new();
    let mut layers = Vec::new();
    let mut cdfs: Vec<Option<EmpiricalCdf<f64>>> = Vec::new();
    for layer in Layer::BOTH {
        let (summary, cdf) = characterize_layer(net, layer, &slug, config)?;
        if let Some(alpha) = summary.alpha {
            printed.push(format!(
                "[{slug}] {layer} alpha={alpha:.4} r2={:.4} ({})",
                summary.r_squared.unwrap_or(f64::NAN),
                summary.fit_method
            ));
        }
        for e in &summary.errors {
            warn!("[{slug}] {layer}: {e}");
            printed.push(format!("[{slug}] {layer}: {e}"));
        }
        layers.push(summary);
        cdfs.push(cdf);
    }

    let mut errors = Vec::new();
    let (crossing, crossing_weight) = match (&cdfs[0], &cdfs[1]) {
        (Some(supply), Some(demand)) => match cdf_crossing(demand, supply) {
            Crossing::At(w) => (Some(w.to_string()), Some(w)),
            Crossing::None => (Some("no crossing".to_string()), None),
            Crossing::Coincident => (Some("coincident".to_string()), None),
        },
        _ => (None, None),
    };
    if let Some(c) = &crossing {
        printed.push(format!("[{slug}] crossing={c}"));
    }

    let allometry = match allometry(net, &slug, out) {
        Ok(a) => {
            printed.push(format!(
                "[{slug}] allometry a={:.4} beta={:.4} r2={:.4} n={}",
                a.a, a.beta, a.r_squared, a.n
            ));
            Some(a)
        }
        Err(e) => {
            let e = format!("allometry: {e}");
            warn!("[{slug}] {e}");
            printed.push(format!("[{slug}] {e}"));
            errors.push(e);
            None
        }
    };

    Ok((
        WindowCharacterization {
            window: built.label().to_string(),
            slug,
            layers,
            crossing,
            crossing_weight,
            allometry,
            errors,
        },
        printed,
    ))
}

fn characterize_layer(
    net: &PairedNetwork<f64>,
    layer: Layer,
    slug: &str,
    config: &RunConfig,
) -> Result<(LayerSummary, Option<EmpiricalCdf<f64>>), CliError> {
    let out = config.out.as_path();
    let mut summary = LayerSummary {
        layer: layer.to_string(),
        fit_method: config.fit.as_str().to_string(),
        alpha: None,
        intercept: None,
        r_squared: None,
        fit_points: None,
        excluded_zeros: None,
        communities: None,
        modularity: None,
        errors: Vec::new(),
    };
    let shares = match net.normalized_layer(layer) {
        Ok(s) => s,
        Err(e) => {
            summary.errors.push(e.to_string());
            return Ok((summary, None));
        }
    };

    let cdf = empirical_cdf(&shares).ok();
    if let Some(cdf) = &cdf {
        write_csv(
            &out.join(format!("cdf_{layer}_{slug}.csv")),
            &["weight", "cdf"],
            cdf.steps()
                .into_iter()
                .map(|(w, f)| [w.to_string(), f.to_string()]),
        )?;
    }

    match log_binned_density(&shares, config.bins) {
        Ok(dist) => {
            summary.excluded_zeros = Some(dist.excluded_zeros());
            let fit = match config.fit {
                FitMethod::Ols => fit_power_law(&dist),
                FitMethod::Mle => fit_power_law_mle(&shares, &dist),
            };
            let fit = match fit {
                Ok(f) => {
                    summary.alpha = Some(f.alpha);
                    summary.intercept = Some(f.intercept);
                    summary.r_squared = Some(f.r_squared);
                    summary.fit_points = Some(f.points);
                    Some(f)
                }
                Err(e) => {
                    summary.errors.push(format!("power-law fit: {e}"));
                    None
                }
            };
            write_distribution(
                &out.join(format!("dist_{layer}_{slug}.csv")),
                &dist,
                fit.as_ref(),
            )?;
        }
        Err(e) => summary.errors.push(format!("log-binned density: {e}")),
    }

    let partition = symmetrize(net, layer).and_then(|g| {
        let p = louvain(&g, 1.0, config.seed)?;
        Ok((g, p))
    });
    match partition {
        Ok((g, p)) => {
            summary.communities = Some(p.k());
            summary.modularity = Some(p.q());
            write_csv(
                &out.join(format!("communities_{layer}_{slug}.csv")),
                &["stop_id", "community_id"],
                g.node_ids()
                    .iter()
                    .zip(p.assignment())
                    .map(|(id, c)| [id.clone(), c.to_string()]),
            )?;
        }
        Err(e) => summary.errors.push(format!("communities: {e}")),
    }
    Ok((summary, cdf))
}

/// One row per bin. The band smooths `log10 density` over the non-empty bins.
fn write_distribution(
    path: &Path,
    dist: &BinnedDistribution<f64>,
    fit: Option<&PowerLawFit<f64>>,
) -> Result<(), CliError> {
    let centers = dist.centers();
    let (sx, sy): (Vec<f64>, Vec<f64>) = dist
        .support()
        .into_iter()
        .map(|(c, d)| (c, d.log10()))
        .unzip();
    let band = nadaraya_watson(&sx, &sy, Bandwidth::Auto, &centers).ok();
    let rows = centers.iter().enumerate().map(|(i, &c)| {
        let (lo, hi) = band.as_ref().map_or((None, None), |b| {
            (b.ci_low[i].map(exp10), b.ci_high[i].map(exp10))
        });
        [
            c.to_string(),
            dist.densities()[i].to_string(),
            opt(fit.map(|f| f.density_at(c))),
            opt(lo),
            opt(hi),
        ]
    });
    write_csv(
        path,
        &["bin_center", "density", "fit_value", "ci_low", "ci_high"],
        rows,
    )
}

/// `demand ≈ a · supply^β` over edges where both weights are positive. The
/// band smooths `log10 demand` against supply.
fn allometry(
    net: &PairedNetwork<f64>,
    slug: &str,
    out: &Path,
) -> Result<AllometrySummary, CliError> {
    let supply = net.layer_weights(Layer::Supply);
    let demand = net.layer_weights(Layer::Demand);
    let fit = allometric_fit(&supply, &demand).map_err(|e| CliError::Degenerate(e.to_string()))?;
    let mut pairs: Vec<(f64, f64)> = supply
        .iter()
        .zip(&demand)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(&x, &y)| (x, y))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.log10()).collect();
    let grid = band_grid(&xs);
    let band = nadaraya_watson(&xs, &ly, Bandwidth::Auto, &grid).ok();
    let rows = pairs.iter().map(|&(x, y)| {
        let (lo, hi) = band.as_ref().map_or((None, None), |b| {
            (
                interpolate(&grid, &b.ci_low, x).map(exp10),
                interpolate(&grid, &b.ci_high, x).map(exp10),
            )
        });
        [
            x.to_string(),
            y.to_string(),
            fit.predict(x).to_string(),
            opt(lo),
            opt(hi),
        ]
    });
    write_csv(
        &out.join(format!("allometry_{slug}.csv")),
        &["x", "y", "fit", "ci_low", "ci_high"],
        rows,
    )?;
    Ok(AllometrySummary {
        a: fit.a,
        beta: fit.beta,
        r_squared: fit.r_squared,
        n: fit.n,
        excluded: fit.excluded,
    })
}

/// Distinct sorted `xs`, thinned to at most `BAND_POINTS` evenly spaced ranks.
fn band_grid(xs: &[f64]) -> Vec<f64> {
    let mut uniq = xs.to_vec();
    uniq.dedup();
    if uniq.len() <= BAND_POINTS {
        return uniq;
    }
    let last = uniq.len() - 1;
    (0..BAND_POINTS)
        .map(|i| uniq[i * last / (BAND_POINTS - 1)])
        .collect()
}

/// Linear interpolation of `values` over the sorted `grid` at `x`.
fn interpolate(grid: &[f64], values: &[Option<f64>], x: f64) -> Option<f64> {
    let hi = grid.partition_point(|&g| g < x).min(grid.len() - 1);
    if hi == 0 || grid[hi] == x {
        return values[hi];
    }
    let lo = hi - 1;
    let (a, b) = (values[lo]?, values[hi]?);
    let t = (x - grid[lo]) / (grid[hi] - grid[lo]);
    Some(a + (b - a) * t)
}

fn curve_for(
    net: &PairedNetwork<f64>,
    layer: Layer,
    config: &RunConfig,
) -> Result<CurveSummary, CliError> {
    let sweep = config.sweep;
    let resolutions = log_spaced(sweep.lo, sweep.hi, sweep.count);
    let result =
        symmetrize(net, layer).and_then(|g| modularity_curve(&g, &resolutions, config.seed));
    let mut summary = CurveSummary {
        layer: layer.to_string(),
        points: Vec::new(),
        error: None,
    };
    match result {
        Ok(points) => {
            summary.points = points
                .iter()
                .map(|&ModularityCurvePoint { resolution, k, q }| CurvePoint { resolution, k, q })
                .collect();
            write_csv(
                &config.out.join(format!("modularity_curve_{layer}.csv")),
                &["resolution", "k", "q"],
                points
                    .iter()
                    .map(|p| [p.resolution.to_string(), p.k.to_string(), p.q.to_string()]),
            )?;
        }
        Err(e) => summary.error = Some(e.to_string()),
    }
    Ok(summary)
}

fn exp10(v: f64) -> f64 {
    10f64.powf(v)
}
