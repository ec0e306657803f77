use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::model::{EdgeKey, PairedNetwork};
use crate::scalar::Scalar;

use super::{CommunityError, CommunityPartition, Louvain, UndirectedWeightedGraph};

/// Default resolution sweep: `(lo, hi, count)`.
pub const DEFAULT_SWEEP: (f64, f64, usize) = (0.05, 20.0, 32);

const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// One point of the modularity-versus-community-count curve. `q` is the
/// resolution-1 modularity of the partition found at `resolution`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularityCurvePoint<T> {
    pub resolution: T,
    pub k: usize,
    pub q: T,
}

/// `count` values spaced evenly in log between `lo` and `hi`, endpoints exact.
pub fn log_spaced<T: Scalar>(lo: T, hi: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let last = count - 1;
            (0..count)
                .map(|i| match i {
                    0 => lo,
                    i if i == last => hi,
                    i => (a + (b - a) * T::count(i) / T::count(last)).exp(),
                })
                .collect()
        }
    }
}

pub fn default_sweep<T: Scalar>() -> Vec<T> {
    let (lo, hi, n) = DEFAULT_SWEEP;
    log_spaced(T::lit(lo), T::lit(hi), n)
}

/// Runs Louvain at every resolution in parallel, the `i`-th run seeded with
/// `seed + i · 0x9E3779B97F4A7C15` (wrapping). Runs that find the same
/// community count keep the higher `q`; points are sorted by `k`.
pub fn modularity_curve<T: Scalar>(
    g: &UndirectedWeightedGraph<T>,
    resolutions: &[T],
    seed: u64,
) -> Result<Vec<ModularityCurvePoint<T>>, CommunityError> {
    let points = resolutions
        .par_iter()
        .enumerate()
        .map(|(i, &gamma)| {
            let run_seed = seed.wrapping_add((i as u64).wrapping_mul(SEED_STRIDE));
            let p = Louvain::new()
                .resolution(gamma)
                .seed(run_seed)
                .partition(g)?;
            Ok(ModularityCurvePoint {
                resolution: gamma,
                k: p.k(),
                q: p.q(),
            })
        })
        .collect::<Result<Vec<_>, CommunityError>>()?;
    let mut by_k: BTreeMap<usize, ModularityCurvePoint<T>> = BTreeMap::new();
    for point in points {
        match by_k.get(&point.k) {
            Some(kept) if kept.q >= point.q => {}
            _ => {
                by_k.insert(point.k, point);
            }
        }
    }
    Ok(by_k.into_values().collect())
}

/// Directed edges of `net` whose endpoints fall in different communities.
pub fn inter_community_edges<T: Scalar>(
    net: &PairedNetwork<T>,
    partition: &CommunityPartition<T>,
) -> Result<Vec<EdgeKey>, CommunityError> {
    let community = |stop: &str| {
        partition
            .community_of(stop)
            .ok_or_else(|| CommunityError::Uncovered(stop.to_string()))
    };
    let mut out = Vec::new();
    for (key, _) in net.edges() {
        if community(&key.origin)? != community(&key.destination)? {
            out.push(key.clone());
        }
    }
    Ok(out)
}
