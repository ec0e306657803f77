#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use transit_balance::cli::RunConfig;
use transit_balance::GraphF64;

/// Every set partition of `0..n` as a restricted growth string.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max + 1 };
        for c in 0..=limit {
            prefix.push(c);
            grow(prefix, n, max.max(c), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        grow(&mut Vec::with_capacity(n), n, 0, &mut out);
    }
    out
}

/// `Q = (1/2m) Σ_ij [A_ij − γ k_i k_j / 2m] δ(c_i, c_j)` summed term by term.
pub fn oracle_modularity(g: &GraphF64, part: &[usize], gamma: f64) -> f64 {
    let n = g.node_count();
    let two_m = g.total_weight();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if part[i] == part[j] {
                let a = if i == j {
                    2.0 * g.self_loop(i)
                } else {
                    g.weight(i, j)
                };
                q += a - gamma * g.strength(i) * g.strength(j) / two_m;
            }
        }
    }
    q / two_m
}

/// Highest-modularity partition by exhaustive enumeration.
pub fn best_partition(g: &GraphF64) -> (f64, Vec<usize>) {
    all_partitions(g.node_count())
        .into_iter()
        .map(|p| (oracle_modularity(g, &p, 1.0), p))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one partition")
}

/// Unit-weight cliques of the given sizes, joined by unit bridges between
/// node indices.
pub fn cliques(sizes: &[usize], bridges: &[(usize, usize)]) -> GraphF64 {
    let n: usize = sizes.iter().sum();
    let mut g = GraphF64::new((0..n).map(|i| format!("v{i}"))).unwrap();
    let mut start = 0;
    for &s in sizes {
        for a in start..start + s {
            for b in a + 1..start + s {
                g.add_edge(a, b, 1.0).unwrap();
            }
        }
        start += s;
    }
    for &(a, b) in bridges {
        g.add_edge(a, b, 1.0).unwrap();
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Planted {
    /// Bridge runs one light shuttle but carries heavy demand.
    Bottleneck,
    /// Bridge runs a frequent shuttle but carries little demand.
    Waste,
    /// Demand is ten times supply on every edge.
    Balanced,
}

pub const NEIGHBORHOODS: [usize; 8] = [6, 6, 6, 6, 6, 6, 7, 7];
pub const BRIDGE: (&str, &str) = ("n3s0", "n4s0");

pub fn stop(k: usize, j: usize) -> String {
    format!("n{k}s{j}")
}

/// Neighborhood of every stop, by stop id.
pub fn neighborhood_of(id: &str) -> usize {
    id[1..id.find('s').unwrap()].parse().unwrap()
}

pub struct CityFiles {
    pub stops: PathBuf,
    pub lines: PathBuf,
    pub routes: PathBuf,
    pub demand: PathBuf,
}

impl CityFiles {
    pub fn config(&self, out: &Path) -> RunConfig {
        let mut c = RunConfig::new(out);
        c.stops = Some(self.stops.clone());
        c.lines = Some(self.lines.clone());
        c.routes = Some(self.routes.clone());
        c.demand = Some(self.demand.clone());
        c
    }

    pub fn args(&self) -> Vec<String> {
        vec![
            "--stops".into(),
            self.stops.display().to_string(),
            "--lines".into(),
            self.lines.display().to_string(),
            "--routes".into(),
            self.routes.display().to_string(),
            "--demand".into(),
            self.demand.display().to_string(),
        ]
    }
}

/// A 50-stop, 10-line city of eight ring neighborhoods.
///
/// Each neighborhood `k` is a one-way ring line `R<k>` (5 vehicles × 10 trips)
/// through stops `n<k>s0..`. A trunk line `T` (1 × 2) links the hubs
/// `n0s0 → n1s0 → … → n7s0`, and a shuttle `S` runs `n3s0 → n4s0 → n3s0`.
/// Ring edges carry 500 passengers and trunk links 20, so both are exactly
/// balanced; only the `n3s0 ↔ n4s0` bridge is out of proportion.
///
/// With `timed`, each demand count is spread over four times of day.
pub fn write_city(dir: &Path, planted: Planted, timed: bool) -> CityFiles {
    let files = CityFiles {
        stops: dir.join("stops.csv"),
        lines: dir.join("lines.csv"),
        routes: dir.join("routes.csv"),
        demand: dir.join("demand.csv"),
    };

    let mut stops = String::from("stop_id,lat,lon\n");
    for (k, &size) in NEIGHBORHOODS.iter().enumerate() {
        for j in 0..size {
            let angle = j as f64 / size as f64 * std::f64::consts::TAU;
            let lat = -3.70 + 0.02 * k as f64 + 0.004 * angle.sin();
            let lon = -38.55 + 0.004 * angle.cos();
            let _ = writeln!(stops, "{},{lat:.6},{lon:.6}", stop(k, j));
        }
    }

    let (shuttle_v, shuttle_c) = match planted {
        Planted::Bottleneck | Planted::Balanced => (1u64, 1u64),
        Planted::Waste => (1, 10),
    };
    let mut lines = String::from("line_id,vehicles,trips_per_vehicle\n");
    let mut routes = String::from("line_id,seq,stop_id\n");
    for (k, &size) in NEIGHBORHOODS.iter().enumerate() {
        let _ = writeln!(lines, "R{k},5,10");
        for j in 0..=size {
            let _ = writeln!(routes, "R{k},{j},{}", stop(k, j % size));
        }
    }
    let _ = writeln!(lines, "T,1,2");
    for k in 0..NEIGHBORHOODS.len() {
        let _ = writeln!(routes, "T,{k},{}", stop(k, 0));
    }
    let _ = writeln!(lines, "S,{shuttle_v},{shuttle_c}");
    for (seq, id) in [BRIDGE.0, BRIDGE.1, BRIDGE.0].iter().enumerate() {
        let _ = writeln!(routes, "S,{seq},{id}");
    }

    let mut flows: Vec<(String, String, u64)> = Vec::new();
    for (k, &size) in NEIGHBORHOODS.iter().enumerate() {
        for j in 0..size {
            flows.push((stop(k, j), stop(k, (j + 1) % size), 500));
        }
    }
    for k in 0..NEIGHBORHOODS.len() - 1 {
        let (a, b) = (stop(k, 0), stop(k + 1, 0));
        if (a.as_str(), b.as_str()) != BRIDGE {
            flows.push((a, b, 20));
        }
    }
    let shuttle = shuttle_v * shuttle_c;
    let (forward, back) = match planted {
        Planted::Bottleneck => (100, 100),
        Planted::Waste => (25, 25),
        Planted::Balanced => (10 * (2 + shuttle), 10 * shuttle),
    };
    flows.push((BRIDGE.0.into(), BRIDGE.1.into(), forward));
    flows.push((BRIDGE.1.into(), BRIDGE.0.into(), back));

    let mut demand = String::from(if timed {
        "origin_stop,destination_stop,count,hhmm\n"
    } else {
        "origin_stop,destination_stop,count\n"
    });
    for (a, b, count) in flows {
        if timed {
            let quarter = count / 4;
            let parts = [quarter, quarter, quarter, count - 3 * quarter];
            for (part, at) in parts.iter().zip(["0630", "0800", "1201", "2330"]) {
                if *part > 0 {
                    let _ = writeln!(demand, "{a},{b},{part},{at}");
                }
            }
        } else {
            let _ = writeln!(demand, "{a},{b},{count}");
        }
    }

    fs::write(&files.stops, stops).unwrap();
    fs::write(&files.lines, lines).unwrap();
    fs::write(&files.routes, routes).unwrap();
    fs::write(&files.demand, demand).unwrap();
    files
}
