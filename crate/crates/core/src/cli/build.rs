use std::fs;

use serde::{Deserialize, Serialize};

use crate::ingest::{assemble, parse_inputs, InputPaths};

use super::files::write_json;
use super::{write_network, CliError, RunConfig};

pub const BUILD_SUMMARY: &str = "build_summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub window: String,
    pub slug: String,
    pub stops: usize,
    pub edges: usize,
    pub supply_apportioned: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub networks: Vec<NetworkSummary>,
}

/// Ingests the four tables and writes `network_<window>.json` for the full
/// day and, when demand is timed, for every window.
pub fn cmd_build(config: &RunConfig) -> Result<BuildSummary, CliError> {
    let paths = InputPaths {
        stops: config.require(&config.stops, "stops")?.to_path_buf(),
        lines: config.require(&config.lines, "lines")?.to_path_buf(),
        routes: config.require(&config.routes, "routes")?.to_path_buf(),
        demand: config.require(&config.demand, "demand")?.to_path_buf(),
    };
    let schedule = config.schedule()?;
    let data = parse_inputs(&paths)?;
    let built = assemble::<f64>(&data, &schedule, config.zero_fill)?;

    fs::create_dir_all(&config.out).map_err(CliError::io(&config.out))?;
    let mut networks = Vec::with_capacity(built.len());
    for b in &built {
        write_network(&config.out, b)?;
        let summary = NetworkSummary {
            window: b.label().to_string(),
            slug: b.slug(),
            stops: b.network.stop_count(),
            edges: b.network.edge_count(),
            supply_apportioned: b.supply_apportioned,
        };
        println!(
            "[{}] stops={} edges={}",
            summary.slug, summary.stops, summary.edges
        );
        networks.push(summary);
    }
    let summary = BuildSummary { networks };
    write_json(&config.out.join(BUILD_SUMMARY), &summary)?;
    Ok(summary)
}
