use std::collections::BTreeSet;
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::diagnose::{attribute_lines, diagnose_layer, Classification, DiagnosisRecord};
use crate::ingest::{parse_line_records, BuiltNetwork, LineRecord};
use crate::model::{Layer, PairedNetwork};

use super::files::{write_csv, write_json};
use super::{read_networks, CliError, RunConfig};

pub const DIAGNOSE_SUMMARY: &str = "diagnose_summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedEdge {
    pub origin: String,
    pub destination: String,
    pub is: f64,
    pub id: f64,
    pub classification: String,
    pub source_partition: String,
    pub lines: Vec<String>,
}

impl From<&DiagnosisRecord<f64>> for FlaggedEdge {
    fn from(r: &DiagnosisRecord<f64>) -> Self {
        FlaggedEdge {
            origin: r.edge.origin.clone(),
            destination: r.edge.destination.clone(),
            is: r.is_value,
            id: r.id_value,
            classification: r.classification.to_string(),
            source_partition: r.source_partition.to_string(),
            lines: r.lines.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDiagnosis {
    pub window: String,
    pub slug: String,
    pub supply_communities: Option<usize>,
    pub demand_communities: Option<usize>,
    pub bottlenecks: Vec<FlaggedEdge>,
    pub waste: Vec<FlaggedEdge>,
    /// Cut edges that are neither, listed only with `--verbose`.
    pub unflagged: Vec<FlaggedEdge>,
    /// Distinct lines attributed to any flagged edge.
    pub lines: Vec<String>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseSummary {
    pub attributed: bool,
    pub networks: Vec<WindowDiagnosis>,
}

/// Writes `diagnosis_<window>.csv`, and a GeoJSON twin when stops carry
/// coordinates, for every built network. Line attribution needs both
/// `--lines` and `--routes`; without them the lines column stays empty.
pub fn cmd_diagnose(config: &RunConfig) -> Result<DiagnoseSummary, CliError> {
    let networks = read_networks(&config.out)?;
    let lines = match (&config.lines, &config.routes) {
        (Some(l), Some(r)) => Some(parse_line_records(l, r, None)?),
        _ => {
            warn!("--lines and --routes not both given: line attribution skipped");
            None
        }
    };
    let results: Vec<WindowDiagnosis> = networks
        .par_iter()
        .map(|b| diagnose_network(b, lines.as_deref(), config))
        .collect::<Result<_, _>>()?;

    for w in &results {
        for e in &w.errors {
            println!("[{}] {e}", w.slug);
        }
        println!(
            "[{}] {} bottlenecks, {} waste, {} lines",
            w.slug,
            w.bottlenecks.len(),
            w.waste.len(),
            w.lines.len()
        );
        if config.verbose {
            for r in &w.unflagged {
                println!(
                    "[{}]   {} ({}, {}) is={} partition={}",
                    w.slug, r.classification, r.origin, r.destination, r.is, r.source_partition
                );
            }
        }
    }
    let summary = DiagnoseSummary {
        attributed: lines.is_some(),
        networks: results,
    };
    write_json(&config.out.join(DIAGNOSE_SUMMARY), &summary)?;
    if summary
        .networks
        .iter()
        .all(|w| w.supply_communities.is_none() && w.demand_communities.is_none())
    {
        return Err(CliError::Degenerate(
            "no network layer could be partitioned".into(),
        ));
    }
    Ok(summary)
}

fn diagnose_network(
    built: &BuiltNetwork<f64>,
    lines: Option<&[LineRecord]>,
    config: &RunConfig,
) -> Result<WindowDiagnosis, CliError> {
    let slug = built.slug();
    let net = &built.network;
    let mut errors = Vec::new();
    let mut communities = [None, None];
    let mut flagged = Vec::new();
    let mut unflagged = Vec::new();
    for (i, layer) in Layer::BOTH.into_iter().enumerate() {
        match diagnose_layer(net, layer, config.seed) {
            Ok(d) => {
                communities[i] = Some(d.partition.k());
                flagged.extend(d.flagged);
                if config.verbose {
                    unflagged.extend(d.other);
                }
            }
            Err(e) => {
                warn!("[{slug}] {layer}: {e}");
                errors.push(format!("{layer}: {e}"));
            }
        }
    }
    if let Some(lines) = lines {
        flagged = attribute_lines(flagged, lines);
    }
    let attributed: BTreeSet<String> = flagged
        .iter()
        .flat_map(|r| r.lines.iter().cloned())
        .collect();

    let rows = flagged.iter().chain(&unflagged);
    write_csv(
        &config.out.join(format!("diagnosis_{slug}.csv")),
        &[
            "origin",
            "destination",
            "is",
            "id",
            "classification",
            "source_partition",
            "lines",
        ],
        rows.clone().map(|r| {
            [
                r.edge.origin.clone(),
                r.edge.destination.clone(),
                r.is_value.to_string(),
                r.id_value.to_string(),
                r.classification.to_string(),
                r.source_partition.to_string(),
                r.lines.join(";"),
            ]
        }),
    )?;
    if net.has_coordinates() {
        write_geojson(
            &config.out.join(format!("diagnosis_{slug}.geojson")),
            net,
            rows,
        )?;
    }

    let of = |c: Classification| {
        flagged
            .iter()
            .filter(|r| r.classification == c)
            .map(FlaggedEdge::from)
            .collect()
    };
    Ok(WindowDiagnosis {
        window: built.label().to_string(),
        slug,
        supply_communities: communities[0],
        demand_communities: communities[1],
        bottlenecks: of(Classification::Bottleneck),
        waste: of(Classification::Waste),
        unflagged: unflagged.iter().map(FlaggedEdge::from).collect(),
        lines: attributed.into_iter().collect(),
        errors,
    })
}

/// One LineString feature per record whose endpoints both have coordinates.
fn write_geojson<'a>(
    path: &Path,
    net: &PairedNetwork<f64>,
    records: impl Iterator<Item = &'a DiagnosisRecord<f64>>,
) -> Result<(), CliError> {
    let features: Vec<_> = records
        .filter_map(|r| {
            let a = net.stop(&r.edge.origin)?.coords?;
            let b = net.stop(&r.edge.destination)?.coords?;
            Some(json!({
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [[a.1, a.0], [b.1, b.0]],
                },
                "properties": {
                    "origin": r.edge.origin,
                    "destination": r.edge.destination,
                    "is": r.is_value,
                    "id": r.id_value,
                    "classification": r.classification.as_str(),
                    "source_partition": r.source_partition.as_str(),
                    "lines": r.lines.join(";"),
                },
            }))
        })
        .collect();
    write_json(
        path,
        &json!({ "type": "FeatureCollection", "features": features }),
    )
}
