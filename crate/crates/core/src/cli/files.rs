use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ingest::{BuiltNetwork, TimeWindow};
use crate::model::{EdgeKey, EdgeWeights, PairedNetwork, Stop, FULL_DAY};

use super::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// On-disk form of a built network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub format_version: u32,
    pub window: String,
    pub window_slug: String,
    /// Exclusive start and inclusive end minute; absent for the full day.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_bounds: Option<(u16, u16)>,
    pub supply_apportioned: bool,
    pub stops: Vec<StopRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub origin: String,
    pub destination: String,
    pub supply: f64,
    pub demand: f64,
}

impl From<&BuiltNetwork<f64>> for NetworkFile {
    fn from(built: &BuiltNetwork<f64>) -> Self {
        let net = &built.network;
        NetworkFile {
            format_version: FORMAT_VERSION,
            window: built.label().to_string(),
            window_slug: built.slug(),
            window_bounds: built.window.as_ref().map(|w| (w.start(), w.end())),
            supply_apportioned: built.supply_apportioned,
            stops: net
                .stops()
                .map(|s| StopRecord {
                    id: s.id.clone(),
                    lat: s.lat(),
                    lon: s.lon(),
                })
                .collect(),
            edges: net
                .edges()
                .map(|(k, w)| EdgeRecord {
                    origin: k.origin.clone(),
                    destination: k.destination.clone(),
                    supply: w.supply,
                    demand: w.demand,
                })
                .collect(),
        }
    }
}

impl NetworkFile {
    pub fn into_built(self, path: &Path) -> Result<BuiltNetwork<f64>, CliError> {
        let invalid = |message: String| CliError::Format {
            path: path.to_path_buf(),
            message,
        };
        if self.format_version != FORMAT_VERSION {
            return Err(invalid(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        let window = match self.window_bounds {
            Some((start, end)) => Some(
                TimeWindow::new(self.window.clone(), start, end)
                    .map_err(|e| invalid(e.to_string()))?,
            ),
            None => None,
        };
        let stops = self
            .stops
            .into_iter()
            .map(|s| Stop::with_coords(s.id, s.lat, s.lon))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid(e.to_string()))?;
        let mut edges = BTreeMap::new();
        for e in self.edges {
            let key = EdgeKey::new(e.origin, e.destination);
            let weights = EdgeWeights {
                supply: e.supply,
                demand: e.demand,
            };
            if edges.insert(key.clone(), weights).is_some() {
                return Err(invalid(format!("duplicate edge {key}")));
            }
        }
        let label = window
            .as_ref()
            .map_or(FULL_DAY, TimeWindow::label)
            .to_string();
        let network =
            PairedNetwork::from_edges(label, stops, edges).map_err(|e| invalid(e.to_string()))?;
        Ok(BuiltNetwork {
            window,
            network,
            supply_apportioned: self.supply_apportioned,
        })
    }
}

pub fn network_path(out: &Path, slug: &str) -> PathBuf {
    out.join(format!("network_{slug}.json"))
}

pub fn write_network(out: &Path, built: &BuiltNetwork<f64>) -> Result<PathBuf, CliError> {
    let path = network_path(out, &built.slug());
    write_json(&path, &NetworkFile::from(built))?;
    Ok(path)
}

/// Reads every `network_*.json` in `out`: the full-day network first, then
/// windows by start minute.
pub fn read_networks(out: &Path) -> Result<Vec<BuiltNetwork<f64>>, CliError> {
    let entries = fs::read_dir(out).map_err(CliError::io(out))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(CliError::io(out))?.path();
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        if name.starts_with("network_") && name.ends_with(".json") {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(CliError::Usage(format!(
            "no network_*.json files in {}; run `build` first",
            out.display()
        )));
    }
    paths.sort();
    let mut networks = paths
        .iter()
        .map(|p| read_json::<NetworkFile>(p)?.into_built(p))
        .collect::<Result<Vec<_>, _>>()?;
    networks.sort_by_key(|b| b.window.as_ref().map(|w| (w.start(), w.end())));
    Ok(networks)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(CliError::io(path))
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let format = |e: csv::Error| CliError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(format)?;
    w.write_record(header).map_err(format)?;
    for row in rows {
        w.write_record(row).map_err(format)?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
