//! Paired supply/demand transit networks.
//!
//! A [`PairedNetwork`] is one simple directed graph over bus stops whose edges
//! carry two weight layers: scheduled vehicle trips (supply) and passenger
//! traversals (demand). Both layers live on the same edge set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

/// Maximum number of offending edges listed in an [`ModelError::UnpairedEdges`].
pub const MAX_LISTED_EDGES: usize = 20;

/// Label used for networks that cover the whole service day.
pub const FULL_DAY: &str = "full-day";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("empty network: no edges")]
    EmptyNetwork,
    #[error("empty layer: no edge carries weight")]
    EmptyLayer,
    #[error("inconsistent maximum: weight {weight} exceeds maximum {max}")]
    InconsistentMaximum { weight: f64, max: f64 },
    #[error("invalid weight {weight} on edge {edge}")]
    InvalidWeight { edge: EdgeKey, weight: f64 },
    #[error("self-loop edge {0} is not allowed")]
    SelfLoop(EdgeKey),
    #[error("duplicate stop id {0:?}")]
    DuplicateStop(String),
    #[error("stop {id:?}: {reason}")]
    InvalidStop { id: String, reason: String },
    #[error("edge {edge} references unknown stop {stop:?}")]
    UnknownStop { edge: EdgeKey, stop: String },
    #[error("supply and demand edge sets differ on {total} edge(s): {}", format_edges(.sample))]
    UnpairedEdges { total: usize, sample: Vec<EdgeKey> },
}

fn format_edges(edges: &[EdgeKey]) -> String {
    edges
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Weight layer selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Layer {
    Supply,
    Demand,
}

impl Layer {
    pub const BOTH: [Layer; 2] = [Layer::Supply, Layer::Demand];

    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Supply => "supply",
            Layer::Demand => "demand",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A bus stop. Coordinates are decimal degrees and either both present or both absent.
#[derive(Debug, Clone, PartialEq)]
pub struct Stop {
    pub id: String,
    pub coords: Option<(f64, f64)>,
}

impl Stop {
    pub fn new(id: impl Into<String>) -> Self {
        Stop {
            id: id.into(),
            coords: None,
        }
    }

    /// Builds a stop from optional latitude and longitude, validating ranges.
    pub fn with_coords(
        id: impl Into<String>,
        lat: Option<f64>,
        lon: Option<f64>,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        let coords = match (lat, lon) {
            (None, None) => None,
            (Some(lat), Some(lon)) => {
                if !(-90.0..=90.0).contains(&lat) {
                    return Err(ModelError::InvalidStop {
                        id,
                        reason: format!("latitude {lat} outside [-90, 90]"),
                    });
                }
                if !(-180.0..=180.0).contains(&lon) {
                    return Err(ModelError::InvalidStop {
                        id,
                        reason: format!("longitude {lon} outside [-180, 180]"),
                    });
                }
                Some((lat, lon))
            }
            _ => {
                return Err(ModelError::InvalidStop {
                    id,
                    reason: "latitude and longitude must be given together".into(),
                })
            }
        };
        Ok(Stop { id, coords })
    }

    pub fn lat(&self) -> Option<f64> {
        self.coords.map(|c| c.0)
    }

    pub fn lon(&self) -> Option<f64> {
        self.coords.map(|c| c.1)
    }
}

/// Ordered stop pair identifying a directed edge. Orders lexicographically by
/// (origin, destination).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    pub origin: String,
    pub destination: String,
}

impl EdgeKey {
    pub fn new(origin: impl Into<String>, destination: impl Into<String>) -> Self {
        EdgeKey {
            origin: origin.into(),
            destination: destination.into(),
        }
    }

    pub fn reversed(&self) -> EdgeKey {
        EdgeKey::new(self.destination.clone(), self.origin.clone())
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.origin, self.destination)
    }
}

/// Both weight layers of one edge.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdgeWeights<T> {
    pub supply: T,
    pub demand: T,
}

impl<T: Scalar> EdgeWeights<T> {
    pub fn get(&self, layer: Layer) -> T {
        match layer {
            Layer::Supply => self.supply,
            Layer::Demand => self.demand,
        }
    }
}

/// A weight divided by its layer maximum; always in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NormalizedWeight<T>(T);

impl<T: Scalar> NormalizedWeight<T> {
    pub fn value(self) -> T {
        self.0
    }
}

/// Divides `w` by the layer maximum `w_max`.
pub fn normalized_weight<T: Scalar>(w: T, w_max: T) -> Result<NormalizedWeight<T>, ModelError> {
    if !(w_max > T::zero()) {
        return Err(ModelError::EmptyLayer);
    }
    if !(w >= T::zero() && w <= w_max) {
        return Err(ModelError::InconsistentMaximum {
            weight: w.as_f64(),
            max: w_max.as_f64(),
        });
    }
    Ok(NormalizedWeight(w / w_max))
}

/// Checks two edge sets are identical and returns the common set.
///
/// On mismatch the error lists up to [`MAX_LISTED_EDGES`] edges of the
/// symmetric difference, in key order.
pub fn assert_paired<'a, I, J>(
    supply_edges: I,
    demand_edges: J,
) -> Result<BTreeSet<EdgeKey>, ModelError>
where
    I: IntoIterator<Item = &'a EdgeKey>,
    J: IntoIterator<Item = &'a EdgeKey>,
{
    let supply: BTreeSet<&EdgeKey> = supply_edges.into_iter().collect();
    let demand: BTreeSet<&EdgeKey> = demand_edges.into_iter().collect();
    let diff: BTreeSet<&EdgeKey> = supply.symmetric_difference(&demand).copied().collect();
    if diff.is_empty() {
        return Ok(supply.into_iter().cloned().collect());
    }
    Err(ModelError::UnpairedEdges {
        total: diff.len(),
        sample: diff.into_iter().take(MAX_LISTED_EDGES).cloned().collect(),
    })
}

/// One directed stop graph with supply and demand layers, for one time window.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedNetwork<T> {
    window: String,
    stops: BTreeMap<String, Stop>,
    edges: BTreeMap<EdgeKey, EdgeWeights<T>>,
}

impl<T: Scalar> PairedNetwork<T> {
    /// Builds a network after validating stops, edge endpoints, weights and pairing.
    ///
    /// With `zero_fill`, an edge present in only one layer is materialized with
    /// weight zero in the other; otherwise mismatched edge sets are rejected.
    pub fn new(
        window: impl Into<String>,
        stops: impl IntoIterator<Item = Stop>,
        supply: &BTreeMap<EdgeKey, T>,
        demand: &BTreeMap<EdgeKey, T>,
        zero_fill: bool,
    ) -> Result<Self, ModelError> {
        let keys = if zero_fill {
            supply.keys().chain(demand.keys()).cloned().collect()
        } else {
            assert_paired(supply.keys(), demand.keys())?
        };
        let edges = keys
            .into_iter()
            .map(|key| {
                let weights = EdgeWeights {
                    supply: supply.get(&key).copied().unwrap_or_else(T::zero),
                    demand: demand.get(&key).copied().unwrap_or_else(T::zero),
                };
                (key, weights)
            })
            .collect();
        Self::from_edges(window, stops, edges)
    }

    /// Builds a network from already-paired edges.
    pub fn from_edges(
        window: impl Into<String>,
        stops: impl IntoIterator<Item = Stop>,
        edges: BTreeMap<EdgeKey, EdgeWeights<T>>,
    ) -> Result<Self, ModelError> {
        let mut stop_map = BTreeMap::new();
        for stop in stops {
            if stop_map.contains_key(&stop.id) {
                return Err(ModelError::DuplicateStop(stop.id));
            }
            stop_map.insert(stop.id.clone(), stop);
        }
        for (key, weights) in &edges {
            if key.origin == key.destination {
                return Err(ModelError::SelfLoop(key.clone()));
            }
            for stop in [&key.origin, &key.destination] {
                if !stop_map.contains_key(stop) {
                    return Err(ModelError::UnknownStop {
                        edge: key.clone(),
                        stop: stop.clone(),
                    });
                }
            }
            for w in [weights.supply, weights.demand] {
                if !w.is_finite() || w < T::zero() {
                    return Err(ModelError::InvalidWeight {
                        edge: key.clone(),
                        weight: w.as_f64(),
                    });
                }
            }
        }
        Ok(PairedNetwork {
            window: window.into(),
            stops: stop_map,
            edges,
        })
    }

    pub fn window(&self) -> &str {
        &self.window
    }

    pub fn stops(&self) -> impl Iterator<Item = &Stop> {
        self.stops.values()
    }

    pub fn stop(&self, id: &str) -> Option<&Stop> {
        self.stops.get(id)
    }

    pub fn stop_count(&self) -> usize {
        self.stops.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&EdgeKey, &EdgeWeights<T>)> {
        self.edges.iter()
    }

    pub fn weights(&self, key: &EdgeKey) -> Option<&EdgeWeights<T>> {
        self.edges.get(key)
    }

    /// Weights of one layer in edge-key order.
    pub fn layer_weights(&self, layer: Layer) -> Vec<T> {
        self.edges.values().map(|w| w.get(layer)).collect()
    }

    /// Stops incident to at least one edge.
    pub fn connected_stops(&self) -> BTreeSet<&str> {
        self.edges
            .keys()
            .flat_map(|k| [k.origin.as_str(), k.destination.as_str()])
            .collect()
    }

    pub fn has_coordinates(&self) -> bool {
        self.stops.values().any(|s| s.coords.is_some())
    }

    /// Per-edge normalized shares of one layer, in edge-key order.
    pub fn normalized_layer(&self, layer: Layer) -> Result<Vec<T>, ModelError> {
        let max = layer_max(self, layer)?;
        if !(max > T::zero()) {
            return Err(ModelError::EmptyLayer);
        }
        self.edges
            .values()
            .map(|w| normalized_weight(w.get(layer), max).map(NormalizedWeight::value))
            .collect()
    }

    /// Returns a copy with every weight of `layer` multiplied by `factor`.
    pub fn scaled(&self, layer: Layer, factor: T) -> Self {
        let mut out = self.clone();
        for w in out.edges.values_mut() {
            match layer {
                Layer::Supply => w.supply = w.supply * factor,
                Layer::Demand => w.demand = w.demand * factor,
            }
        }
        out
    }
}

/// Maximum weight of `layer` over all edges. May be zero; callers normalizing
/// by it must treat zero as an empty layer.
pub fn layer_max<T: Scalar>(net: &PairedNetwork<T>, layer: Layer) -> Result<T, ModelError> {
    net.edges
        .values()
        .map(|w| w.get(layer))
        .reduce(T::max)
        .ok_or(ModelError::EmptyNetwork)
}
