//! Input records and construction of the supply and demand weight layers.
//!
//! Supply on an edge is the sum, over every line whose route visits the two
//! stops consecutively, of the line weight `vehicles × trips_per_vehicle`.
//! Demand on an edge is the number of passengers that traversed it.

mod parse;
mod window;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use log::warn;
use thiserror::Error;

use crate::model::{EdgeKey, ModelError, PairedNetwork, Stop, FULL_DAY};
use crate::scalar::Scalar;

pub use parse::{
    join_lines, parse_demand, parse_inputs, parse_line_records, parse_lines, parse_routes,
    parse_stops, InputPaths, LineHeader,
};
pub use window::{
    slice_by_window, MinuteOfDay, TimeWindow, Timed, WindowSchedule, MINUTES_PER_DAY,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Schema {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("untimed record at index {0}: every record needs a timestamp for windowing")]
    UntimedRecord(usize),
    #[error("no bus lines given")]
    NoLines,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A bus line with its fleet, daily trips per vehicle and stop sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct LineRecord {
    line_id: String,
    vehicles: u32,
    trips_per_vehicle: u32,
    window_trips: BTreeMap<String, u32>,
    route: Vec<String>,
}

impl LineRecord {
    pub fn new(
        line_id: impl Into<String>,
        vehicles: u32,
        trips_per_vehicle: u32,
        route: Vec<String>,
    ) -> Result<Self, IngestError> {
        let line_id = line_id.into();
        let invalid = |m: String| Err(IngestError::Invalid(format!("line {line_id:?}: {m}")));
        if vehicles < 1 {
            return invalid("vehicles must be at least 1".into());
        }
        if trips_per_vehicle < 1 {
            return invalid("trips_per_vehicle must be at least 1".into());
        }
        if route.len() < 2 {
            return invalid(format!(
                "route has {} stop(s), need at least 2",
                route.len()
            ));
        }
        if let Some(pair) = route.windows(2).find(|p| p[0] == p[1]) {
            return invalid(format!("route repeats stop {:?} consecutively", pair[0]));
        }
        Ok(LineRecord {
            line_id,
            vehicles,
            trips_per_vehicle,
            window_trips: BTreeMap::new(),
            route,
        })
    }

    /// Per-window trips per vehicle, keyed by window label or slug.
    pub fn with_window_trips(mut self, window_trips: BTreeMap<String, u32>) -> Self {
        self.window_trips = window_trips;
        self
    }

    pub fn line_id(&self) -> &str {
        &self.line_id
    }

    pub fn vehicles(&self) -> u32 {
        self.vehicles
    }

    pub fn trips_per_vehicle(&self) -> u32 {
        self.trips_per_vehicle
    }

    pub fn window_trips(&self) -> &BTreeMap<String, u32> {
        &self.window_trips
    }

    pub fn route(&self) -> &[String] {
        &self.route
    }

    /// Consecutive stop pairs of the route, with multiplicity.
    pub fn segments(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.route
            .windows(2)
            .map(|p| EdgeKey::new(p[0].clone(), p[1].clone()))
    }

    pub fn serves(&self, edge: &EdgeKey) -> bool {
        self.route
            .windows(2)
            .any(|p| p[0] == edge.origin && p[1] == edge.destination)
    }

    /// Vehicle trips for `window`: `vehicles × trips` from the per-window column
    /// when the line has one (missing windows count as zero trips), otherwise the
    /// daily weight split evenly across the schedule. The flag reports the split.
    pub fn window_weight<T: Scalar>(
        &self,
        window: &TimeWindow,
        schedule: &WindowSchedule,
    ) -> (T, bool) {
        if self.window_trips.is_empty() {
            let daily = T::lit(line_weight(self) as f64);
            return (daily / T::count(schedule.len()), true);
        }
        let trips = self
            .window_trips
            .iter()
            .find(|(name, _)| window.matches(name))
            .map_or(0, |(_, &t)| t);
        (T::lit(f64::from(self.vehicles) * f64::from(trips)), false)
    }
}

/// Daily line weight: vehicles times trips per vehicle.
pub fn line_weight(line: &LineRecord) -> u64 {
    u64::from(line.vehicles) * u64::from(line.trips_per_vehicle)
}

/// Passengers carried over one ordered stop pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TraversalEvent {
    pub origin: String,
    pub destination: String,
    pub count: u64,
    pub timestamp: Option<MinuteOfDay>,
}

impl TraversalEvent {
    pub fn new(
        origin: impl Into<String>,
        destination: impl Into<String>,
        count: u64,
        timestamp: Option<MinuteOfDay>,
    ) -> Result<Self, IngestError> {
        let (origin, destination) = (origin.into(), destination.into());
        if origin == destination {
            return Err(IngestError::Invalid(format!(
                "traversal from {origin:?} to itself"
            )));
        }
        if count < 1 {
            return Err(IngestError::Invalid(format!(
                "traversal {origin:?} -> {destination:?} has zero passengers"
            )));
        }
        Ok(TraversalEvent {
            origin,
            destination,
            count,
            timestamp,
        })
    }

    pub fn edge(&self) -> EdgeKey {
        EdgeKey::new(self.origin.clone(), self.destination.clone())
    }
}

impl Timed for TraversalEvent {
    fn timestamp(&self) -> Option<MinuteOfDay> {
        self.timestamp
    }
}

/// Daily supply layer from line weights.
pub fn build_supply_layer<T: Scalar>(
    lines: &[LineRecord],
) -> Result<BTreeMap<EdgeKey, T>, IngestError> {
    build_supply_layer_with(lines, |line| T::lit(line_weight(line) as f64))
}

/// Supply layer with a caller-chosen weight per line. Segments repeated within
/// one route contribute once per occurrence.
pub fn build_supply_layer_with<T: Scalar>(
    lines: &[LineRecord],
    mut weight_of: impl FnMut(&LineRecord) -> T,
) -> Result<BTreeMap<EdgeKey, T>, IngestError> {
    if lines.is_empty() {
        return Err(IngestError::NoLines);
    }
    let mut layer = BTreeMap::new();
    for line in lines {
        let w = weight_of(line);
        for seg in line.segments() {
            let slot = layer.entry(seg).or_insert_with(T::zero);
            *slot = *slot + w;
        }
    }
    Ok(layer)
}

/// Demand layer: passenger counts summed per ordered stop pair.
pub fn build_demand_layer<T: Scalar>(events: &[TraversalEvent]) -> BTreeMap<EdgeKey, T> {
    let mut counts: BTreeMap<EdgeKey, u64> = BTreeMap::new();
    for e in events {
        *counts.entry(e.edge()).or_default() += e.count;
    }
    counts
        .into_iter()
        .map(|(k, c)| (k, T::lit(c as f64)))
        .collect()
}

/// Validated input records.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub stops: Vec<Stop>,
    pub lines: Vec<LineRecord>,
    pub events: Vec<TraversalEvent>,
}

/// A network built for one window (or the whole day) with provenance flags.
#[derive(Debug, Clone)]
pub struct BuiltNetwork<T> {
    pub window: Option<TimeWindow>,
    pub network: PairedNetwork<T>,
    /// Supply was split evenly from daily trips for at least one line.
    pub supply_apportioned: bool,
}

impl<T> BuiltNetwork<T> {
    pub fn label(&self) -> &str {
        self.window.as_ref().map_or(FULL_DAY, TimeWindow::label)
    }

    pub fn slug(&self) -> String {
        self.window
            .as_ref()
            .map_or_else(|| FULL_DAY.to_string(), TimeWindow::slug)
    }
}

/// Builds the full-day paired network and, when demand carries timestamps, one
/// network per schedule window.
///
/// The full-day layers must share one edge set unless `zero_fill` is set. Window
/// networks reuse the full-day edge set: an edge without demand events or trips in
/// a window gets weight zero there.
pub fn assemble<T: Scalar>(
    data: &Dataset,
    schedule: &WindowSchedule,
    zero_fill: bool,
) -> Result<Vec<BuiltNetwork<T>>, IngestError> {
    for line in &data.lines {
        for name in line.window_trips.keys() {
            if schedule.by_name(name).is_none() {
                return Err(IngestError::Invalid(format!(
                    "line {:?}: unknown window {name:?}",
                    line.line_id
                )));
            }
        }
    }

    let supply = build_supply_layer::<T>(&data.lines)?;
    let demand = build_demand_layer::<T>(&data.events);
    let full = PairedNetwork::new(
        FULL_DAY,
        data.stops.iter().cloned(),
        &supply,
        &demand,
        zero_fill,
    )?;
    let topology: BTreeSet<EdgeKey> = full.edges().map(|(k, _)| k.clone()).collect();

    let timed = data.events.iter().filter(|e| e.timestamp.is_some()).count();
    let mut out = vec![BuiltNetwork {
        window: None,
        network: full,
        supply_apportioned: false,
    }];
    if timed == 0 {
        return Ok(out);
    }

    let slices = slice_by_window(&data.events, schedule)?;
    let mut warned = false;
    for (window, events) in slices {
        let mut apportioned = false;
        let window_supply = build_supply_layer_with::<T>(&data.lines, |line| {
            let (w, split) = line.window_weight(window, schedule);
            apportioned |= split;
            w
        })?;
        if apportioned && !warned {
            warn!(
                "lines without per-window trips: daily supply split evenly across {} windows",
                schedule.len()
            );
            warned = true;
        }
        let window_demand = build_demand_layer::<T>(&events);
        let edges = topology
            .iter()
            .map(|k| {
                let weights = crate::model::EdgeWeights {
                    supply: window_supply.get(k).copied().unwrap_or_else(T::zero),
                    demand: window_demand.get(k).copied().unwrap_or_else(T::zero),
                };
                (k.clone(), weights)
            })
            .collect();
        let network = PairedNetwork::from_edges(window.label(), data.stops.iter().cloned(), edges)?;
        out.push(BuiltNetwork {
            window: Some(window.clone()),
            network,
            supply_apportioned: apportioned,
        });
    }
    Ok(out)
}
