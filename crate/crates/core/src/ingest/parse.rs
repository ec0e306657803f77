//! CSV readers for stops, lines, routes and demand.
//!
//! Every file is UTF-8, comma-separated, with a header row. Errors carry the
//! file path and the 1-based line number of the offending row.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use csv::{ReaderBuilder, StringRecord};

use super::{Dataset, IngestError, LineRecord, MinuteOfDay, TraversalEvent};
use crate::model::Stop;

/// Locations of the four input tables.
#[derive(Debug, Clone)]
pub struct InputPaths {
    pub stops: PathBuf,
    pub lines: PathBuf,
    pub routes: PathBuf,
    pub demand: PathBuf,
}

/// One row of `lines.csv` before its route is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct LineHeader {
    pub line_id: String,
    pub vehicles: u32,
    pub trips_per_vehicle: u32,
    pub window_trips: BTreeMap<String, u32>,
}

struct Rows<'p> {
    path: &'p Path,
    records: Vec<(u64, StringRecord)>,
}

impl<'p> Rows<'p> {
    fn read(
        path: &'p Path,
        reader: impl Read,
        expected: &[&str],
        min_fields: usize,
    ) -> Result<Self, IngestError> {
        let mut rdr = ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
        let got: Vec<&str> = header.iter().take(expected.len()).collect();
        if got != expected[..got.len().min(expected.len())] || got.len() < min_fields {
            return Err(IngestError::Schema {
                path: path.to_path_buf(),
                line: 1,
                message: format!(
                    "expected header {:?}, found {:?}",
                    expected.join(","),
                    header.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.iter().all(str::is_empty) {
                continue;
            }
            if rec.len() < min_fields {
                return Err(schema(
                    path,
                    line,
                    format!("expected at least {min_fields} fields, found {}", rec.len()),
                ));
            }
            records.push((line, rec));
        }
        Ok(Rows { path, records })
    }
}

fn csv_error(path: &Path, e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IngestError::Io {
            path: path.to_path_buf(),
            source,
        },
        kind => schema(path, line, format!("{kind:?}")),
    }
}

fn schema(path: &Path, line: u64, message: String) -> IngestError {
    IngestError::Schema {
        path: path.to_path_buf(),
        line,
        message,
    }
}

fn field<T: FromStr>(path: &Path, line: u64, name: &str, raw: &str) -> Result<T, IngestError> {
    raw.parse()
        .map_err(|_| schema(path, line, format!("invalid {name} {raw:?}")))
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads `stop_id,lat,lon`; coordinates may be empty. Duplicate ids are rejected.
pub fn parse_stops(path: &Path) -> Result<Vec<Stop>, IngestError> {
    read_stops(path, open(path)?)
}

pub(crate) fn read_stops(path: &Path, reader: impl Read) -> Result<Vec<Stop>, IngestError> {
    let rows = Rows::read(path, reader, &["stop_id", "lat", "lon"], 1)?;
    let mut seen = BTreeSet::new();
    let mut stops = Vec::with_capacity(rows.records.len());
    for (line, rec) in &rows.records {
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(schema(rows.path, *line, "empty stop_id".into()));
        }
        let coord = |i: usize, name: &str| -> Result<Option<f64>, IngestError> {
            match rec.get(i).filter(|s| !s.is_empty()) {
                Some(raw) => field(rows.path, *line, name, raw).map(Some),
                None => Ok(None),
            }
        };
        let stop = Stop::with_coords(id.clone(), coord(1, "lat")?, coord(2, "lon")?)
            .map_err(|e| schema(rows.path, *line, e.to_string()))?;
        if !seen.insert(id.clone()) {
            return Err(schema(
                rows.path,
                *line,
                format!("duplicate stop id {id:?}"),
            ));
        }
        stops.push(stop);
    }
    Ok(stops)
}

/// Reads `line_id,vehicles,trips_per_vehicle[,window:trips ...]`.
pub fn parse_lines(path: &Path) -> Result<Vec<LineHeader>, IngestError> {
    read_lines(path, open(path)?)
}

pub(crate) fn read_lines(path: &Path, reader: impl Read) -> Result<Vec<LineHeader>, IngestError> {
    let rows = Rows::read(
        path,
        reader,
        &["line_id", "vehicles", "trips_per_vehicle"],
        3,
    )?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(rows.records.len());
    for (line, rec) in &rows.records {
        let line_id = rec[0].to_string();
        if line_id.is_empty() {
            return Err(schema(rows.path, *line, "empty line_id".into()));
        }
        if !seen.insert(line_id.clone()) {
            return Err(schema(
                rows.path,
                *line,
                format!("duplicate line id {line_id:?}"),
            ));
        }
        let vehicles: u32 = field(rows.path, *line, "vehicles", &rec[1])?;
        let trips_per_vehicle: u32 = field(rows.path, *line, "trips_per_vehicle", &rec[2])?;
        if vehicles < 1 || trips_per_vehicle < 1 {
            return Err(schema(
                rows.path,
                *line,
                "vehicles and trips_per_vehicle must be at least 1".into(),
            ));
        }
        let mut window_trips = BTreeMap::new();
        for extra in rec.iter().skip(3).filter(|s| !s.is_empty()) {
            let (name, trips) = extra.rsplit_once(':').ok_or_else(|| {
                schema(
                    rows.path,
                    *line,
                    format!("window trips {extra:?} is not window_label:trips"),
                )
            })?;
            let trips: u32 = field(rows.path, *line, "window trips", trips.trim())?;
            if window_trips
                .insert(name.trim().to_string(), trips)
                .is_some()
            {
                return Err(schema(
                    rows.path,
                    *line,
                    format!("window {name:?} listed twice"),
                ));
            }
        }
        out.push(LineHeader {
            line_id,
            vehicles,
            trips_per_vehicle,
            window_trips,
        });
    }
    Ok(out)
}

/// Reads `line_id,seq,stop_id` into per-line stop sequences. `seq` must be
/// 0-based and contiguous within each line.
pub fn parse_routes(path: &Path) -> Result<BTreeMap<String, Vec<String>>, IngestError> {
    read_routes(path, open(path)?)
}

pub(crate) fn read_routes(
    path: &Path,
    reader: impl Read,
) -> Result<BTreeMap<String, Vec<String>>, IngestError> {
    let rows = Rows::read(path, reader, &["line_id", "seq", "stop_id"], 3)?;
    let mut by_line: BTreeMap<String, Vec<(u64, u64, String)>> = BTreeMap::new();
    for (line, rec) in &rows.records {
        let seq: u64 = field(rows.path, *line, "seq", &rec[1])?;
        by_line
            .entry(rec[0].to_string())
            .or_default()
            .push((seq, *line, rec[2].to_string()));
    }
    let mut routes = BTreeMap::new();
    for (line_id, mut entries) in by_line {
        entries.sort_by_key(|e| e.0);
        for (expected, (seq, line, _)) in entries.iter().enumerate() {
            if *seq != expected as u64 {
                return Err(schema(
                    rows.path,
                    *line,
                    format!("line {line_id:?}: seq {seq} where {expected} expected (0-based, contiguous)"),
                ));
            }
        }
        routes.insert(line_id, entries.into_iter().map(|e| e.2).collect());
    }
    Ok(routes)
}

/// Reads `origin_stop,destination_stop,count[,hhmm]`.
pub fn parse_demand(path: &Path) -> Result<Vec<TraversalEvent>, IngestError> {
    read_demand(path, open(path)?)
}

pub(crate) fn read_demand(
    path: &Path,
    reader: impl Read,
) -> Result<Vec<TraversalEvent>, IngestError> {
    let rows = Rows::read(
        path,
        reader,
        &["origin_stop", "destination_stop", "count", "hhmm"],
        3,
    )?;
    let mut events = Vec::with_capacity(rows.records.len());
    for (line, rec) in &rows.records {
        let count: u64 = field(rows.path, *line, "count", &rec[2])?;
        let timestamp = match rec.get(3).filter(|s| !s.is_empty()) {
            Some(raw) => Some(
                raw.parse::<MinuteOfDay>()
                    .map_err(|e| schema(rows.path, *line, e.to_string()))?,
            ),
            None => None,
        };
        let event = TraversalEvent::new(&rec[0], &rec[1], count, timestamp)
            .map_err(|e| schema(rows.path, *line, e.to_string()))?;
        events.push(event);
    }
    Ok(events)
}

/// Joins line headers with routes. Every line needs a route and every route a line.
pub fn join_lines(
    headers: Vec<LineHeader>,
    mut routes: BTreeMap<String, Vec<String>>,
) -> Result<Vec<LineRecord>, IngestError> {
    let mut lines = Vec::with_capacity(headers.len());
    for h in headers {
        let route = routes
            .remove(&h.line_id)
            .ok_or_else(|| IngestError::Invalid(format!("line {:?} has no route", h.line_id)))?;
        lines.push(
            LineRecord::new(h.line_id, h.vehicles, h.trips_per_vehicle, route)?
                .with_window_trips(h.window_trips),
        );
    }
    if let Some(orphan) = routes.keys().next() {
        return Err(IngestError::Invalid(format!(
            "route given for unknown line {orphan:?}"
        )));
    }
    Ok(lines)
}

/// Reads lines and routes, checking route stops against `stops` when given.
pub fn parse_line_records(
    lines: &Path,
    routes: &Path,
    stops: Option<&[Stop]>,
) -> Result<Vec<LineRecord>, IngestError> {
    let records = join_lines(parse_lines(lines)?, parse_routes(routes)?)?;
    if let Some(stops) = stops {
        let known: BTreeSet<&str> = stops.iter().map(|s| s.id.as_str()).collect();
        check_routes(&records, &known, routes)?;
    }
    Ok(records)
}

fn check_routes(
    lines: &[LineRecord],
    known: &BTreeSet<&str>,
    path: &Path,
) -> Result<(), IngestError> {
    for line in lines {
        if let Some(stop) = line.route().iter().find(|s| !known.contains(s.as_str())) {
            return Err(IngestError::Invalid(format!(
                "{}: line {:?} references unknown stop {stop:?}",
                path.display(),
                line.line_id()
            )));
        }
    }
    Ok(())
}

/// Reads and cross-validates all four tables.
pub fn parse_inputs(paths: &InputPaths) -> Result<Dataset, IngestError> {
    let stops = parse_stops(&paths.stops)?;
    let lines = parse_line_records(&paths.lines, &paths.routes, Some(&stops))?;
    let events = parse_demand(&paths.demand)?;
    let known: BTreeSet<&str> = stops.iter().map(|s| s.id.as_str()).collect();
    for (i, e) in events.iter().enumerate() {
        for stop in [&e.origin, &e.destination] {
            if !known.contains(stop.as_str()) {
                return Err(IngestError::Invalid(format!(
                    "{}: record {} references unknown stop {stop:?}",
                    paths.demand.display(),
                    i + 1
                )));
            }
        }
    }
    Ok(Dataset {
        stops,
        lines,
        events,
    })
}
