//! Overload and waste indices on the edges cut by each layer's communities.
//!
//! For an edge with supply `w_s` and demand `w_d`, the overload index is
//! `IS = w_s / w_smax − w_d / w_dmax` and the waste index is `ID = −IS`. A cut
//! edge of the supply partition with `IS < 0` carries proportionally more
//! passengers than vehicles and is a bottleneck; a cut edge of the demand
//! partition with `ID < 0` carries proportionally more vehicles than
//! passengers and is waste.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use log::warn;
use thiserror::Error;

use crate::community::{
    inter_community_edges, symmetrize, CommunityError, CommunityPartition, Louvain, DEFAULT_SEED,
};
use crate::ingest::LineRecord;
use crate::model::{layer_max, normalized_weight, EdgeKey, Layer, ModelError, PairedNetwork};
use crate::scalar::{cmp, Scalar};

/// Indices with magnitude below this are balanced.
pub const BALANCE_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnoseError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Community(#[from] CommunityError),
}

/// `w_s / w_smax − w_d / w_dmax`.
pub fn overload_index<T: Scalar>(w_s: T, w_smax: T, w_d: T, w_dmax: T) -> Result<T, ModelError> {
    let s = normalized_weight(w_s, w_smax)?.value();
    let d = normalized_weight(w_d, w_dmax)?.value();
    Ok(s - d)
}

/// `w_d / w_dmax − w_s / w_smax`, the exact negation of [`overload_index`].
pub fn waste_index<T: Scalar>(w_s: T, w_smax: T, w_d: T, w_dmax: T) -> Result<T, ModelError> {
    let s = normalized_weight(w_s, w_smax)?.value();
    let d = normalized_weight(w_d, w_dmax)?.value();
    Ok(d - s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Bottleneck,
    Waste,
    Balanced,
    /// Cut edge whose imbalance points the other way from what its partition
    /// looks for.
    Unclassified,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Bottleneck => "bottleneck",
            Classification::Waste => "waste",
            Classification::Balanced => "balanced",
            Classification::Unclassified => "unclassified",
        }
    }

    /// Classification of a cut edge of the `partition` layer's communities.
    pub fn of<T: Scalar>(partition: Layer, is_value: T) -> Self {
        let eps = T::lit(BALANCE_EPS);
        if is_value.abs() < eps {
            return Classification::Balanced;
        }
        match (partition, is_value < T::zero()) {
            (Layer::Supply, true) => Classification::Bottleneck,
            (Layer::Demand, false) => Classification::Waste,
            _ => Classification::Unclassified,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosisRecord<T> {
    pub edge: EdgeKey,
    pub is_value: T,
    pub id_value: T,
    pub classification: Classification,
    pub source_partition: Layer,
    /// Lines running the edge, sorted by id.
    pub lines: Vec<String>,
}

impl<T: Scalar> DiagnosisRecord<T> {
    /// The index that ranks this record: `IS` for supply cuts, `ID` for demand cuts.
    pub fn severity(&self) -> T {
        match self.source_partition {
            Layer::Supply => self.is_value,
            Layer::Demand => self.id_value,
        }
    }
}

/// Outcome of scanning the cut edges of one layer's partition.
#[derive(Debug, Clone)]
pub struct Diagnosis<T> {
    pub layer: Layer,
    pub partition: CommunityPartition<T>,
    /// Bottlenecks (supply) or waste (demand), most severe first.
    pub flagged: Vec<DiagnosisRecord<T>>,
    /// Remaining cut edges: balanced or of the opposite sign.
    pub other: Vec<DiagnosisRecord<T>>,
}

impl<T: Scalar> Diagnosis<T> {
    pub fn cut_edge_count(&self) -> usize {
        self.flagged.len() + self.other.len()
    }
}

/// Partitions the symmetrized `layer` with Louvain at resolution 1 and scores
/// every directed edge the partition cuts.
pub fn diagnose_layer<T: Scalar>(
    net: &PairedNetwork<T>,
    layer: Layer,
    seed: u64,
) -> Result<Diagnosis<T>, DiagnoseError> {
    let w_smax = layer_max(net, Layer::Supply)?;
    let w_dmax = layer_max(net, Layer::Demand)?;
    let graph = symmetrize(net, layer)?;
    let partition = Louvain::new().seed(seed).partition(&graph)?;
    let mut flagged = Vec::new();
    let mut other = Vec::new();
    for edge in inter_community_edges(net, &partition)? {
        let w = *net.weights(&edge).expect("cut edge belongs to the network");
        let is_value = overload_index(w.supply, w_smax, w.demand, w_dmax)?;
        let id_value = waste_index(w.supply, w_smax, w.demand, w_dmax)?;
        let classification = Classification::of(layer, is_value);
        let record = DiagnosisRecord {
            edge,
            is_value,
            id_value,
            classification,
            source_partition: layer,
            lines: Vec::new(),
        };
        if matches!(
            classification,
            Classification::Bottleneck | Classification::Waste
        ) {
            flagged.push(record);
        } else {
            other.push(record);
        }
    }
    flagged.sort_by(by_severity);
    other.sort_by(by_severity);
    Ok(Diagnosis {
        layer,
        partition,
        flagged,
        other,
    })
}

fn by_severity<T: Scalar>(a: &DiagnosisRecord<T>, b: &DiagnosisRecord<T>) -> Ordering {
    cmp(&a.severity(), &b.severity()).then_with(|| a.edge.cmp(&b.edge))
}

/// Bottleneck edges: supply-partition cut edges with `IS < 0`, most negative first.
pub fn find_bottlenecks<T: Scalar>(
    net: &PairedNetwork<T>,
) -> Result<Vec<DiagnosisRecord<T>>, DiagnoseError> {
    Ok(diagnose_layer(net, Layer::Supply, DEFAULT_SEED)?.flagged)
}

/// Waste edges: demand-partition cut edges with `ID < 0`, most negative first.
pub fn find_waste<T: Scalar>(
    net: &PairedNetwork<T>,
) -> Result<Vec<DiagnosisRecord<T>>, DiagnoseError> {
    Ok(diagnose_layer(net, Layer::Demand, DEFAULT_SEED)?.flagged)
}

/// Attaches to each record every line whose route runs its edge in that
/// direction. Records no line runs keep an empty list and log a warning.
pub fn attribute_lines<T: Scalar>(
    mut records: Vec<DiagnosisRecord<T>>,
    lines: &[LineRecord],
) -> Vec<DiagnosisRecord<T>> {
    for record in &mut records {
        let ids: BTreeSet<&str> = lines
            .iter()
            .filter(|line| line.serves(&record.edge))
            .map(LineRecord::line_id)
            .collect();
        if ids.is_empty() {
            warn!("no line runs flagged edge {}", record.edge);
        }
        record.lines = ids.into_iter().map(str::to_string).collect();
    }
    records
}
