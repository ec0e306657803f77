use std::collections::HashMap;

use crate::scalar::Scalar;

use super::{CommunityError, UndirectedWeightedGraph};

/// Weighted Newman-Girvan modularity with resolution `γ`:
/// `Q = Σ_c [ in_c / 2m − γ (tot_c / 2m)² ]`, where `in_c` sums adjacency
/// entries inside community `c` and `tot_c` sums member strengths.
/// `in_c` is computed as `tot_c` less the weight leaving `c`.
pub fn modularity<T: Scalar>(
    g: &UndirectedWeightedGraph<T>,
    assignment: &[usize],
    resolution: T,
) -> Result<T, CommunityError> {
    if assignment.len() != g.node_count() {
        return Err(CommunityError::Uncovered(format!(
            "assignment covers {} of {} nodes",
            assignment.len(),
            g.node_count()
        )));
    }
    let two_m = g.total_weight();
    if !(two_m > T::zero()) {
        return Err(CommunityError::NoPositiveEdges);
    }
    let k = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut tot = vec![T::zero(); k];
    let mut cut = vec![T::zero(); k];
    for i in 0..g.node_count() {
        let c = assignment[i];
        tot[c] = tot[c] + g.strength(i);
    }
    for (a, b, w) in g.edges() {
        let (ca, cb) = (assignment[a], assignment[b]);
        if ca != cb {
            cut[ca] = cut[ca] + w;
            cut[cb] = cut[cb] + w;
        }
    }
    Ok(tot
        .into_iter()
        .zip(cut)
        .map(|(t, x)| {
            let share = t / two_m;
            (t - x) / two_m - resolution * share * share
        })
        .sum())
}

/// Assignment of every graph node to a community, with its modularity.
///
/// Community ids are dense, `0..k`, numbered by first appearance in node order.
/// `q` is the resolution-1 modularity of the assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityPartition<T> {
    assignment: Vec<usize>,
    k: usize,
    q: T,
    lookup: HashMap<String, usize>,
}

impl<T: Scalar> CommunityPartition<T> {
    /// Relabels `raw` densely and evaluates its modularity on `g`.
    pub fn from_assignment(
        g: &UndirectedWeightedGraph<T>,
        raw: &[usize],
    ) -> Result<Self, CommunityError> {
        let assignment = dense_labels(raw);
        let q = modularity(g, &assignment, T::one())?;
        let k = assignment.iter().copied().max().map_or(0, |m| m + 1);
        let lookup = g
            .node_ids()
            .iter()
            .cloned()
            .zip(assignment.iter().copied())
            .collect();
        Ok(CommunityPartition {
            assignment,
            k,
            q,
            lookup,
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Number of communities.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn community_of(&self, node_id: &str) -> Option<usize> {
        self.lookup.get(node_id).copied()
    }

    /// Node indices of each community.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

/// Renumbers labels to `0..k` by first appearance.
pub fn dense_labels(raw: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    raw.iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}
