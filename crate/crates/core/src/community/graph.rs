use std::collections::{BTreeMap, HashMap};

use crate::model::{Layer, PairedNetwork};
use crate::scalar::Scalar;

use super::CommunityError;

/// Undirected weighted graph with optional self-loops.
///
/// Adjacency of node `a` maps each neighbor to the weight of `{a, b}`. The
/// adjacency matrix entry of a self-loop of weight `s` is `2s`, so node
/// strength is `Σ_b w(a, b) + 2 s(a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UndirectedWeightedGraph<T> {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<BTreeMap<usize, T>>,
    self_loops: Vec<T>,
}

impl<T: Scalar> UndirectedWeightedGraph<T> {
    pub fn new(nodes: impl IntoIterator<Item = impl Into<String>>) -> Result<Self, CommunityError> {
        let nodes: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, id) in nodes.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(CommunityError::DuplicateNode(id.clone()));
            }
        }
        Ok(UndirectedWeightedGraph {
            adj: vec![BTreeMap::new(); nodes.len()],
            self_loops: vec![T::zero(); nodes.len()],
            nodes,
            index,
        })
    }

    /// Builds a graph from `(a, b, weight)` triples; repeated pairs accumulate.
    pub fn from_edges<'a>(
        nodes: impl IntoIterator<Item = impl Into<String>>,
        edges: impl IntoIterator<Item = (&'a str, &'a str, T)>,
    ) -> Result<Self, CommunityError> {
        let mut g = Self::new(nodes)?;
        for (a, b, w) in edges {
            let ia = g
                .index_of(a)
                .ok_or_else(|| CommunityError::UnknownNode(a.to_string()))?;
            let ib = g
                .index_of(b)
                .ok_or_else(|| CommunityError::UnknownNode(b.to_string()))?;
            g.add_edge(ia, ib, w)?;
        }
        Ok(g)
    }

    /// Adds `w` to edge `{a, b}`, or to the self-loop of `a` when `a == b`.
    /// Edge weights must be positive, self-loop weights non-negative.
    pub fn add_edge(&mut self, a: usize, b: usize, w: T) -> Result<(), CommunityError> {
        let n = self.nodes.len();
        if a >= n || b >= n {
            return Err(CommunityError::UnknownNode(format!("#{}", a.max(b))));
        }
        let valid = w.is_finite()
            && if a == b {
                w >= T::zero()
            } else {
                w > T::zero()
            };
        if !valid {
            return Err(CommunityError::InvalidWeight(w.as_f64()));
        }
        if a == b {
            self.self_loops[a] = self.self_loops[a] + w;
        } else {
            let slot = self.adj[a].entry(b).or_insert_with(T::zero);
            *slot = *slot + w;
            let slot = self.adj[b].entry(a).or_insert_with(T::zero);
            *slot = *slot + w;
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of distinct unordered non-loop pairs.
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn node_ids(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_id(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.adj[i].iter().map(|(&j, &w)| (j, w))
    }

    pub fn self_loop(&self, i: usize) -> T {
        self.self_loops[i]
    }

    pub fn weight(&self, a: usize, b: usize) -> T {
        if a == b {
            self.self_loops[a]
        } else {
            self.adj[a].get(&b).copied().unwrap_or_else(T::zero)
        }
    }

    pub fn strength(&self, i: usize) -> T {
        self.adj[i].values().copied().sum::<T>() + self.self_loops[i] + self.self_loops[i]
    }

    /// `2m`: sum of all node strengths.
    pub fn total_weight(&self) -> T {
        (0..self.nodes.len()).map(|i| self.strength(i)).sum()
    }

    /// Unordered pairs `(a, b, w)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, nbrs)| nbrs.range(a + 1..).map(move |(&b, &w)| (a, b, w)))
    }

    /// Returns a copy with every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        for nbrs in &mut out.adj {
            for w in nbrs.values_mut() {
                *w = *w * factor;
            }
        }
        for s in &mut out.self_loops {
            *s = *s * factor;
        }
        out
    }
}

/// Undirected view of one layer: `{a, b}` weighs `w(a→b) + w(b→a)`, pairs
/// summing to zero are dropped. Nodes are the stops incident to any edge of
/// the network, in id order, so stops whose edges all weigh zero in this
/// layer appear as isolated nodes.
pub fn symmetrize<T: Scalar>(
    net: &PairedNetwork<T>,
    layer: Layer,
) -> Result<UndirectedWeightedGraph<T>, CommunityError> {
    let nodes: Vec<&str> = net.connected_stops().into_iter().collect();
    let mut g = UndirectedWeightedGraph::new(nodes)?;
    let mut any = false;
    for (key, weights) in net.edges() {
        let w = weights.get(layer);
        if w > T::zero() {
            let a = g.index_of(&key.origin).expect("connected stop");
            let b = g.index_of(&key.destination).expect("connected stop");
            g.add_edge(a, b, w)?;
            any = true;
        }
    }
    if !any {
        return Err(CommunityError::NoPositiveEdges);
    }
    Ok(g)
}

/// Collapses each community of `assignment` into one node `c<id>`, summing
/// cross weights into edges and internal weights (plus existing loops) into
/// the self-loop.
pub fn quotient<T: Scalar>(
    g: &UndirectedWeightedGraph<T>,
    assignment: &[usize],
) -> Result<UndirectedWeightedGraph<T>, CommunityError> {
    if assignment.len() != g.node_count() {
        return Err(CommunityError::Uncovered(format!(
            "assignment covers {} of {} nodes",
            assignment.len(),
            g.node_count()
        )));
    }
    let k = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut q = UndirectedWeightedGraph::new((0..k).map(|c| format!("c{c}")))?;
    for i in 0..g.node_count() {
        let ci = assignment[i];
        q.add_edge(ci, ci, g.self_loop(i))?;
    }
    for (a, b, w) in g.edges() {
        q.add_edge(assignment[a], assignment[b], w)?;
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EdgeKey, EdgeWeights, Stop, FULL_DAY};

    fn net(edges: &[(&str, &str, f64)]) -> PairedNetwork<f64> {
        let mut stops: Vec<&str> = edges.iter().flat_map(|e| [e.0, e.1]).collect();
        stops.sort();
        stops.dedup();
        let map = edges
            .iter()
            .map(|&(a, b, w)| {
                (
                    EdgeKey::new(a, b),
                    EdgeWeights {
                        supply: w,
                        demand: 0.0,
                    },
                )
            })
            .collect();
        PairedNetwork::from_edges(FULL_DAY, stops.into_iter().map(Stop::new), map).unwrap()
    }

    #[test]
    fn symmetrize_examples() {
        let g = symmetrize(&net(&[("a", "b", 3.0), ("b", "a", 2.0)]), Layer::Supply).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(0, 1), 5.0);

        let g = symmetrize(&net(&[("a", "b", 3.0)]), Layer::Supply).unwrap();
        assert_eq!(g.weight(0, 1), 3.0);

        assert!(matches!(
            symmetrize(&net(&[("a", "b", 3.0)]), Layer::Demand),
            Err(CommunityError::NoPositiveEdges)
        ));
    }

    #[test]
    fn zero_weight_edges_keep_endpoints_as_nodes() {
        let g = symmetrize(&net(&[("a", "b", 3.0), ("b", "c", 0.0)]), Layer::Supply).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.strength(g.index_of("c").unwrap()), 0.0);
    }

    #[test]
    fn strength_counts_loops_twice() {
        let mut g = UndirectedWeightedGraph::<f64>::new(["a", "b"]).unwrap();
        g.add_edge(0, 1, 2.0).unwrap();
        g.add_edge(0, 0, 1.5).unwrap();
        assert_eq!(g.strength(0), 5.0);
        assert_eq!(g.total_weight(), 7.0);
        assert!(g.add_edge(0, 1, 0.0).is_err());
        assert!(g.add_edge(0, 1, -1.0).is_err());
        assert!(UndirectedWeightedGraph::<f64>::new(["a", "a"]).is_err());
    }

    #[test]
    fn quotient_preserves_total_weight() {
        let g = UndirectedWeightedGraph::from_edges(
            ["a", "b", "c", "d"],
            [
                ("a", "b", 1.0),
                ("b", "c", 2.0),
                ("c", "d", 3.0),
                ("a", "a", 0.5),
            ],
        )
        .unwrap();
        let q = quotient(&g, &[0, 0, 1, 1]).unwrap();
        assert_eq!(q.node_count(), 2);
        assert_eq!(q.self_loop(0), 1.5);
        assert_eq!(q.self_loop(1), 3.0);
        assert_eq!(q.weight(0, 1), 2.0);
        assert_eq!(q.total_weight(), g.total_weight());
    }
}
