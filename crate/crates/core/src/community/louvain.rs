use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

use super::modularity::dense_labels;
use super::{modularity, CommunityError, CommunityPartition, UndirectedWeightedGraph};

pub const DEFAULT_SEED: u64 = 42;

const MAX_SWEEPS: usize = 10_000;

/// Flat partition reached after one aggregation level, with the modularity
/// at the optimized resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct LouvainLevel<T> {
    pub partition: CommunityPartition<T>,
    pub objective: T,
}

/// Louvain modularity optimization.
///
/// Each level visits nodes in a seeded random order, moving a node to the
/// neighboring community of largest gain when that gain is strictly positive
/// (ties go to the lowest community id), until a full sweep moves nothing.
/// Communities are then collapsed into nodes and the process repeats until a
/// level moves no node.
#[derive(Debug, Clone)]
pub struct Louvain<T> {
    resolution: T,
    seed: u64,
    initial_order: Option<Vec<usize>>,
}

impl<T: Scalar> Default for Louvain<T> {
    fn default() -> Self {
        Louvain {
            resolution: T::one(),
            seed: DEFAULT_SEED,
            initial_order: None,
        }
    }
}

impl<T: Scalar> Louvain<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn resolution(mut self, resolution: T) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Visit order for the first level in place of the seeded shuffle.
    /// Must be a permutation of the node indices.
    pub fn initial_order(mut self, order: Vec<usize>) -> Self {
        self.initial_order = Some(order);
        self
    }

    /// Runs to convergence and returns every level that moved a node. The
    /// result always holds at least one level.
    pub fn run(
        &self,
        g: &UndirectedWeightedGraph<T>,
    ) -> Result<Vec<LouvainLevel<T>>, CommunityError> {
        let gamma = self.resolution;
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(CommunityError::InvalidResolution(gamma.as_f64()));
        }
        let two_m = g.total_weight();
        if !(two_m > T::zero()) {
            return Err(CommunityError::NoPositiveEdges);
        }
        let n = g.node_count();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let first_order = match &self.initial_order {
            Some(order) => {
                check_permutation(order, n)?;
                order.clone()
            }
            None => shuffled(n, &mut rng),
        };

        let mut level = Level::from_graph(g);
        // Original node → node of the current level.
        let mut flat: Vec<usize> = (0..n).collect();
        let mut levels = Vec::new();
        let mut order = first_order;
        loop {
            let reindexed = level.reindex(&order);
            let (communities, moved) = reindexed.local_moves(gamma, two_m);
            if !moved && !levels.is_empty() {
                break;
            }
            // `communities` is indexed by position in `order`.
            let mut position = vec![0; order.len()];
            for (p, &node) in order.iter().enumerate() {
                position[node] = p;
            }
            for f in flat.iter_mut() {
                *f = communities[position[*f]];
            }
            let partition = CommunityPartition::from_assignment(g, &flat)?;
            let objective = modularity(g, partition.assignment(), gamma)?;
            levels.push(LouvainLevel {
                partition,
                objective,
            });
            if !moved {
                break;
            }
            level = reindexed.aggregate(&communities);
            order = shuffled(level.len(), &mut rng);
        }
        Ok(levels)
    }

    /// Final partition of [`Louvain::run`].
    pub fn partition(
        &self,
        g: &UndirectedWeightedGraph<T>,
    ) -> Result<CommunityPartition<T>, CommunityError> {
        let mut levels = self.run(g)?;
        Ok(levels.pop().expect("at least one level").partition)
    }
}

/// Louvain partition of `g` at `resolution` with visit order drawn from `seed`.
/// The partition's `q` is standard modularity at resolution 1.
pub fn louvain<T: Scalar>(
    g: &UndirectedWeightedGraph<T>,
    resolution: T,
    seed: u64,
) -> Result<CommunityPartition<T>, CommunityError> {
    Louvain::new()
        .resolution(resolution)
        .seed(seed)
        .partition(g)
}

fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

fn check_permutation(order: &[usize], n: usize) -> Result<(), CommunityError> {
    if order.len() != n {
        return Err(CommunityError::InvalidOrder(format!(
            "{} entries for {} nodes",
            order.len(),
            n
        )));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(CommunityError::InvalidOrder(format!(
                "entry {i} repeated or out of range"
            )));
        }
    }
    Ok(())
}

/// Compact graph of one aggregation level.
#[derive(Debug, Clone)]
struct Level<T> {
    adj: Vec<BTreeMap<usize, T>>,
    loops: Vec<T>,
}

impl<T: Scalar> Level<T> {
    fn from_graph(g: &UndirectedWeightedGraph<T>) -> Self {
        let n = g.node_count();
        Level {
            adj: (0..n).map(|i| g.neighbors(i).collect()).collect(),
            loops: (0..n).map(|i| g.self_loop(i)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.loops.len()
    }

    fn strength(&self, i: usize) -> T {
        self.adj[i].values().copied().sum::<T>() + self.loops[i] + self.loops[i]
    }

    /// Relabels node `order[p]` as `p`.
    fn reindex(&self, order: &[usize]) -> Self {
        let mut position = vec![0; order.len()];
        for (p, &node) in order.iter().enumerate() {
            position[node] = p;
        }
        Level {
            adj: order
                .iter()
                .map(|&node| {
                    self.adj[node]
                        .iter()
                        .map(|(&j, &w)| (position[j], w))
                        .collect()
                })
                .collect(),
            loops: order.iter().map(|&node| self.loops[node]).collect(),
        }
    }

    /// Phase one. Visits nodes in index order; returns community labels
    /// numbered by first appearance, and whether any node moved.
    fn local_moves(&self, gamma: T, two_m: T) -> (Vec<usize>, bool) {
        let n = self.len();
        let k: Vec<T> = (0..n).map(|i| self.strength(i)).collect();
        let mut community: Vec<usize> = (0..n).collect();
        let mut tot = k.clone();
        let tol_unit = T::epsilon() * T::lit(16.0);
        let mut moved_any = false;
        for _ in 0..MAX_SWEEPS {
            let mut moved = false;
            for i in 0..n {
                let ci = community[i];
                let ki = k[i];
                let mut links: BTreeMap<usize, T> = BTreeMap::new();
                for (&j, &w) in &self.adj[i] {
                    let slot = links.entry(community[j]).or_insert_with(T::zero);
                    *slot = *slot + w;
                }
                tot[ci] = tot[ci] - ki;
                let gain = |c: usize, w_in: T| w_in - gamma * tot[c] * ki / two_m;
                let stay = gain(ci, links.get(&ci).copied().unwrap_or_else(T::zero));
                let mut best = ci;
                let mut best_gain = stay;
                let tol = tol_unit * ki;
                for (&c, &w_in) in &links {
                    if c == ci {
                        continue;
                    }
                    let g = gain(c, w_in);
                    let improves_stay = g > stay + tol;
                    let beats_best = if best == ci {
                        improves_stay
                    } else {
                        g > best_gain
                    };
                    if beats_best {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] = tot[best] + ki;
                if best != ci {
                    community[i] = best;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
            moved_any = true;
        }
        (dense_labels(&community), moved_any)
    }

    /// Phase two: one node per community, internal weight folded into loops.
    fn aggregate(&self, community: &[usize]) -> Self {
        let k = community.iter().copied().max().map_or(0, |m| m + 1);
        let mut adj = vec![BTreeMap::new(); k];
        let mut loops = vec![T::zero(); k];
        for i in 0..self.len() {
            let ci = community[i];
            loops[ci] = loops[ci] + self.loops[i];
            for (&j, &w) in self.adj[i].range(i + 1..) {
                let cj = community[j];
                if ci == cj {
                    loops[ci] = loops[ci] + w;
                } else {
                    for (a, b) in [(ci, cj), (cj, ci)] {
                        let slot: &mut T = adj[a].entry(b).or_insert_with(T::zero);
                        *slot = *slot + w;
                    }
                }
            }
        }
        Level { adj, loops }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::quotient;

    fn cliques(sizes: &[usize], bridges: &[(usize, usize)]) -> UndirectedWeightedGraph<f64> {
        let n: usize = sizes.iter().sum();
        let mut g = UndirectedWeightedGraph::new((0..n).map(|i| format!("n{i}"))).unwrap();
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

    #[test]
    fn disconnected_triangles_split_in_two() {
        let g = cliques(&[3, 3], &[]);
        let p = louvain(&g, 1.0, DEFAULT_SEED).unwrap();
        assert_eq!(p.k(), 2);
        assert!((p.q() - 0.5).abs() < 1e-12);
        assert_eq!(p.community_of("n0"), p.community_of("n2"));
        assert_ne!(p.community_of("n0"), p.community_of("n3"));
    }

    #[test]
    fn k5_is_one_community() {
        let g = cliques(&[5], &[]);
        let p = louvain(&g, 1.0, DEFAULT_SEED).unwrap();
        assert_eq!(p.k(), 1);
        assert!(p.q().abs() < 1e-12);
    }

    #[test]
    fn bridged_triangles_cut_the_bridge() {
        let g = cliques(&[3, 3], &[(2, 3)]);
        for seed in 0..20 {
            let p = louvain(&g, 1.0, seed).unwrap();
            assert_eq!(p.assignment(), &[0, 0, 0, 1, 1, 1], "seed {seed}");
            assert!((p.q() - 5.0 / 14.0).abs() < 1e-12);
        }
    }

    #[test]
    fn objective_non_decreasing_across_levels() {
        let g = cliques(&[4, 4, 4, 3], &[(0, 4), (5, 8), (9, 12), (13, 1)]);
        let levels = Louvain::new().run(&g).unwrap();
        for pair in levels.windows(2) {
            assert!(pair[1].objective >= pair[0].objective - 1e-12);
        }
    }

    #[test]
    fn aggregated_singletons_keep_flat_modularity() {
        let g = cliques(&[4, 4, 3], &[(0, 4), (5, 8), (9, 1)]);
        for level in Louvain::new().seed(7).run(&g).unwrap() {
            let assignment = level.partition.assignment();
            let q = quotient(&g, assignment).unwrap();
            let singletons: Vec<usize> = (0..q.node_count()).collect();
            let flat_q = modularity(&g, assignment, 1.0).unwrap();
            assert!((modularity(&q, &singletons, 1.0).unwrap() - flat_q).abs() < 1e-12);
        }
    }

    #[test]
    fn high_resolution_splits_more() {
        let g = cliques(&[3, 3], &[(2, 3)]);
        let low = louvain(&g, 0.1, DEFAULT_SEED).unwrap();
        let high = louvain(&g, 10.0, DEFAULT_SEED).unwrap();
        assert!(low.k() <= 2);
        assert!(high.k() > 2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = cliques(&[3], &[]);
        assert!(matches!(
            louvain(&g, 0.0, 1),
            Err(CommunityError::InvalidResolution(_))
        ));
        assert!(matches!(
            Louvain::new().initial_order(vec![0, 0, 1]).run(&g),
            Err(CommunityError::InvalidOrder(_))
        ));
        let empty = UndirectedWeightedGraph::<f64>::new(["a", "b"]).unwrap();
        assert!(matches!(
            louvain(&empty, 1.0, 1),
            Err(CommunityError::NoPositiveEdges)
        ));
    }

    #[test]
    fn isolated_nodes_stay_alone() {
        let mut g = cliques(&[3], &[]);
        let mut with_iso = UndirectedWeightedGraph::new(["n0", "n1", "n2", "iso"]).unwrap();
        for (a, b, w) in g.edges().collect::<Vec<_>>() {
            with_iso.add_edge(a, b, w).unwrap();
        }
        g = with_iso;
        let p = louvain(&g, 1.0, DEFAULT_SEED).unwrap();
        assert_eq!(p.k(), 2);
        assert_ne!(p.community_of("iso"), p.community_of("n0"));
    }

    #[test]
    fn f32_graph_runs() {
        let g = UndirectedWeightedGraph::<f32>::from_edges(
            ["a", "b", "c", "d", "e", "f"],
            [
                ("a", "b", 1.0),
                ("b", "c", 1.0),
                ("a", "c", 1.0),
                ("d", "e", 1.0),
                ("e", "f", 1.0),
                ("d", "f", 1.0),
                ("c", "d", 0.1),
            ],
        )
        .unwrap();
        assert_eq!(louvain(&g, 1.0, 3).unwrap().k(), 2);
    }
}
