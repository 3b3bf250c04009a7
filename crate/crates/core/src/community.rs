//! Static reference communities.
//!
//! All slices are folded into a single weighted graph whose edge weights
//! count in how many slices the edge occurs, then partitioned with the
//! Louvain method (local moves followed by community contraction, repeated
//! until a level produces no move).
//!
//! Move gains are compared in exact integer arithmetic, so ties are real
//! ties and the lowest community id wins them.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ids::{CommunityId, NodeId};
use crate::network::DynamicAttributedNetwork;

/// Undirected graph with positive integer edge weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    adjacency: Vec<Vec<(NodeId, u64)>>,
}

impl WeightedGraph {
    /// Builds a graph from weighted edges; repeated pairs accumulate.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId, u64)]) -> Result<Self> {
        let mut maps: Vec<BTreeMap<NodeId, u64>> = vec![BTreeMap::new(); node_count];
        for &(u, v, w) in edges {
            if u.index() >= node_count {
                return Err(Error::UnknownNode(u.index()));
            }
            if v.index() >= node_count {
                return Err(Error::UnknownNode(v.index()));
            }
            if u == v {
                return Err(Error::Consistency(format!("self-loop on node {u}")));
            }
            if w == 0 {
                continue;
            }
            *maps[u.index()].entry(v).or_default() += w;
            *maps[v.index()].entry(u).or_default() += w;
        }
        Ok(WeightedGraph {
            adjacency: maps.into_iter().map(|m| m.into_iter().collect()).collect(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, u64)] {
        &self.adjacency[v.index()]
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> u64 {
        let list = &self.adjacency[u.index()];
        list.binary_search_by_key(&v, |&(n, _)| n)
            .map(|i| list[i].1)
            .unwrap_or(0)
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, u64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let u = NodeId::from(u);
            list.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub fn total_weight(&self) -> u64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    pub fn strength(&self, v: NodeId) -> u64 {
        self.adjacency[v.index()].iter().map(|&(_, w)| w).sum()
    }
}

/// A total partition of the nodes into communities `0..p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityStructure {
    assignment: Vec<CommunityId>,
    communities: Vec<Vec<NodeId>>,
}

impl CommunityStructure {
    /// Builds a partition from arbitrary per-node labels. Communities are
    /// renumbered in order of their smallest member.
    pub fn from_labels<L: Ord + Copy>(labels: &[L]) -> Self {
        let mut renumber: BTreeMap<L, u32> = BTreeMap::new();
        let mut assignment = Vec::with_capacity(labels.len());
        let mut communities: Vec<Vec<NodeId>> = Vec::new();
        for (v, &label) in labels.iter().enumerate() {
            let next = renumber.len() as u32;
            let c = *renumber.entry(label).or_insert(next);
            if c as usize == communities.len() {
                communities.push(Vec::new());
            }
            communities[c as usize].push(NodeId::from(v));
            assignment.push(CommunityId(c));
        }
        CommunityStructure {
            assignment,
            communities,
        }
    }

    pub fn singletons(node_count: usize) -> Self {
        Self::from_labels(&(0..node_count).collect::<Vec<_>>())
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn community_of(&self, v: NodeId) -> Result<CommunityId> {
        self.assignment
            .get(v.index())
            .copied()
            .ok_or(Error::UnassignedNode(v.index()))
    }

    pub fn assignment(&self) -> &[CommunityId] {
        &self.assignment
    }

    pub fn members(&self, c: CommunityId) -> &[NodeId] {
        &self.communities[c.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = CommunityId> {
        (0..self.communities.len() as u32).map(CommunityId)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.communities.iter().map(Vec::len).collect()
    }
}

/// Folds all slices into one graph weighted by occurrence count.
pub fn aggregate(net: &DynamicAttributedNetwork) -> WeightedGraph {
    let mut counts: BTreeMap<(NodeId, NodeId), u64> = BTreeMap::new();
    for j in 0..net.num_slices() {
        for &edge in net.slice_edges(j).expect("slice index in range") {
            *counts.entry(edge).or_default() += 1;
        }
    }
    let edges: Vec<_> = counts.into_iter().map(|((u, v), w)| (u, v, w)).collect();
    WeightedGraph::from_edges(net.node_count(), &edges).expect("network edges are valid")
}

/// Weighted Newman modularity. An edgeless graph has modularity 0.
pub fn modularity(g: &WeightedGraph, cs: &CommunityStructure) -> Result<f64> {
    if cs.node_count() != g.node_count() {
        return Err(Error::PartitionMismatch(format!(
            "partition covers {} nodes, graph has {}",
            cs.node_count(),
            g.node_count()
        )));
    }
    let total = g.total_weight();
    if total == 0 {
        return Ok(0.0);
    }
    let mut internal = vec![0u64; cs.len()];
    let mut strength = vec![0u64; cs.len()];
    for (u, v, w) in g.edges() {
        let cu = cs.assignment[u.index()].index();
        let cv = cs.assignment[v.index()].index();
        if cu == cv {
            internal[cu] += w;
        }
        strength[cu] += w;
        strength[cv] += w;
    }
    let m = total as f64;
    Ok(internal
        .iter()
        .zip(&strength)
        .map(|(&i, &s)| {
            let frac = s as f64 / (2.0 * m);
            i as f64 / m - frac * frac
        })
        .sum())
}

#[derive(Debug, Clone)]
pub struct LouvainResult {
    pub structure: CommunityStructure,
    /// Modularity of the singleton partition followed by the modularity
    /// after each completed level.
    pub level_modularity: Vec<f64>,
}

/// Louvain community detection. The node visit order of every level is a
/// permutation drawn from `seed`.
pub fn louvain(g: &WeightedGraph, seed: u64) -> Result<CommunityStructure> {
    louvain_with_trace(g, seed).map(|r| r.structure)
}

pub fn louvain_with_trace(g: &WeightedGraph, seed: u64) -> Result<LouvainResult> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level::from_graph(g);
    // membership of each original node in the current level's nodes
    let mut membership: Vec<usize> = (0..n).collect();
    let mut trace = vec![modularity(g, &CommunityStructure::singletons(n))?];

    loop {
        let (community, moved) = level.local_moves(&mut rng);
        if !moved {
            break;
        }
        let (renumbered, count) = compact(&community);
        for m in membership.iter_mut() {
            *m = renumbered[*m];
        }
        level = level.contract(&renumbered, count);
        trace.push(modularity(g, &CommunityStructure::from_labels(&membership))?);
        if count == 1 {
            break;
        }
    }

    Ok(LouvainResult {
        structure: CommunityStructure::from_labels(&membership),
        level_modularity: trace,
    })
}

/// Renumbers community labels densely in order of first occurrence.
fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; labels.len()];
    let mut next = 0;
    let out = labels
        .iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect();
    (out, next)
}

/// One level of the Louvain hierarchy: super-nodes with internal weight.
struct Level {
    adjacency: Vec<Vec<(usize, u64)>>,
    /// Internal weight of each super-node (each internal edge counted once).
    internal: Vec<u64>,
    /// Weighted degree, internal weight counted twice.
    strength: Vec<u64>,
    /// Twice the total edge weight.
    two_m: u64,
}

impl Level {
    fn from_graph(g: &WeightedGraph) -> Self {
        let adjacency: Vec<Vec<(usize, u64)>> = (0..g.node_count())
            .map(|v| {
                g.neighbors(NodeId::from(v))
                    .iter()
                    .map(|&(u, w)| (u.index(), w))
                    .collect()
            })
            .collect();
        let strength: Vec<u64> = adjacency
            .iter()
            .map(|l| l.iter().map(|&(_, w)| w).sum())
            .collect();
        let two_m = strength.iter().sum();
        Level {
            internal: vec![0; adjacency.len()],
            adjacency,
            strength,
            two_m,
        }
    }

    fn len(&self) -> usize {
        self.adjacency.len()
    }

    /// Repeated sweeps of single-node moves until no node moves. Returns the
    /// community label of every super-node and whether anything moved.
    fn local_moves(&self, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut community: Vec<usize> = (0..n).collect();
        let mut total: Vec<u64> = self.strength.clone();
        if self.two_m == 0 {
            return (community, false);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        let two_m = self.two_m as i128;
        // scratch: weight from the current node into each community
        let mut link = vec![0u64; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_move = false;
        loop {
            let mut moved = false;
            for &v in &order {
                let own = community[v];
                let k = self.strength[v] as i128;
                for &(u, w) in &self.adjacency[v] {
                    let c = community[u];
                    if link[c] == 0 {
                        touched.push(c);
                    }
                    link[c] += w;
                }
                total[own] -= self.strength[v];

                let gain = |c: usize, link: &[u64], total: &[u64]| {
                    two_m * link[c] as i128 - k * total[c] as i128
                };
                let stay = gain(own, &link, &total);
                let mut best = own;
                let mut best_gain = stay;
                // ascending ids: the first community reaching the best gain
                // wins ties, and staying wins ties with any move
                touched.sort_unstable();
                for &c in &touched {
                    if c == own {
                        continue;
                    }
                    let g = gain(c, &link, &total);
                    if g > best_gain {
                        best = c;
                        best_gain = g;
                    }
                }
                total[best] += self.strength[v];
                if best != own {
                    community[v] = best;
                    moved = true;
                }
                for &c in &touched {
                    link[c] = 0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            any_move = true;
        }
        (community, any_move)
    }

    fn contract(&self, community: &[usize], count: usize) -> Level {
        let mut maps: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); count];
        let mut internal = vec![0u64; count];
        let mut strength = vec![0u64; count];
        for v in 0..self.len() {
            let cv = community[v];
            internal[cv] += self.internal[v];
            strength[cv] += self.strength[v];
            for &(u, w) in &self.adjacency[v] {
                let cu = community[u];
                if cu == cv {
                    // seen from both endpoints
                    if v < u {
                        internal[cv] += w;
                    }
                } else {
                    *maps[cv].entry(cu).or_default() += w;
                }
            }
        }
        Level {
            adjacency: maps.into_iter().map(|m| m.into_iter().collect()).collect(),
            internal,
            strength,
            two_m: self.two_m,
        }
    }
}
