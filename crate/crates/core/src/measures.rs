//! Per-node, per-slice topological measures computed against the static
//! reference partition, and discretization of descriptor values into items.
//!
//! Conventions for degenerate inputs: a node without neighbours has
//! transitivity, participation and embeddedness 0, and a community whose
//! internal degrees do not vary gives every member a z-score of 0.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::community::CommunityStructure;
use crate::error::{Error, Result};
use crate::ids::{NodeId, SliceIndex};
use crate::network::{Descriptor, DescriptorKind, DynamicAttributedNetwork, StaticGraph};
use crate::seqdb::Item;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Measure {
    Degree,
    InternalDegree,
    Transitivity,
    ZScore,
    Participation,
    Embeddedness,
}

impl Measure {
    pub const ALL: [Measure; 6] = [
        Measure::Degree,
        Measure::InternalDegree,
        Measure::Transitivity,
        Measure::ZScore,
        Measure::Participation,
        Measure::Embeddedness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Degree => "degree",
            Measure::InternalDegree => "internal_degree",
            Measure::Transitivity => "transitivity",
            Measure::ZScore => "z_score",
            Measure::Participation => "participation",
            Measure::Embeddedness => "embeddedness",
        }
    }

    /// Default discretization thresholds.
    pub fn default_thresholds(self) -> &'static [f64] {
        match self {
            Measure::Degree | Measure::InternalDegree => &[3.0, 10.0, 30.0],
            Measure::Transitivity => &[0.35, 0.5, 0.7],
            Measure::ZScore => &[2.5],
            Measure::Participation => &[0.05, 0.6, 0.8],
            Measure::Embeddedness => &[0.3, 0.7],
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Schema(format!("unknown topological measure {s:?}")))
    }
}

pub fn degree(g: &StaticGraph, v: NodeId) -> Result<usize> {
    Ok(g.neighbors(v)?.len())
}

pub fn internal_degree(g: &StaticGraph, v: NodeId, cs: &CommunityStructure) -> Result<usize> {
    let own = assigned(g, v, cs)?;
    Ok(g.neighbors(v)?
        .iter()
        .filter(|&&u| cs.assignment().get(u.index()) == Some(&own))
        .count())
}

/// Local clustering coefficient `2△ / (d (d - 1))`, where `△` counts edges
/// among the neighbours of `v`; 0 when `d < 2`.
pub fn local_transitivity(g: &StaticGraph, v: NodeId) -> Result<f64> {
    let neighbors = g.neighbors(v)?;
    let d = neighbors.len();
    if d < 2 {
        return Ok(0.0);
    }
    // each neighbour edge is seen from both endpoints
    let ordered: usize = neighbors
        .iter()
        .map(|&a| sorted_intersection_len(g.neighbors(a).expect("neighbour in graph"), neighbors))
        .sum();
    Ok(ordered as f64 / (d * (d - 1)) as f64)
}

/// z-score of the internal degree of `v` within its community, using the
/// population standard deviation.
pub fn z_score(g: &StaticGraph, v: NodeId, cs: &CommunityStructure) -> Result<f64> {
    let own = assigned(g, v, cs)?;
    let internal: Vec<usize> = cs
        .members(own)
        .iter()
        .map(|&u| internal_degree(g, u, cs))
        .collect::<Result<_>>()?;
    let (mean, std) = mean_std(&internal);
    Ok(standardize(internal_degree(g, v, cs)?, mean, std))
}

/// Participation coefficient `1 - Σ_c (d_c / d)²`; 0 for isolated nodes.
pub fn participation(g: &StaticGraph, v: NodeId, cs: &CommunityStructure) -> Result<f64> {
    assigned(g, v, cs)?;
    let neighbors = g.neighbors(v)?;
    let mut per_community: Vec<usize> = neighbors
        .iter()
        .map(|&u| cs.community_of(u).map(|c| c.index()))
        .collect::<Result<_>>()?;
    Ok(participation_from(&mut per_community))
}

/// Fraction of the neighbours of `v` in its own community; 0 for isolated
/// nodes.
pub fn embeddedness(g: &StaticGraph, v: NodeId, cs: &CommunityStructure) -> Result<f64> {
    let d = degree(g, v)?;
    let d_int = internal_degree(g, v, cs)?;
    Ok(ratio(d_int, d))
}

fn assigned(g: &StaticGraph, v: NodeId, cs: &CommunityStructure) -> Result<crate::ids::CommunityId> {
    if !g.contains(v) {
        return Err(Error::UnknownNode(v.index()));
    }
    cs.community_of(v)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn sorted_intersection_len(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// `labels` holds the community of each neighbour; reordered in place.
fn participation_from(labels: &mut [usize]) -> f64 {
    let d = labels.len();
    if d == 0 {
        return 0.0;
    }
    labels.sort_unstable();
    let d = d as f64;
    let concentration: f64 = labels
        .chunk_by(|a, b| a == b)
        .map(|run| {
            let share = run.len() as f64 / d;
            share * share
        })
        .sum();
    1.0 - concentration
}

fn mean_std(values: &[usize]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<usize>() as f64 / n;
    let var = values
        .iter()
        .map(|&x| {
            let dx = x as f64 - mean;
            dx * dx
        })
        .sum::<f64>()
        / n;
    (mean, var.sqrt())
}

fn standardize(x: usize, mean: f64, std: f64) -> f64 {
    if std == 0.0 {
        0.0
    } else {
        (x as f64 - mean) / std
    }
}

/// The six measures for every `(node, slice)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTable {
    node_count: usize,
    num_slices: usize,
    values: Vec<[f64; 6]>,
}

impl MeasureTable {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn num_slices(&self) -> usize {
        self.num_slices
    }

    pub fn get(&self, v: NodeId, j: SliceIndex, m: Measure) -> f64 {
        self.row(v, j)[m.slot()]
    }

    pub fn row(&self, v: NodeId, j: SliceIndex) -> &[f64; 6] {
        &self.values[j * self.node_count + v.index()]
    }

    /// A node without neighbours in slice `j` has no defined topological
    /// items there.
    pub fn is_isolated(&self, v: NodeId, j: SliceIndex) -> bool {
        self.get(v, j, Measure::Degree) == 0.0
    }
}

/// Computes all measures of one slice graph against `cs`.
pub fn slice_measures(g: &StaticGraph, cs: &CommunityStructure) -> Result<Vec<[f64; 6]>> {
    let n = g.node_count();
    if cs.node_count() != n {
        return Err(Error::PartitionMismatch(format!(
            "partition covers {} nodes, graph has {n}",
            cs.node_count()
        )));
    }
    let assignment = cs.assignment();
    let mut rows = vec![[0.0; 6]; n];
    let mut internal = vec![0usize; n];
    let mut scratch = Vec::new();
    for v in 0..n {
        let node = NodeId::from(v);
        let neighbors = g.neighbors(node)?;
        let own = assignment[v];
        let d = neighbors.len();
        let d_int = neighbors
            .iter()
            .filter(|u| assignment[u.index()] == own)
            .count();
        internal[v] = d_int;
        scratch.clear();
        scratch.extend(neighbors.iter().map(|u| assignment[u.index()].index()));
        let row = &mut rows[v];
        row[Measure::Degree.slot()] = d as f64;
        row[Measure::InternalDegree.slot()] = d_int as f64;
        row[Measure::Transitivity.slot()] = local_transitivity(g, node)?;
        row[Measure::Participation.slot()] = participation_from(&mut scratch);
        row[Measure::Embeddedness.slot()] = ratio(d_int, d);
    }
    for c in cs.ids() {
        let members = cs.members(c);
        let values: Vec<usize> = members.iter().map(|u| internal[u.index()]).collect();
        let (mean, std) = mean_std(&values);
        for (&u, &x) in members.iter().zip(&values) {
            rows[u.index()][Measure::ZScore.slot()] = standardize(x, mean, std);
        }
    }
    Ok(rows)
}

/// Measures of every node in every slice, each slice evaluated on its own
/// graph with the static partition `cs`.
pub fn compute_measure_table(
    net: &DynamicAttributedNetwork,
    cs: &CommunityStructure,
) -> Result<MeasureTable> {
    let n = net.node_count();
    if cs.node_count() != n {
        return Err(Error::PartitionMismatch(format!(
            "partition covers {} nodes, network has {n}",
            cs.node_count()
        )));
    }
    let per_slice: Vec<Vec<[f64; 6]>> = (0..net.num_slices())
        .into_par_iter()
        .map(|j| slice_measures(&net.slice_graph(j)?, cs))
        .collect::<Result<_>>()?;
    Ok(MeasureTable {
        node_count: n,
        num_slices: net.num_slices(),
        values: per_slice.into_iter().flatten().collect(),
    })
}

/// Maps a value to its bin item. Attribute value 0 and non-finite values
/// produce no item.
pub fn discretize(value: f64, descriptor: &Descriptor) -> Option<Item> {
    if !value.is_finite() {
        return None;
    }
    if descriptor.kind == DescriptorKind::Attribute && value == 0.0 {
        return None;
    }
    Some(Item::new(descriptor.id, descriptor.bins.bin_of(value) as u8))
}
