//! Dynamic attributed networks: a fixed node set observed over `θ` time
//! slices, each slice holding its own undirected edge set and per-node
//! attribute values.
//!
//! Node labels from the input files are densified into [`NodeId`]s in order
//! of first appearance in the edge file; the original labels are kept for
//! reporting.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::ids::{DescriptorId, NodeId, SliceIndex};
use crate::measures::Measure;

/// Whether a descriptor is read from the attribute file or computed from
/// the slice topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorKind {
    Attribute,
    Topological(Measure),
}

impl DescriptorKind {
    pub fn is_attribute(self) -> bool {
        matches!(self, DescriptorKind::Attribute)
    }
}

/// Ordered half-open bins over the reals, built from increasing thresholds
/// `t1 < t2 < … < tk`: `(-∞, t1], (t1, t2], …, (tk, +∞)`. A value equal to a
/// threshold falls in the lower bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Bins {
    thresholds: Vec<f64>,
    labels: Vec<String>,
}

impl Bins {
    pub fn new(thresholds: Vec<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        if thresholds.iter().any(|t| !t.is_finite()) {
            return Err(Error::Schema("bin thresholds must be finite".into()));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Schema(format!(
                "bin thresholds must be strictly increasing: {thresholds:?}"
            )));
        }
        let labels = match labels {
            Some(labels) => {
                if labels.len() != thresholds.len() + 1 {
                    return Err(Error::Schema(format!(
                        "{} thresholds need {} labels, got {}",
                        thresholds.len(),
                        thresholds.len() + 1,
                        labels.len()
                    )));
                }
                labels
            }
            None => default_labels(&thresholds),
        };
        let mut seen = BTreeSet::new();
        for label in &labels {
            validate_label(label, "bin label")?;
            if !seen.insert(label.as_str()) {
                return Err(Error::Schema(format!("duplicate bin label {label:?}")));
            }
        }
        Ok(Bins { thresholds, labels })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Index of the bin holding `value`.
    pub fn bin_of(&self, value: f64) -> usize {
        self.thresholds.iter().take_while(|&&t| value > t).count()
    }

    pub fn label(&self, bin: usize) -> &str {
        &self.labels[bin]
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

fn default_labels(thresholds: &[f64]) -> Vec<String> {
    match thresholds {
        [] => vec!["all".to_string()],
        _ => {
            let mut labels = Vec::with_capacity(thresholds.len() + 1);
            labels.push(format!("<={}", thresholds[0]));
            for w in thresholds.windows(2) {
                labels.push(format!("{}-{}", w[0], w[1]));
            }
            labels.push(format!(">{}", thresholds[thresholds.len() - 1]));
            labels
        }
    }
}

/// Names end up in the tab/paren separated database dump, left of `=`.
pub(crate) fn validate_token(token: &str, what: &str) -> Result<()> {
    if token.contains('=') {
        return Err(Error::Schema(format!("{what} {token:?} must not contain '='")));
    }
    validate_label(token, what)
}

/// Bin labels sit right of the first `=`, so they may contain one.
pub(crate) fn validate_label(token: &str, what: &str) -> Result<()> {
    if token.is_empty() || token.chars().any(|c| "(),\t\n\r".contains(c)) {
        return Err(Error::Schema(format!(
            "{what} {token:?} must be non-empty and free of '(', ')', ',' and whitespace controls"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    pub id: DescriptorId,
    pub name: String,
    pub kind: DescriptorKind,
    pub bins: Bins,
}

/// The descriptor schema together with the number of slices.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorConfig {
    pub theta: usize,
    descriptors: Vec<Descriptor>,
}

impl DescriptorConfig {
    /// Descriptors are given as `(name, kind, bins)`; ids are assigned in
    /// order.
    pub fn new(theta: usize, descriptors: Vec<(String, DescriptorKind, Bins)>) -> Result<Self> {
        if theta == 0 {
            return Err(Error::Schema("theta must be at least 1".into()));
        }
        if descriptors.len() > u16::MAX as usize {
            return Err(Error::Schema("too many descriptors".into()));
        }
        let mut names = BTreeSet::new();
        let mut measures = BTreeSet::new();
        let mut out = Vec::with_capacity(descriptors.len());
        for (i, (name, kind, bins)) in descriptors.into_iter().enumerate() {
            validate_token(&name, "descriptor name")?;
            if !names.insert(name.clone()) {
                return Err(Error::Schema(format!("duplicate descriptor {name:?}")));
            }
            if let DescriptorKind::Topological(m) = kind {
                if !measures.insert(m) {
                    return Err(Error::Schema(format!("measure {m} declared twice")));
                }
            }
            if bins.len() > u8::MAX as usize {
                return Err(Error::Schema(format!("descriptor {name:?} has too many bins")));
            }
            out.push(Descriptor {
                id: DescriptorId(i as u16),
                name,
                kind,
                bins,
            });
        }
        Ok(DescriptorConfig {
            theta,
            descriptors: out,
        })
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.descriptors
    }

    pub fn by_name(&self, name: &str) -> Option<&Descriptor> {
        self.descriptors.iter().find(|d| d.name == name)
    }
}

/// Undirected simple graph over nodes `0..n` with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticGraph {
    adjacency: Vec<Vec<NodeId>>,
}

impl StaticGraph {
    /// Builds a graph from an edge list, ignoring duplicates. Self-loops and
    /// out-of-range endpoints are rejected.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in edges {
            if u.index() >= node_count {
                return Err(Error::UnknownNode(u.index()));
            }
            if v.index() >= node_count {
                return Err(Error::UnknownNode(v.index()));
            }
            if u == v {
                return Err(Error::Consistency(format!("self-loop on node {u}")));
            }
            adjacency[u.index()].push(v);
            adjacency[v.index()].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(StaticGraph { adjacency })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.adjacency.len()
    }

    pub fn neighbors(&self, v: NodeId) -> Result<&[NodeId]> {
        self.adjacency
            .get(v.index())
            .map(Vec::as_slice)
            .ok_or(Error::UnknownNode(v.index()))
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency
            .get(u.index())
            .is_some_and(|l| l.binary_search(&v).is_ok())
    }
}

/// A fixed node set observed over `θ` slices.
#[derive(Debug, Clone)]
pub struct DynamicAttributedNetwork {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    schema: DescriptorConfig,
    /// Per slice: canonical `(min, max)` edges, sorted and duplicate free.
    slices: Vec<Vec<(NodeId, NodeId)>>,
    /// Nonzero attribute values only; an absent key means 0.
    attributes: HashMap<(NodeId, SliceIndex, DescriptorId), f64>,
}

impl DynamicAttributedNetwork {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn num_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn schema(&self) -> &DescriptorConfig {
        &self.schema
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        self.schema.descriptors()
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.labels.len()).map(NodeId::from)
    }

    pub fn slice_edges(&self, j: SliceIndex) -> Result<&[(NodeId, NodeId)]> {
        self.slices
            .get(j)
            .map(Vec::as_slice)
            .ok_or(Error::SliceIndex {
                index: j,
                slices: self.slices.len(),
            })
    }

    /// The undirected graph of slice `j` over the full node set.
    pub fn slice_graph(&self, j: SliceIndex) -> Result<StaticGraph> {
        StaticGraph::from_edges(self.node_count(), self.slice_edges(j)?)
    }

    /// Attribute value, 0 when absent.
    pub fn attribute(&self, v: NodeId, j: SliceIndex, d: DescriptorId) -> f64 {
        self.attributes.get(&(v, j, d)).copied().unwrap_or(0.0)
    }

    /// Nonzero attribute entries in `(node, slice, descriptor)` order.
    pub fn attribute_entries(&self) -> Vec<((NodeId, SliceIndex, DescriptorId), f64)> {
        let sorted: BTreeMap<_, _> = self.attributes.iter().map(|(k, v)| (*k, *v)).collect();
        sorted.into_iter().collect()
    }

    /// Writes the edge CSV (`slice,src,dst`).
    pub fn write_edges<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let ctx = |e: csv::Error| Error::parse("edge output", e);
        w.write_record(["slice", "src", "dst"]).map_err(ctx)?;
        for (j, edges) in self.slices.iter().enumerate() {
            for &(u, v) in edges {
                w.write_record([j.to_string().as_str(), self.label(u), self.label(v)])
                    .map_err(ctx)?;
            }
        }
        w.flush().map_err(|e| Error::io("edge output", e))
    }

    /// Writes the attribute CSV (`node,slice,descriptor,value`).
    pub fn write_attributes<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let ctx = |e: csv::Error| Error::parse("attribute output", e);
        w.write_record(["node", "slice", "descriptor", "value"]).map_err(ctx)?;
        for ((v, j, d), value) in self.attribute_entries() {
            w.write_record([
                self.label(v),
                j.to_string().as_str(),
                self.schema.descriptors()[d.index()].name.as_str(),
                value.to_string().as_str(),
            ])
            .map_err(ctx)?;
        }
        w.flush().map_err(|e| Error::io("attribute output", e))
    }
}

impl fmt::Display for DynamicAttributedNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} nodes, {} slices, {} descriptors",
            self.node_count(),
            self.num_slices(),
            self.descriptors().len()
        )
    }
}

/// Incremental, validating construction of a [`DynamicAttributedNetwork`].
#[derive(Debug)]
pub struct NetworkBuilder {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    schema: DescriptorConfig,
    slices: Vec<BTreeSet<(NodeId, NodeId)>>,
    attributes: HashMap<(NodeId, SliceIndex, DescriptorId), f64>,
}

impl NetworkBuilder {
    pub fn new(schema: DescriptorConfig) -> Self {
        let slices = vec![BTreeSet::new(); schema.theta];
        NetworkBuilder {
            labels: Vec::new(),
            index: HashMap::new(),
            schema,
            slices,
            attributes: HashMap::new(),
        }
    }

    /// Returns the id of `label`, registering it if new.
    pub fn add_node(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = NodeId::from(self.labels.len());
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn add_edge(&mut self, slice: SliceIndex, src: &str, dst: &str) -> Result<()> {
        if slice >= self.schema.theta {
            return Err(Error::Consistency(format!(
                "edge slice index {slice} is not below theta = {}",
                self.schema.theta
            )));
        }
        if src == dst {
            return Err(Error::Consistency(format!(
                "self-loop on node {src:?} in slice {slice}"
            )));
        }
        let u = self.add_node(src);
        let v = self.add_node(dst);
        let edge = if u < v { (u, v) } else { (v, u) };
        if !self.slices[slice].insert(edge) {
            log::debug!("duplicate edge {src}-{dst} in slice {slice} collapsed");
        }
        Ok(())
    }

    pub fn set_attribute(
        &mut self,
        label: &str,
        slice: SliceIndex,
        descriptor: &str,
        value: f64,
    ) -> Result<()> {
        let v = *self
            .index
            .get(label)
            .ok_or_else(|| Error::Consistency(format!("unknown node {label:?} in attributes")))?;
        if slice >= self.schema.theta {
            return Err(Error::Consistency(format!(
                "attribute slice index {slice} is not below theta = {}",
                self.schema.theta
            )));
        }
        let d = self
            .schema
            .by_name(descriptor)
            .filter(|d| d.kind.is_attribute())
            .ok_or_else(|| Error::Schema(format!("undeclared attribute descriptor {descriptor:?}")))?
            .id;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::parse(
                "attributes",
                format!("value {value} for {label:?} must be a non-negative real"),
            ));
        }
        if self.attributes.contains_key(&(v, slice, d)) {
            return Err(Error::Consistency(format!(
                "duplicate value for node {label:?}, slice {slice}, descriptor {descriptor:?}"
            )));
        }
        if value > 0.0 {
            self.attributes.insert((v, slice, d), value);
        }
        Ok(())
    }

    pub fn build(self) -> DynamicAttributedNetwork {
        DynamicAttributedNetwork {
            labels: self.labels,
            index: self.index,
            schema: self.schema,
            slices: self
                .slices
                .into_iter()
                .map(|s| s.into_iter().collect())
                .collect(),
            attributes: self.attributes,
        }
    }
}

#[derive(Debug, Deserialize)]
struct EdgeRow {
    slice: usize,
    src: String,
    dst: String,
}

#[derive(Debug, Deserialize)]
struct AttributeRow {
    node: String,
    slice: usize,
    descriptor: String,
    value: f64,
}

/// Loads a network from an edge CSV and an optional attribute CSV.
pub fn load_network(
    edge_path: impl AsRef<Path>,
    attr_path: Option<&Path>,
    schema: &DescriptorConfig,
) -> Result<DynamicAttributedNetwork> {
    let edge_path = edge_path.as_ref();
    let edges = std::fs::File::open(edge_path).map_err(|e| Error::io(edge_path, e))?;
    let attrs = match attr_path {
        Some(p) => Some(std::fs::File::open(p).map_err(|e| Error::io(p, e))?),
        None => None,
    };
    read_network(edges, attrs, schema)
}

/// Reader-based variant of [`load_network`].
pub fn read_network<E: std::io::Read, A: std::io::Read>(
    edges: E,
    attrs: Option<A>,
    schema: &DescriptorConfig,
) -> Result<DynamicAttributedNetwork> {
    let mut builder = NetworkBuilder::new(schema.clone());
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(edges);
    check_header(&mut reader, &["slice", "src", "dst"], "edge file")?;
    for (line, row) in reader.deserialize::<EdgeRow>().enumerate() {
        let row = row.map_err(|e| Error::parse(format!("edge file row {}", line + 2), e))?;
        builder.add_edge(row.slice, &row.src, &row.dst)?;
    }
    if let Some(attrs) = attrs {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(attrs);
        check_header(&mut reader, &["node", "slice", "descriptor", "value"], "attribute file")?;
        for (line, row) in reader.deserialize::<AttributeRow>().enumerate() {
            let row =
                row.map_err(|e| Error::parse(format!("attribute file row {}", line + 2), e))?;
            builder.set_attribute(&row.node, row.slice, &row.descriptor, row.value)?;
        }
    }
    Ok(builder.build())
}

fn check_header<R: std::io::Read>(
    reader: &mut csv::Reader<R>,
    expected: &[&str],
    what: &str,
) -> Result<()> {
    let header = reader.headers().map_err(|e| Error::parse(what, e))?;
    // An entirely empty file has no header and no rows.
    if header.is_empty() {
        return Ok(());
    }
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(
            what,
            format!("expected header {}, got {}", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(())
}
