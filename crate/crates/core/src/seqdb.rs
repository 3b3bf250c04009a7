//! The sequence database: one time-ordered sequence of itemsets per node,
//! tagged with the node's community.
//!
//! Each itemset gathers the discretized topological measures and the nonzero
//! discretized attributes of the node in one slice. Slices that produce no
//! item are dropped; the original slice index of each kept element is
//! retained.
//!
//! The text dump is one line per node,
//! `node<TAB>community<TAB>(name=bin,name=bin)(name=bin)…`, preceded by
//! `#descriptor<TAB>name<TAB>label,label,…` lines that fix the item
//! vocabulary and its order.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::community::CommunityStructure;
use crate::error::{Error, Result};
use crate::ids::{CommunityId, DescriptorId, NodeId, SliceIndex};
use crate::measures::{discretize, MeasureTable};
use crate::network::{validate_label, validate_token, DescriptorKind, DynamicAttributedNetwork};

/// A `(descriptor, bin)` pair. Items order by descriptor, then bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Item {
    pub descriptor: DescriptorId,
    pub bin: u8,
}

impl Item {
    pub fn new(descriptor: DescriptorId, bin: u8) -> Self {
        Item { descriptor, bin }
    }
}

/// Sorted, duplicate-free set of items with at most one item per
/// descriptor.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Itemset(Vec<Item>);

impl Itemset {
    pub fn new(items: impl IntoIterator<Item = Item>) -> Result<Self> {
        let mut items: Vec<Item> = items.into_iter().collect();
        items.sort_unstable();
        items.dedup();
        if items.windows(2).any(|w| w[0].descriptor == w[1].descriptor) {
            return Err(Error::Consistency(format!(
                "itemset holds two bins of one descriptor: {items:?}"
            )));
        }
        Ok(Itemset(items))
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: Item) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    /// Itemset inclusion `self ⊆ other`.
    pub fn is_subset(&self, other: &Itemset) -> bool {
        is_sorted_subset(&self.0, &other.0)
    }
}

pub(crate) fn is_sorted_subset<T: Ord>(small: &[T], large: &[T]) -> bool {
    if small.len() > large.len() {
        return false;
    }
    let mut it = large.iter();
    'outer: for x in small {
        for y in it.by_ref() {
            match y.cmp(x) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// True iff `alpha` embeds in `beta`: strictly increasing positions
/// `i1 < … < im` with `alpha[k] ⊆ beta[ik]`. Leftmost matching is optimal,
/// so a single greedy pass decides it.
pub fn is_subsequence(alpha: &[Itemset], beta: &[Itemset]) -> bool {
    let mut pos = 0;
    for a in alpha {
        match beta[pos..].iter().position(|b| a.is_subset(b)) {
            Some(offset) => pos += offset + 1,
            None => return false,
        }
    }
    true
}

/// Time-ordered, non-empty itemsets of one node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeSequence {
    elements: Vec<Itemset>,
    slices: Vec<SliceIndex>,
}

impl NodeSequence {
    /// Builds a sequence from `(slice, itemset)` pairs; empty itemsets are
    /// dropped and slices must strictly increase.
    pub fn new(elements: impl IntoIterator<Item = (SliceIndex, Itemset)>) -> Result<Self> {
        let mut seq = NodeSequence::default();
        for (slice, set) in elements {
            if seq.slices.last().is_some_and(|&last| last >= slice) {
                return Err(Error::Consistency(format!(
                    "slice indices must increase, got {slice} after {:?}",
                    seq.slices.last()
                )));
            }
            if !set.is_empty() {
                seq.slices.push(slice);
                seq.elements.push(set);
            }
        }
        Ok(seq)
    }

    /// Elements numbered by position.
    pub fn from_elements(elements: Vec<Itemset>) -> Self {
        NodeSequence::new(elements.into_iter().enumerate()).expect("positions increase")
    }

    pub fn elements(&self) -> &[Itemset] {
        &self.elements
    }

    pub fn slice_of(&self, element: usize) -> SliceIndex {
        self.slices[element]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Names of descriptors and of their bins, used to print and parse items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    descriptors: Vec<(String, Vec<String>)>,
}

impl Vocabulary {
    pub fn new(descriptors: Vec<(String, Vec<String>)>) -> Self {
        Vocabulary { descriptors }
    }

    pub fn from_network(net: &DynamicAttributedNetwork) -> Self {
        Vocabulary {
            descriptors: net
                .descriptors()
                .iter()
                .map(|d| (d.name.clone(), d.bins.labels().to_vec()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn descriptor_name(&self, d: DescriptorId) -> &str {
        &self.descriptors[d.index()].0
    }

    pub fn bin_label(&self, item: Item) -> &str {
        &self.descriptors[item.descriptor.index()].1[item.bin as usize]
    }

    /// `name=bin`.
    pub fn item_name(&self, item: Item) -> String {
        format!("{}={}", self.descriptor_name(item.descriptor), self.bin_label(item))
    }

    pub fn itemset_names(&self, set: &Itemset) -> Vec<String> {
        set.items().iter().map(|&i| self.item_name(i)).collect()
    }

    /// `(a=x,b=y)(c=z)`.
    pub fn format_sequence(&self, elements: &[Itemset]) -> String {
        let mut out = String::new();
        for set in elements {
            out.push('(');
            for (k, &item) in set.items().iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.item_name(item));
            }
            out.push(')');
        }
        out
    }

    pub fn parse_item(&self, text: &str) -> Result<Item> {
        let (name, label) = text
            .split_once('=')
            .ok_or_else(|| Error::parse("item", format!("{text:?} is not name=bin")))?;
        let d = self
            .descriptors
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::Schema(format!("unknown descriptor {name:?}")))?;
        let bin = self.descriptors[d]
            .1
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Schema(format!("unknown bin {label:?} of {name:?}")))?;
        Ok(Item::new(DescriptorId(d as u16), bin as u8))
    }

    pub fn parse_sequence(&self, text: &str) -> Result<Vec<Itemset>> {
        let mut elements = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::parse("sequence", format!("expected '(' in {text:?}")))?;
            let close = body
                .find(')')
                .ok_or_else(|| Error::parse("sequence", format!("unclosed '(' in {text:?}")))?;
            let items = body[..close]
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| self.parse_item(s))
                .collect::<Result<Vec<_>>>()?;
            elements.push(Itemset::new(items)?);
            rest = &body[close + 1..];
        }
        Ok(elements)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub node: NodeId,
    pub community: CommunityId,
    pub sequence: NodeSequence,
}

/// One entry per node, in node order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceDatabase {
    vocabulary: Vocabulary,
    labels: Vec<String>,
    entries: Vec<Entry>,
}

impl SequenceDatabase {
    /// Assembles a database from per-node `(label, community, sequence)`
    /// triples; node ids follow the given order.
    pub fn new(
        vocabulary: Vocabulary,
        nodes: impl IntoIterator<Item = (String, CommunityId, NodeSequence)>,
    ) -> Result<Self> {
        let mut labels = Vec::new();
        let mut entries = Vec::new();
        for (i, (label, community, sequence)) in nodes.into_iter().enumerate() {
            for set in sequence.elements() {
                for item in set.items() {
                    let ok = vocabulary
                        .descriptors
                        .get(item.descriptor.index())
                        .is_some_and(|(_, bins)| (item.bin as usize) < bins.len());
                    if !ok {
                        return Err(Error::Schema(format!(
                            "item {item:?} of node {label:?} is outside the vocabulary"
                        )));
                    }
                }
            }
            labels.push(label);
            entries.push(Entry {
                node: NodeId::from(i),
                community,
                sequence,
            });
        }
        Ok(SequenceDatabase {
            vocabulary,
            labels,
            entries,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.index()]
    }

    pub fn sequence(&self, v: NodeId) -> &NodeSequence {
        &self.entries[v.index()].sequence
    }

    pub fn community_of(&self, v: NodeId) -> CommunityId {
        self.entries[v.index()].community
    }

    /// Members of every community, keyed by id.
    pub fn communities(&self) -> BTreeMap<CommunityId, Vec<NodeId>> {
        let mut out: BTreeMap<CommunityId, Vec<NodeId>> = BTreeMap::new();
        for e in &self.entries {
            out.entry(e.community).or_default().push(e.node);
        }
        out
    }

    pub fn members(&self, c: CommunityId) -> Vec<NodeId> {
        self.entries
            .iter()
            .filter(|e| e.community == c)
            .map(|e| e.node)
            .collect()
    }

    /// Nodes outside community `c`.
    pub fn complement(&self, c: CommunityId) -> Vec<NodeId> {
        self.entries
            .iter()
            .filter(|e| e.community != c)
            .map(|e| e.node)
            .collect()
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("sequence database output", e);
        for (name, bins) in &self.vocabulary.descriptors {
            writeln!(out, "#descriptor\t{name}\t{}", bins.join(",")).map_err(io)?;
        }
        for e in &self.entries {
            writeln!(
                out,
                "{}\t{}\t{}",
                self.labels[e.node.index()],
                e.community,
                self.vocabulary.format_sequence(e.sequence.elements())
            )
            .map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }

    /// Parses the text dump. Without `#descriptor` lines the vocabulary is
    /// inferred from the items in order of first appearance.
    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut declared: Vec<(String, Vec<String>)> = Vec::new();
        let mut rows = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io("sequence database input", e))?;
            let context = || format!("sequence database line {}", n + 1);
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let fields: Vec<&str> = rest.split('\t').collect();
                if fields.first() == Some(&"descriptor") {
                    if fields.len() != 3 {
                        return Err(Error::parse(context(), "malformed #descriptor line"));
                    }
                    validate_token(fields[1], "descriptor name")?;
                    let bins: Vec<String> = fields[2].split(',').map(str::to_string).collect();
                    for b in &bins {
                        validate_label(b, "bin label")?;
                    }
                    declared.push((fields[1].to_string(), bins));
                }
                continue;
            }
            let fields: Vec<&str> = line.splitn(3, '\t').collect();
            if fields.len() < 2 {
                return Err(Error::parse(context(), "expected node<TAB>community<TAB>sequence"));
            }
            let community: u32 = fields[1]
                .trim()
                .parse()
                .map_err(|e| Error::parse(context(), e))?;
            rows.push((
                fields[0].to_string(),
                CommunityId(community),
                fields.get(2).copied().unwrap_or("").to_string(),
            ));
        }
        let vocabulary = if declared.is_empty() {
            infer_vocabulary(rows.iter().map(|r| r.2.as_str()))?
        } else {
            Vocabulary::new(declared)
        };
        let mut seen = HashMap::new();
        let mut nodes = Vec::with_capacity(rows.len());
        for (label, community, text) in rows {
            if seen.insert(label.clone(), ()).is_some() {
                return Err(Error::Consistency(format!("node {label:?} listed twice")));
            }
            let elements = vocabulary.parse_sequence(&text)?;
            if elements.iter().any(Itemset::is_empty) {
                return Err(Error::parse("sequence database", format!("empty element for {label:?}")));
            }
            nodes.push((label, community, NodeSequence::from_elements(elements)));
        }
        SequenceDatabase::new(vocabulary, nodes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file))
    }
}

impl fmt::Display for SequenceDatabase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn infer_vocabulary<'a>(texts: impl Iterator<Item = &'a str>) -> Result<Vocabulary> {
    let mut descriptors: Vec<(String, Vec<String>)> = Vec::new();
    for text in texts {
        for token in text.split(['(', ')', ',']).filter(|s| !s.is_empty()) {
            let (name, label) = token
                .split_once('=')
                .ok_or_else(|| Error::parse("item", format!("{token:?} is not name=bin")))?;
            let d = match descriptors.iter().position(|(n, _)| n == name) {
                Some(d) => d,
                None => {
                    descriptors.push((name.to_string(), Vec::new()));
                    descriptors.len() - 1
                }
            };
            if !descriptors[d].1.iter().any(|l| l == label) {
                descriptors[d].1.push(label.to_string());
            }
        }
    }
    if descriptors.len() > u16::MAX as usize || descriptors.iter().any(|d| d.1.len() > u8::MAX as usize) {
        return Err(Error::Schema("vocabulary too large".into()));
    }
    Ok(Vocabulary::new(descriptors))
}

/// Builds the database from a network, its measure table and the reference
/// partition.
pub fn build_database(
    net: &DynamicAttributedNetwork,
    table: &MeasureTable,
    cs: &CommunityStructure,
) -> Result<SequenceDatabase> {
    if table.node_count() != net.node_count() || table.num_slices() != net.num_slices() {
        return Err(Error::Consistency(format!(
            "measure table covers {}x{} node-slices, network has {}x{}",
            table.node_count(),
            table.num_slices(),
            net.node_count(),
            net.num_slices()
        )));
    }
    if cs.node_count() != net.node_count() {
        return Err(Error::PartitionMismatch(format!(
            "partition covers {} nodes, network has {}",
            cs.node_count(),
            net.node_count()
        )));
    }
    let sequences: Vec<NodeSequence> = (0..net.node_count())
        .into_par_iter()
        .map(|v| node_sequence(net, table, NodeId::from(v)))
        .collect::<Result<_>>()?;
    let nodes = sequences.into_iter().enumerate().map(|(v, seq)| {
        let v = NodeId::from(v);
        (net.label(v).to_string(), cs.assignment()[v.index()], seq)
    });
    SequenceDatabase::new(Vocabulary::from_network(net), nodes)
}

fn node_sequence(net: &DynamicAttributedNetwork, table: &MeasureTable, v: NodeId) -> Result<NodeSequence> {
    let elements = (0..net.num_slices()).map(|j| {
        let isolated = table.is_isolated(v, j);
        let items = net.descriptors().iter().filter_map(|d| match d.kind {
            DescriptorKind::Topological(m) if !isolated => discretize(table.get(v, j, m), d),
            DescriptorKind::Topological(_) => None,
            DescriptorKind::Attribute => discretize(net.attribute(v, j, d.id), d),
        });
        Itemset::new(items).map(|set| (j, set))
    });
    NodeSequence::new(elements.collect::<Result<Vec<_>>>()?)
}
