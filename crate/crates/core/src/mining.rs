//! Closed frequent sequential pattern mining per community, with exact
//! support, growth rate against the rest of the network, and the supporting
//! node sets.
//!
//! The miner grows patterns depth-first by prefix projection. For every
//! sequence supporting a pattern `P = prefix·last` it keeps the end of the
//! earliest embedding of `prefix` (the anchor) and of `P` (the first end).
//! Itemset extensions of `last` only look at positions after the anchor whose
//! element contains `last`; sequence extensions look past the first end.
//!
//! Search is cut with a projected-database equivalence test: when an earlier
//! pattern `Q` contains `P` with `prefix(P) ⊑ prefix(Q)`, `last(P) ⊆ last(Q)`,
//! and both select exactly the same candidate positions in every sequence,
//! every pattern grown from `P` has a strictly larger counterpart grown from
//! `Q` with the same supporters, so nothing below `P` can be closed. A final
//! pass drops surviving patterns absorbed by another with the same
//! supporters.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::hash::{Hash, Hasher};

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ids::{CommunityId, NodeId};
use crate::seqdb::{is_sorted_subset, is_subsequence, Item, Itemset, SequenceDatabase};

/// Exact support value.
pub type Fraction = Ratio<u64>;

/// Parses `0.3`, `3/10` or `1` into an exact fraction.
pub fn parse_fraction(text: &str) -> Result<Fraction> {
    let text = text.trim();
    let bad = || Error::InvalidSupport(text.to_string());
    if let Some((n, d)) = text.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
        || frac.len() > 18
    {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let numer: u64 = digits.parse().map_err(|_| bad())?;
    Ok(Ratio::new(numer, 10u64.pow(frac.len() as u32)))
}

/// `sup(s, C) / sup(s, C̄)`, with `x/0 = ∞` for `x > 0` and `0/0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GrowthRate {
    Finite(Fraction),
    Infinite,
}

impl GrowthRate {
    pub fn from_supports(inside: Fraction, outside: Fraction) -> Self {
        if outside.is_zero() {
            if inside.is_zero() {
                GrowthRate::Finite(Fraction::zero())
            } else {
                GrowthRate::Infinite
            }
        } else {
            GrowthRate::Finite(inside / outside)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            GrowthRate::Finite(r) => r.to_f64().unwrap_or(f64::NAN),
            GrowthRate::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, GrowthRate::Infinite)
    }
}

impl PartialOrd for GrowthRate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GrowthRate {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (GrowthRate::Infinite, GrowthRate::Infinite) => Ordering::Equal,
            (GrowthRate::Infinite, _) => Ordering::Greater,
            (_, GrowthRate::Infinite) => Ordering::Less,
            (GrowthRate::Finite(a), GrowthRate::Finite(b)) => a.cmp(b),
        }
    }
}

/// A sequential pattern of one community.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub community: CommunityId,
    pub sequence: Vec<Itemset>,
    /// Sorted members of the community whose sequence contains the pattern.
    pub supporting_nodes: Vec<NodeId>,
    pub community_size: usize,
    /// Support among the nodes outside the community.
    pub complement_support: Fraction,
    pub growth_rate: GrowthRate,
}

impl Pattern {
    pub fn support(&self) -> Fraction {
        Ratio::new(self.supporting_nodes.len() as u64, self.community_size as u64)
    }

    /// Number of itemsets.
    pub fn length(&self) -> usize {
        self.sequence.len()
    }

    pub fn item_count(&self) -> usize {
        self.sequence.iter().map(Itemset::len).sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MiningMode {
    /// No super-sequence with the same support.
    #[default]
    Closed,
    /// No frequent super-sequence at all.
    Maximal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningOptions {
    pub min_sup: Fraction,
    pub mode: MiningMode,
    /// Maximum number of itemsets per pattern; `None` for unbounded.
    pub max_length: Option<usize>,
    /// Mining fails when a community yields more patterns than this.
    pub max_patterns: usize,
    pub min_community_size: usize,
}

impl Default for MiningOptions {
    fn default() -> Self {
        MiningOptions {
            min_sup: Ratio::new(3, 10),
            mode: MiningMode::Closed,
            max_length: None,
            max_patterns: 100_000,
            min_community_size: 1,
        }
    }
}

impl MiningOptions {
    pub fn with_min_sup(min_sup: Fraction) -> Self {
        MiningOptions {
            min_sup,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_sup.is_zero() || self.min_sup > Ratio::from_integer(1) {
            return Err(Error::InvalidSupport(self.min_sup.to_string()));
        }
        if self.max_length == Some(0) {
            return Err(Error::Config("max pattern length must be positive".into()));
        }
        Ok(())
    }

    /// Smallest supporter count reaching `min_sup` in a community of `size`.
    pub fn min_count(&self, size: usize) -> usize {
        let size = size as u64;
        let (n, d) = (*self.min_sup.numer(), *self.min_sup.denom());
        (n * size).div_ceil(d) as usize
    }
}

/// `|{η ∈ C : s ⊑ ν_η}| / |C|`.
pub fn support(s: &[Itemset], community: &[NodeId], db: &SequenceDatabase) -> Result<Fraction> {
    if community.is_empty() {
        return Err(Error::EmptyCommunity);
    }
    let count = count_supporters(s, community, db);
    Ok(Ratio::new(count as u64, community.len() as u64))
}

/// Support inside `community` over support in the rest of the database.
pub fn growth_rate(s: &[Itemset], community: &[NodeId], db: &SequenceDatabase) -> Result<GrowthRate> {
    let members: HashSet<NodeId> = community.iter().copied().collect();
    let complement: Vec<NodeId> = db
        .entries()
        .iter()
        .map(|e| e.node)
        .filter(|v| !members.contains(v))
        .collect();
    if complement.is_empty() {
        return Err(Error::EmptyComplement);
    }
    let inside = support(s, community, db)?;
    let outside = support(s, &complement, db)?;
    Ok(GrowthRate::from_supports(inside, outside))
}

fn count_supporters(s: &[Itemset], nodes: &[NodeId], db: &SequenceDatabase) -> usize {
    nodes
        .iter()
        .filter(|&&v| is_subsequence(s, db.sequence(v).elements()))
        .count()
}

/// Mines the frequent closed (or maximal) patterns of `community`, then
/// computes each pattern's supporters and growth rate by a full scan.
pub fn mine_closed(
    db: &SequenceDatabase,
    community: CommunityId,
    options: &MiningOptions,
) -> Result<Vec<Pattern>> {
    options.validate()?;
    let members = db.members(community);
    check_size(community, members.len(), options)?;
    let sequences: Vec<&[Itemset]> = members.iter().map(|&v| db.sequence(v).elements()).collect();
    let min_count = options.min_count(members.len());
    let (found, explored) = PrefixMiner::new(&sequences, min_count, options.max_length).run();
    log::debug!("community {community}: {explored} prefixes explored, {} closed", found.len());
    let found = match options.mode {
        MiningMode::Closed => found,
        MiningMode::Maximal => keep_maximal(found),
    };
    finish(db, community, &members, found, options)
}

/// Exhaustive reference miner for small inputs: enumerates every
/// subsequence of every member sequence, counts support directly and
/// filters by pairwise super-sequence checks.
pub fn brute_force_mine(
    db: &SequenceDatabase,
    community: CommunityId,
    options: &MiningOptions,
) -> Result<Vec<Pattern>> {
    /// Limits keeping the enumeration tractable.
    const MAX_LENGTH: usize = 6;
    const MAX_ALPHABET: usize = 12;
    const MAX_CANDIDATES: f64 = 4_000_000.0;

    options.validate()?;
    let members = db.members(community);
    check_size(community, members.len(), options)?;
    let sequences: Vec<&[Itemset]> = members.iter().map(|&v| db.sequence(v).elements()).collect();

    let alphabet: HashSet<Item> = sequences
        .iter()
        .flat_map(|s| s.iter().flat_map(|e| e.items().iter().copied()))
        .collect();
    if alphabet.len() > MAX_ALPHABET {
        return Err(Error::OracleTooLarge(format!("{} distinct items", alphabet.len())));
    }
    if let Some(s) = sequences.iter().find(|s| s.len() > MAX_LENGTH) {
        return Err(Error::OracleTooLarge(format!("sequence of length {}", s.len())));
    }
    let bound: f64 = sequences
        .iter()
        .map(|s| s.iter().map(|e| 2f64.powi(e.len() as i32)).product::<f64>())
        .sum();
    if bound > MAX_CANDIDATES {
        return Err(Error::OracleTooLarge(format!("{bound} candidate subsequences")));
    }

    let mut candidates: HashSet<Vec<Itemset>> = HashSet::new();
    for s in &sequences {
        enumerate_subsequences(s, 0, &mut Vec::new(), &mut candidates);
    }
    let max_length = options.max_length.unwrap_or(usize::MAX);
    candidates.retain(|c| c.len() <= max_length);
    let min_count = options.min_count(members.len());
    let frequent: Vec<(Vec<Itemset>, Vec<u32>)> = candidates
        .into_iter()
        .filter_map(|c| {
            let supporters: Vec<u32> = sequences
                .iter()
                .enumerate()
                .filter(|(_, s)| is_subsequence(&c, s))
                .map(|(i, _)| i as u32)
                .collect();
            (supporters.len() >= min_count).then_some((c, supporters))
        })
        .collect();
    let selected: Vec<Vec<Itemset>> = match options.mode {
        MiningMode::Closed => {
            let mut groups: HashMap<&[u32], Vec<&Vec<Itemset>>> = HashMap::new();
            for (p, s) in &frequent {
                groups.entry(s.as_slice()).or_default().push(p);
            }
            groups
                .values()
                .flat_map(|group| {
                    group
                        .iter()
                        .filter(|p| !group.iter().any(|q| q != *p && is_subsequence(p, q)))
                        .map(|p| (*p).clone())
                        .collect::<Vec<_>>()
                })
                .collect()
        }
        MiningMode::Maximal => frequent
            .iter()
            .filter(|(p, _)| !frequent.iter().any(|(q, _)| q != p && is_subsequence(p, q)))
            .map(|(p, _)| p.clone())
            .collect(),
    };
    finish(db, community, &members, selected, options)
}

fn check_size(community: CommunityId, size: usize, options: &MiningOptions) -> Result<()> {
    if size == 0 {
        return Err(Error::EmptyCommunity);
    }
    if size < options.min_community_size {
        return Err(Error::CommunityTooSmall {
            community: community.0,
            size,
            minimum: options.min_community_size,
        });
    }
    Ok(())
}

/// Adds every non-empty subsequence of `seq[from..]` extending `current`.
fn enumerate_subsequences(
    seq: &[Itemset],
    from: usize,
    current: &mut Vec<Itemset>,
    out: &mut HashSet<Vec<Itemset>>,
) {
    for i in from..seq.len() {
        let items = seq[i].items();
        for mask in 1u32..(1 << items.len()) {
            let subset = Itemset::new(
                items
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask & (1 << b) != 0)
                    .map(|(_, &it)| it),
            )
            .expect("subset of a valid itemset");
            current.push(subset);
            out.insert(current.clone());
            enumerate_subsequences(seq, i + 1, current, out);
            current.pop();
        }
    }
}

/// Orders patterns canonically, enforces the pattern cap and attaches
/// supporters and growth rates.
fn finish(
    db: &SequenceDatabase,
    community: CommunityId,
    members: &[NodeId],
    mut sequences: Vec<Vec<Itemset>>,
    options: &MiningOptions,
) -> Result<Vec<Pattern>> {
    if sequences.len() > options.max_patterns {
        return Err(Error::PatternLimit {
            community: community.0,
            limit: options.max_patterns,
        });
    }
    sequences.sort_unstable();
    let complement = db.complement(community);
    sequences
        .into_iter()
        .map(|sequence| {
            let supporting_nodes: Vec<NodeId> = members
                .iter()
                .copied()
                .filter(|&v| is_subsequence(&sequence, db.sequence(v).elements()))
                .collect();
            let inside = Ratio::new(supporting_nodes.len() as u64, members.len() as u64);
            if complement.is_empty() {
                return Err(Error::EmptyComplement);
            }
            let outside = Ratio::new(
                count_supporters(&sequence, &complement, db) as u64,
                complement.len() as u64,
            );
            Ok(Pattern {
                community,
                sequence,
                supporting_nodes,
                community_size: members.len(),
                complement_support: outside,
                growth_rate: GrowthRate::from_supports(inside, outside),
            })
        })
        .collect()
}

/// Keeps the closed patterns that have no frequent strict super-sequence.
/// Every frequent pattern lies under some closed one, so comparing closed
/// patterns among themselves suffices.
fn keep_maximal(closed: Vec<Vec<Itemset>>) -> Vec<Vec<Itemset>> {
    let sizes: Vec<usize> = closed.iter().map(|p| p.iter().map(Itemset::len).sum()).collect();
    closed
        .iter()
        .enumerate()
        .filter(|&(i, p)| {
            !closed
                .iter()
                .enumerate()
                .any(|(j, q)| sizes[j] > sizes[i] && is_subsequence(p, q))
        })
        .map(|(_, p)| p.clone())
        .collect()
}

/// Marks the end of an element in a flat pattern encoding.
const SEP: u32 = u32::MAX;

/// Per-sequence state of a pattern's projection.
#[derive(Debug, Clone, Copy)]
struct Projection {
    seq: u32,
    /// End of the earliest embedding of the pattern without its last
    /// element, -1 when that prefix is empty.
    anchor: i32,
    /// End of the earliest embedding of the whole pattern.
    first: i32,
}

struct Candidate {
    /// Elements separated by [`SEP`].
    pattern: Box<[u32]>,
    supporters: Box<[u32]>,
    length: usize,
    prefix_items: usize,
}

impl Candidate {
    fn elements(&self) -> impl Iterator<Item = &[u32]> {
        self.pattern
            .split(|&x| x == SEP)
            .take(self.length)
    }
}

/// Depth-first prefix-projected miner over dense item codes.
struct PrefixMiner {
    /// `[sequence][element]` -> sorted item codes.
    sequences: Vec<Vec<Vec<u32>>>,
    /// Code -> item.
    items: Vec<Item>,
    min_count: usize,
    max_length: usize,
    bounded: bool,
    candidates: Vec<Candidate>,
    by_signature: HashMap<u64, Vec<usize>>,
    /// Per-item stamps for counting each sequence once.
    seen_i: Vec<u32>,
    seen_s: Vec<u32>,
}

impl PrefixMiner {
    fn new(sequences: &[&[Itemset]], min_count: usize, max_length: Option<usize>) -> Self {
        let mut items: Vec<Item> = sequences
            .iter()
            .flat_map(|s| s.iter().flat_map(|e| e.items().iter().copied()))
            .collect();
        items.sort_unstable();
        items.dedup();
        let code: HashMap<Item, u32> = items.iter().enumerate().map(|(i, &it)| (it, i as u32)).collect();
        let encoded = sequences
            .iter()
            .map(|s| {
                s.iter()
                    .map(|e| e.items().iter().map(|it| code[it]).collect())
                    .collect()
            })
            .collect();
        let n = items.len();
        PrefixMiner {
            sequences: encoded,
            items,
            min_count: min_count.max(1),
            max_length: max_length.unwrap_or(usize::MAX),
            bounded: max_length.is_some(),
            candidates: Vec::new(),
            by_signature: HashMap::new(),
            seen_i: vec![u32::MAX; n],
            seen_s: vec![u32::MAX; n],
        }
    }

    /// Closed patterns and the number of prefixes kept during the search.
    fn run(mut self) -> (Vec<Vec<Itemset>>, usize) {
        let root: Vec<Projection> = (0..self.sequences.len() as u32)
            .map(|seq| Projection {
                seq,
                anchor: -1,
                first: -1,
            })
            .collect();
        let mut pattern: Vec<Vec<u32>> = Vec::new();
        for y in self.frequent_s_extensions(&root) {
            let proj = self.s_extend(&root, y);
            pattern.push(vec![y]);
            self.grow(&mut pattern, proj);
            pattern.pop();
        }
        (self.closed_candidates(), self.candidates.len())
    }

    fn grow(&mut self, pattern: &mut Vec<Vec<u32>>, proj: Vec<Projection>) {
        let last = pattern.last().expect("non-empty pattern").clone();
        let positions = self.candidate_positions(&proj, &last);
        if self.absorbed(pattern, &proj, &positions) {
            return;
        }
        self.record(pattern, &proj, &positions);

        let max_last = *last.last().expect("non-empty element");
        for y in self.frequent_i_extensions(&proj, &positions, max_last) {
            let next = i_extend(&self.sequences, &proj, &positions, y);
            pattern.last_mut().expect("non-empty pattern").push(y);
            self.grow(pattern, next);
            pattern.last_mut().expect("non-empty pattern").pop();
        }
        if pattern.len() < self.max_length {
            for y in self.frequent_s_extensions(&proj) {
                let next = self.s_extend(&proj, y);
                pattern.push(vec![y]);
                self.grow(pattern, next);
                pattern.pop();
            }
        }
    }

    /// For each projected sequence, the positions after the anchor whose
    /// element contains `last`.
    fn candidate_positions(&self, proj: &[Projection], last: &[u32]) -> Vec<Vec<u32>> {
        proj.iter()
            .map(|p| {
                let seq = &self.sequences[p.seq as usize];
                ((p.anchor + 1) as usize..seq.len())
                    .filter(|&i| is_sorted_subset(last, &seq[i]))
                    .map(|i| i as u32)
                    .collect()
            })
            .collect()
    }

    fn signature(proj: &[Projection], positions: &[Vec<u32>]) -> u64 {
        let mut h = DefaultHasher::new();
        for (p, pos) in proj.iter().zip(positions) {
            p.seq.hash(&mut h);
            pos.hash(&mut h);
        }
        h.finish()
    }

    /// Whether an earlier pattern makes everything grown from `pattern`
    /// non-closed.
    fn absorbed(&self, pattern: &[Vec<u32>], proj: &[Projection], positions: &[Vec<u32>]) -> bool {
        let Some(bucket) = self.by_signature.get(&Self::signature(proj, positions)) else {
            return false;
        };
        let (prefix, last) = pattern.split_at(pattern.len() - 1);
        let last = &last[0];
        let prefix_items: usize = prefix.iter().map(Vec::len).sum();
        let max_last = *last.last().expect("non-empty element");
        bucket.iter().any(|&c| {
            let q = &self.candidates[c];
            if q.supporters.len() != proj.len()
                || q.supporters.iter().zip(proj).any(|(&s, p)| s != p.seq)
                || (self.bounded && q.length != pattern.len())
            {
                return false;
            }
            let q_elements: Vec<&[u32]> = q.elements().collect();
            let (q_prefix, q_last) = q_elements.split_at(q_elements.len() - 1);
            let q_last = q_last[0];
            if !is_sorted_subset(last, q_last) {
                return false;
            }
            let strict = q.prefix_items > prefix_items
                || q_last.iter().any(|x| x < &max_last && last.binary_search(x).is_err());
            if !strict || !flat_subsequence(prefix, q_prefix) {
                return false;
            }
            // exact check of the candidate positions behind the hash
            proj.iter().zip(positions).all(|(p, pos)| {
                let seq = &self.sequences[p.seq as usize];
                let anchor = earliest_end(seq, q_prefix);
                let theirs = ((anchor + 1) as usize..seq.len())
                    .filter(|&i| is_sorted_subset(q_last, &seq[i]))
                    .map(|i| i as u32);
                theirs.eq(pos.iter().copied())
            })
        })
    }

    fn record(&mut self, pattern: &[Vec<u32>], proj: &[Projection], positions: &[Vec<u32>]) {
        let mut flat = Vec::with_capacity(pattern.iter().map(|e| e.len() + 1).sum());
        for e in pattern {
            flat.extend_from_slice(e);
            flat.push(SEP);
        }
        let prefix_items = pattern[..pattern.len() - 1].iter().map(Vec::len).sum();
        let id = self.candidates.len();
        self.candidates.push(Candidate {
            pattern: flat.into_boxed_slice(),
            supporters: proj.iter().map(|p| p.seq).collect(),
            length: pattern.len(),
            prefix_items,
        });
        self.by_signature
            .entry(Self::signature(proj, positions))
            .or_default()
            .push(id);
    }

    fn frequent_i_extensions(&mut self, proj: &[Projection], positions: &[Vec<u32>], max_last: u32) -> Vec<u32> {
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for (p, pos) in proj.iter().zip(positions) {
            let seq = &self.sequences[p.seq as usize];
            for &i in pos {
                for &y in seq[i as usize].iter().filter(|&&y| y > max_last) {
                    if self.seen_i[y as usize] != p.seq {
                        self.seen_i[y as usize] = p.seq;
                        *counts.entry(y).or_default() += 1;
                    }
                }
            }
        }
        for &y in counts.keys() {
            self.seen_i[y as usize] = u32::MAX;
        }
        self.frequent(counts)
    }

    fn frequent_s_extensions(&mut self, proj: &[Projection]) -> Vec<u32> {
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for p in proj {
            let seq = &self.sequences[p.seq as usize];
            for element in &seq[(p.first + 1) as usize..] {
                for &y in element {
                    if self.seen_s[y as usize] != p.seq {
                        self.seen_s[y as usize] = p.seq;
                        *counts.entry(y).or_default() += 1;
                    }
                }
            }
        }
        for &y in counts.keys() {
            self.seen_s[y as usize] = u32::MAX;
        }
        self.frequent(counts)
    }

    fn frequent(&self, counts: HashMap<u32, usize>) -> Vec<u32> {
        let mut out: Vec<u32> = counts
            .into_iter()
            .filter(|&(_, c)| c >= self.min_count)
            .map(|(y, _)| y)
            .collect();
        out.sort_unstable();
        out
    }

    fn s_extend(&self, proj: &[Projection], y: u32) -> Vec<Projection> {
        proj.iter()
            .filter_map(|p| {
                let seq = &self.sequences[p.seq as usize];
                ((p.first + 1) as usize..seq.len())
                    .find(|&i| seq[i].binary_search(&y).is_ok())
                    .map(|i| Projection {
                        seq: p.seq,
                        anchor: p.first,
                        first: i as i32,
                    })
            })
            .collect()
    }

    /// Surviving candidates not absorbed by another with the same
    /// supporters.
    fn closed_candidates(&self) -> Vec<Vec<Itemset>> {
        let mut groups: HashMap<&[u32], Vec<usize>> = HashMap::new();
        for (i, c) in self.candidates.iter().enumerate() {
            groups.entry(&c.supporters).or_default().push(i);
        }
        let mut out = Vec::new();
        for members in groups.values() {
            let decoded: Vec<(Vec<&[u32]>, usize)> = members
                .iter()
                .map(|&i| {
                    let c = &self.candidates[i];
                    let e: Vec<&[u32]> = c.elements().collect();
                    let size = e.iter().map(|x| x.len()).sum();
                    (e, size)
                })
                .collect();
            for (k, (p, size)) in decoded.iter().enumerate() {
                let absorbed = decoded
                    .iter()
                    .enumerate()
                    .any(|(j, (q, qsize))| j != k && qsize > size && flat_subsequence(p, q));
                if !absorbed {
                    out.push(self.decode(p));
                }
            }
        }
        out
    }

    fn decode<E: AsRef<[u32]>>(&self, pattern: &[E]) -> Vec<Itemset> {
        pattern
            .iter()
            .map(|e| {
                Itemset::new(e.as_ref().iter().map(|&c| self.items[c as usize]))
                    .expect("codes come from valid itemsets")
            })
            .collect()
    }
}

fn i_extend(
    sequences: &[Vec<Vec<u32>>],
    proj: &[Projection],
    positions: &[Vec<u32>],
    y: u32,
) -> Vec<Projection> {
    proj.iter()
        .zip(positions)
        .filter_map(|(p, pos)| {
            let seq = &sequences[p.seq as usize];
            pos.iter()
                .find(|&&i| seq[i as usize].binary_search(&y).is_ok())
                .map(|&i| Projection {
                    seq: p.seq,
                    anchor: p.anchor,
                    first: i as i32,
                })
        })
        .collect()
}

/// End of the earliest embedding of `pattern` in `seq`; -1 for the empty
/// pattern. The caller guarantees the pattern embeds.
fn earliest_end<E: AsRef<[u32]>>(seq: &[Vec<u32>], pattern: &[E]) -> i32 {
    let mut end = -1i32;
    for e in pattern {
        let from = (end + 1) as usize;
        end = match (from..seq.len()).find(|&i| is_sorted_subset(e.as_ref(), &seq[i])) {
            Some(i) => i as i32,
            None => return seq.len() as i32,
        };
    }
    end
}

fn flat_subsequence<A: AsRef<[u32]>, B: AsRef<[u32]>>(small: &[A], large: &[B]) -> bool {
    let mut pos = 0;
    for a in small {
        match large[pos..]
            .iter()
            .position(|b| is_sorted_subset(a.as_ref(), b.as_ref()))
        {
            Some(offset) => pos += offset + 1,
            None => return false,
        }
    }
    true
}
