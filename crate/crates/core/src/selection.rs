//! Representative pattern selection and deviant nodes.

use std::cmp::{Ordering, Reverse};
use std::collections::BTreeSet;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ids::{CommunityId, NodeId};
use crate::mining::{mine_closed, Fraction, MiningOptions, Pattern};
use crate::seqdb::SequenceDatabase;

/// Set the greedy step measures its distance against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DistanceAnchor {
    /// Every node covered so far.
    #[default]
    Union,
    /// Supporters of the top growth-rate pattern only.
    First,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionOptions {
    pub max_uncovered: usize,
    pub anchor: DistanceAnchor,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        SelectionOptions {
            max_uncovered: 5,
            anchor: DistanceAnchor::Union,
        }
    }
}

/// One accepted pattern of the greedy loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    /// Index into `selected`.
    pub selected: usize,
    /// Distance to the anchor at the time of choice; `None` for the seed.
    pub distance: Option<Fraction>,
    pub newly_covered: usize,
    pub uncovered_after: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityCharacterization {
    pub community: CommunityId,
    pub size: usize,
    /// Number of mined patterns the selection chose from.
    pub pattern_count: usize,
    pub top_support: Pattern,
    /// Starts with the top growth-rate pattern.
    pub selected: Vec<Pattern>,
    pub covered: Vec<NodeId>,
    pub deviants: Vec<NodeId>,
    pub trace: Vec<TraceStep>,
}

/// `1 - |a ∩ b| / |a ∪ b|`, exact.
pub fn jaccard_distance_exact(a: &[NodeId], b: &[NodeId]) -> Result<Fraction> {
    let a: BTreeSet<NodeId> = a.iter().copied().collect();
    let b: BTreeSet<NodeId> = b.iter().copied().collect();
    let union = a.union(&b).count() as u64;
    if union == 0 {
        return Err(Error::BothEmpty);
    }
    let inter = a.intersection(&b).count() as u64;
    Ok(Ratio::new(union - inter, union))
}

pub fn jaccard_distance(a: &[NodeId], b: &[NodeId]) -> Result<f64> {
    jaccard_distance_exact(a, b).map(|d| d.to_f64().unwrap_or(f64::NAN))
}

fn top_support_order(a: &Pattern, b: &Pattern) -> Ordering {
    a.support()
        .cmp(&b.support())
        .then(a.growth_rate.cmp(&b.growth_rate))
        .then(Reverse(a.length()).cmp(&Reverse(b.length())))
        .then(Reverse(&a.sequence).cmp(&Reverse(&b.sequence)))
}

fn top_growth_order(a: &Pattern, b: &Pattern) -> Ordering {
    a.growth_rate
        .cmp(&b.growth_rate)
        .then(a.support().cmp(&b.support()))
        .then(Reverse(&a.sequence).cmp(&Reverse(&b.sequence)))
}

/// Picks the top-support pattern, seeds coverage with the top growth-rate
/// pattern and greedily adds the pattern whose supporters are farthest from
/// the anchor until at most `max_uncovered` members remain uncovered or no
/// pattern covers anything new.
pub fn select_representatives(
    patterns: &[Pattern],
    community: &[NodeId],
    options: &SelectionOptions,
) -> Result<CommunityCharacterization> {
    let first_pattern = patterns.first().ok_or(Error::NoPatterns)?;
    let id = first_pattern.community;
    let members: BTreeSet<NodeId> = community.iter().copied().collect();
    if members.is_empty() {
        return Err(Error::EmptyCommunity);
    }
    for p in patterns {
        if p.community != id {
            return Err(Error::PartitionMismatch(format!(
                "pattern of community {} given with community {id}",
                p.community
            )));
        }
        if let Some(v) = p.supporting_nodes.iter().find(|v| !members.contains(v)) {
            return Err(Error::UnassignedNode(v.index()));
        }
    }

    let top_support = patterns
        .iter()
        .max_by(|a, b| top_support_order(a, b))
        .expect("non-empty")
        .clone();
    let (seed, _) = patterns
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| top_growth_order(a, b))
        .expect("non-empty");

    let mut chosen = vec![false; patterns.len()];
    chosen[seed] = true;
    let mut covered: BTreeSet<NodeId> = patterns[seed].supporting_nodes.iter().copied().collect();
    let first: Vec<NodeId> = patterns[seed].supporting_nodes.clone();
    let mut selected = vec![patterns[seed].clone()];
    let mut trace = vec![TraceStep {
        selected: 0,
        distance: None,
        newly_covered: covered.len(),
        uncovered_after: members.len() - covered.len(),
    }];

    while members.len() - covered.len() > options.max_uncovered {
        let anchor: Vec<NodeId> = match options.anchor {
            DistanceAnchor::Union => covered.iter().copied().collect(),
            DistanceAnchor::First => first.clone(),
        };
        let mut best: Option<(usize, Fraction)> = None;
        for (i, p) in patterns.iter().enumerate() {
            if chosen[i] || p.supporting_nodes.iter().all(|v| covered.contains(v)) {
                continue;
            }
            let d = jaccard_distance_exact(&p.supporting_nodes, &anchor)?;
            let better = match &best {
                None => true,
                Some((j, bd)) => d
                    .cmp(bd)
                    .then(p.growth_rate.cmp(&patterns[*j].growth_rate))
                    .then(patterns[*j].sequence.cmp(&p.sequence))
                    .is_gt(),
            };
            if better {
                best = Some((i, d));
            }
        }
        let Some((i, d)) = best else { break };
        chosen[i] = true;
        let before = covered.len();
        covered.extend(patterns[i].supporting_nodes.iter().copied());
        selected.push(patterns[i].clone());
        trace.push(TraceStep {
            selected: selected.len() - 1,
            distance: Some(d),
            newly_covered: covered.len() - before,
            uncovered_after: members.len() - covered.len(),
        });
    }

    let deviants = members.difference(&covered).copied().collect();
    Ok(CommunityCharacterization {
        community: id,
        size: members.len(),
        pattern_count: patterns.len(),
        top_support,
        selected,
        covered: covered.into_iter().collect(),
        deviants,
        trace,
    })
}

/// Mines and characterizes one community.
pub fn characterize_community(
    db: &SequenceDatabase,
    community: CommunityId,
    mining: &MiningOptions,
    selection: &SelectionOptions,
) -> Result<(Vec<Pattern>, CommunityCharacterization)> {
    let patterns = mine_closed(db, community, mining)?;
    log::info!("community {community}: {} patterns", patterns.len());
    let members = db.members(community);
    let ch = select_representatives(&patterns, &members, selection)?;
    Ok((patterns, ch))
}

/// Ids of the communities with at least `min_size` members, ascending.
pub fn eligible_communities(db: &SequenceDatabase, min_size: usize) -> Vec<CommunityId> {
    db.communities()
        .into_iter()
        .filter(|(_, m)| m.len() >= min_size.max(1))
        .map(|(c, _)| c)
        .collect()
}

/// Characterizes every community of at least `mining.min_community_size`
/// members, in community order, keeping the mined patterns.
pub fn characterize_all_with_patterns(
    db: &SequenceDatabase,
    mining: &MiningOptions,
    selection: &SelectionOptions,
) -> Result<Vec<(Vec<Pattern>, CommunityCharacterization)>> {
    eligible_communities(db, mining.min_community_size)
        .into_par_iter()
        .map(|c| characterize_community(db, c, mining, selection))
        .collect()
}

pub fn characterize_all(
    db: &SequenceDatabase,
    mining: &MiningOptions,
    selection: &SelectionOptions,
) -> Result<Vec<CommunityCharacterization>> {
    Ok(characterize_all_with_patterns(db, mining, selection)?
        .into_iter()
        .map(|(_, c)| c)
        .collect())
}
