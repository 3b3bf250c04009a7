//! Seeded generators: small random sequence databases and a planted
//! community network with a known characteristic attribute.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::ids::{CommunityId, DescriptorId};
use crate::measures::Measure;
use crate::network::{Bins, DescriptorConfig, DescriptorKind, DynamicAttributedNetwork, NetworkBuilder};
use crate::seqdb::{Item, Itemset, NodeSequence, SequenceDatabase, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomDbParams {
    pub max_nodes: usize,
    pub max_slices: usize,
    pub max_descriptors: usize,
    pub max_bins: usize,
    /// Chance that a descriptor shows up in a given element.
    pub density: f64,
}

impl Default for RandomDbParams {
    fn default() -> Self {
        RandomDbParams {
            max_nodes: 12,
            max_slices: 4,
            max_descriptors: 6,
            max_bins: 2,
            density: 0.3,
        }
    }
}

/// Random database with two communities, `0` and `1`, each non-empty.
pub fn random_database(rng: &mut impl Rng, params: &RandomDbParams) -> SequenceDatabase {
    let nodes = rng.random_range(2..=params.max_nodes.max(2));
    let slices = rng.random_range(1..=params.max_slices.max(1));
    let descriptors = rng.random_range(1..=params.max_descriptors.max(1));
    let bins = rng.random_range(1..=params.max_bins.max(1));
    let vocab = Vocabulary::new(
        (0..descriptors)
            .map(|d| {
                (
                    format!("d{d}"),
                    (0..bins).map(|b| format!("b{b}")).collect(),
                )
            })
            .collect(),
    );
    let in_first = rng.random_range(1..nodes);
    let rows: Vec<_> = (0..nodes)
        .map(|v| {
            let elements = (0..slices).map(|j| {
                let mut items = Vec::new();
                for d in 0..descriptors {
                    if rng.random_bool(params.density) {
                        items.push(Item::new(DescriptorId(d as u16), rng.random_range(0..bins) as u8));
                    }
                }
                (j, Itemset::new(items).expect("one bin per descriptor"))
            });
            let seq = NodeSequence::new(elements.collect::<Vec<_>>()).expect("increasing slices");
            let c = CommunityId(u32::from(v >= in_first));
            (format!("n{v}"), c, seq)
        })
        .collect();
    SequenceDatabase::new(vocab, rows).expect("items match the vocabulary")
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedParams {
    pub communities: usize,
    pub community_size: usize,
    pub slices: usize,
    /// Chance that a node takes part in a given slice; edges only join
    /// active nodes.
    pub activity: f64,
    pub p_in: f64,
    pub p_out: f64,
    /// Minimum fraction of slices in which members of community 0 carry
    /// the planted attribute.
    pub planted_fraction: f64,
    /// Per-slice probability for everybody else.
    pub background_rate: f64,
    /// Per-slice probability of the neutral `noise` attribute.
    pub noise_rate: f64,
}

impl Default for PlantedParams {
    fn default() -> Self {
        PlantedParams {
            communities: 3,
            community_size: 40,
            slices: 6,
            activity: 0.5,
            p_in: 0.25,
            p_out: 0.004,
            planted_fraction: 0.6,
            background_rate: 0.005,
            noise_rate: 0.3,
        }
    }
}

/// Name of the attribute planted in the first community.
pub const PLANTED_ATTRIBUTE: &str = "planted";
pub const NOISE_ATTRIBUTE: &str = "noise";

/// Descriptor schema of the planted network: the six measures with default
/// bins, then the two attributes with a single `>0` bin each.
pub fn planted_schema(slices: usize) -> Result<DescriptorConfig> {
    let mut descriptors: Vec<(String, DescriptorKind, Bins)> = Measure::ALL
        .iter()
        .map(|&m| {
            Ok((
                m.name().to_string(),
                DescriptorKind::Topological(m),
                Bins::new(m.default_thresholds().to_vec(), None)?,
            ))
        })
        .collect::<Result<_>>()?;
    for name in [NOISE_ATTRIBUTE, PLANTED_ATTRIBUTE] {
        descriptors.push((
            name.to_string(),
            DescriptorKind::Attribute,
            Bins::new(vec![], Some(vec!["yes".into()]))?,
        ));
    }
    DescriptorConfig::new(slices, descriptors)
}

/// Planted network. Nodes `c{k}_{i}` belong to community `k`; members of
/// `c0` carry the planted attribute in at least `planted_fraction` of the
/// slices.
pub fn planted_network(params: &PlantedParams, seed: u64) -> Result<DynamicAttributedNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = NetworkBuilder::new(planted_schema(params.slices)?);
    let labels: Vec<(usize, String)> = (0..params.communities)
        .flat_map(|k| (0..params.community_size).map(move |i| (k, format!("c{k}_{i}"))))
        .collect();
    for (_, l) in &labels {
        b.add_node(l);
    }
    let mut touched = vec![false; labels.len()];
    for j in 0..params.slices {
        let active: Vec<bool> = labels.iter().map(|_| rng.random_bool(params.activity)).collect();
        for (a, (ka, la)) in labels.iter().enumerate() {
            for (b_, (kb, lb)) in labels.iter().enumerate().skip(a + 1) {
                let p = if ka == kb { params.p_in } else { params.p_out };
                if active[a] && active[b_] && rng.random_bool(p) {
                    b.add_edge(j, la, lb)?;
                    touched[a] = true;
                    touched[b_] = true;
                }
            }
        }
    }
    // the edge file defines the node set, so nobody may stay isolated throughout
    for a in 0..labels.len() {
        if !touched[a] && params.community_size > 1 {
            let k = labels[a].0;
            let size = params.community_size;
            let partner = k * size + (a - k * size + 1 + rng.random_range(0..size - 1)) % size;
            b.add_edge(rng.random_range(0..params.slices), &labels[a].1, &labels[partner].1)?;
            touched[partner] = true;
        }
    }
    let planted_slices = (params.planted_fraction * params.slices as f64).ceil() as usize;
    for (k, l) in &labels {
        let carries: Vec<bool> = if *k == 0 {
            let count = rng.random_range(planted_slices.min(params.slices)..=params.slices);
            let mut slots: Vec<bool> = (0..params.slices).map(|j| j < count).collect();
            rand::seq::SliceRandom::shuffle(slots.as_mut_slice(), &mut rng);
            slots
        } else {
            (0..params.slices)
                .map(|_| rng.random_bool(params.background_rate))
                .collect()
        };
        for (j, &c) in carries.iter().enumerate() {
            if c {
                b.set_attribute(l, j, PLANTED_ATTRIBUTE, 1.0)?;
            }
            if rng.random_bool(params.noise_rate) {
                b.set_attribute(l, j, NOISE_ATTRIBUTE, 1.0)?;
            }
        }
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_database_respects_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = RandomDbParams::default();
        for _ in 0..50 {
            let db = random_database(&mut rng, &p);
            assert!(db.len() >= 2 && db.len() <= p.max_nodes);
            assert_eq!(db.communities().len(), 2);
            assert!(db.vocabulary().len() <= p.max_descriptors);
            for e in db.entries() {
                assert!(e.sequence.len() <= p.max_slices);
            }
        }
    }

    #[test]
    fn planted_network_is_reproducible() {
        let p = PlantedParams::default();
        let a = planted_network(&p, 7).unwrap();
        let b = planted_network(&p, 7).unwrap();
        assert_eq!(a.to_string(), b.to_string());
        assert_eq!(a.node_count(), 120);
        let d = a.schema().by_name(PLANTED_ATTRIBUTE).unwrap().id;
        let min = (0.6 * p.slices as f64).ceil() as usize;
        for v in a.nodes().filter(|v| a.label(*v).starts_with("c0_")) {
            let n = (0..p.slices).filter(|&j| a.attribute(v, j, d) > 0.0).count();
            assert!(n >= min);
        }
    }
}
