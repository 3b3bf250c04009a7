//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use commchar::community::{louvain_with_trace, modularity, CommunityStructure, WeightedGraph};
use commchar::config::PipelineConfig;
use commchar::measures::{slice_measures, Measure};
use commchar::mining::{
    brute_force_mine, growth_rate, mine_closed, support, Fraction, GrowthRate, MiningOptions, Pattern,
};
use commchar::network::StaticGraph;
use commchar::pipeline::{run_on_network, run_pipeline, with_thread_pool, write_outputs, PipelineOutput, Report};
use commchar::selection::{select_representatives, SelectionOptions};
use commchar::seqdb::{is_subsequence, Item, Itemset, SequenceDatabase};
use commchar::synthetic::{planted_network, random_database, PlantedParams, RandomDbParams, PLANTED_ATTRIBUTE};
use commchar::{CommunityId, DescriptorId, Error, NodeId};

enum Outcome {
    Pass(String),
    Skip(String),
}

type Check = Result<Outcome, String>;
type Criterion = (&'static str, fn() -> Check);
type Fixture = (&'static [(usize, usize)], [usize; 6]);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 mining oracle equivalence", oracle_equivalence),
        ("2 measure correctness", measure_correctness),
        ("3 louvain sanity", louvain_sanity),
        ("4 support and growth arithmetic", support_growth),
        ("5 selection contract", selection_contract),
        ("6 planted end-to-end", planted_end_to_end),
        ("7 dblp reproduction", dblp_reproduction),
        ("8 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(Outcome::Pass(detail)) => println!("PASS {name} ({secs:.2}s): {detail}"),
            Ok(Outcome::Skip(why)) => println!("SKIP {name}: {why}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({secs:.2}s): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

// 1

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let params = RandomDbParams::default();
    let supports = [Ratio::new(3, 10), Ratio::new(1, 2), Ratio::from_integer(1)];
    let (mut checked, mut resampled, mut seed) = (0, 0, 0u64);
    while checked < 500 {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let db = random_database(&mut rng, &params);
        let mut runs = Vec::new();
        let mut too_large = false;
        'db: for &min_sup in &supports {
            let opts = MiningOptions::with_min_sup(min_sup);
            for c in [CommunityId(0), CommunityId(1)] {
                match brute_force_mine(&db, c, &opts) {
                    Ok(expected) => runs.push((min_sup, c, expected)),
                    Err(Error::OracleTooLarge(_)) => {
                        too_large = true;
                        break 'db;
                    }
                    Err(e) => return Err(format!("oracle failed on seed {seed}: {e}")),
                }
            }
        }
        if too_large {
            resampled += 1;
            continue;
        }
        for (min_sup, c, expected) in runs {
            let got = mine_closed(&db, c, &MiningOptions::with_min_sup(min_sup)).map_err(|e| e.to_string())?;
            let key = |ps: &[Pattern]| -> BTreeSet<(Vec<Itemset>, Fraction)> {
                ps.iter().map(|p| (p.sequence.clone(), p.support())).collect()
            };
            ensure(key(&got) == key(&expected) && got.len() == expected.len(), || {
                format!("seed {seed} community {c} min_sup {min_sup}\n{}", db.to_text())
            })?;
        }
        checked += 1;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(Outcome::Pass(format!(
        "{checked} databases x 3 supports x 2 communities, {resampled} resampled, {:.1}s",
        elapsed.as_secs_f64()
    )))
}

// 2

/// Measures recomputed from an adjacency matrix.
fn matrix_measures(n: usize, edges: &[(usize, usize)], community: &[usize]) -> Vec<[f64; 6]> {
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in edges {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    let deg: Vec<usize> = (0..n).map(|v| adj[v].iter().filter(|&&b| b).count()).collect();
    let dint: Vec<usize> = (0..n)
        .map(|v| (0..n).filter(|&u| adj[v][u] && community[u] == community[v]).count())
        .collect();
    let mut rows = vec![[0.0; 6]; n];
    for v in 0..n {
        let d = deg[v];
        let mut triangles = 0;
        for a in 0..n {
            for b in a + 1..n {
                if adj[v][a] && adj[v][b] && adj[a][b] {
                    triangles += 1;
                }
            }
        }
        let t = if d < 2 { 0.0 } else { (2 * triangles) as f64 / (d * (d - 1)) as f64 };
        let p = if d == 0 {
            0.0
        } else {
            let labels: BTreeSet<usize> = (0..n).filter(|&u| adj[v][u]).map(|u| community[u]).collect();
            let mut sum = 0.0;
            for c in labels {
                let k = (0..n).filter(|&u| adj[v][u] && community[u] == c).count();
                let share = k as f64 / d as f64;
                sum += share * share;
            }
            1.0 - sum
        };
        let e = if d == 0 { 0.0 } else { dint[v] as f64 / d as f64 };
        let peers: Vec<usize> = (0..n).filter(|&u| community[u] == community[v]).collect();
        let mean = peers.iter().map(|&u| dint[u]).sum::<usize>() as f64 / peers.len() as f64;
        let var = peers
            .iter()
            .map(|&u| (dint[u] as f64 - mean).powi(2))
            .sum::<f64>()
            / peers.len() as f64;
        let z = if var == 0.0 { 0.0 } else { (dint[v] as f64 - mean) / var.sqrt() };
        rows[v] = [d as f64, dint[v] as f64, t, z, p, e];
    }
    rows
}

fn measured(n: usize, edges: &[(usize, usize)], community: &[usize]) -> Result<Vec<[f64; 6]>, String> {
    let g = StaticGraph::from_edges(
        n,
        &edges.iter().map(|&(u, v)| (NodeId::from(u), NodeId::from(v))).collect::<Vec<_>>(),
    )
    .map_err(|e| e.to_string())?;
    slice_measures(&g, &CommunityStructure::from_labels(community)).map_err(|e| e.to_string())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

fn measure_correctness() -> Check {
    let slot = |m: Measure| Measure::ALL.iter().position(|&x| x == m).unwrap();
    let (d, di, t, z, p, e) = (
        slot(Measure::Degree),
        slot(Measure::InternalDegree),
        slot(Measure::Transitivity),
        slot(Measure::ZScore),
        slot(Measure::Participation),
        slot(Measure::Embeddedness),
    );

    // hand-built fixtures, compared exactly
    let fixtures: [Fixture; 3] = [
        (&[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)], [0, 0, 0, 1, 1, 1]),
        (&[(0, 1), (1, 2), (0, 4), (4, 5)], [0, 0, 0, 0, 1, 1]),
        (&[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 2), (3, 4)], [0, 0, 1, 1, 2, 2]),
    ];
    for (k, (edges, community)) in fixtures.iter().enumerate() {
        let got = measured(6, edges, community)?;
        let want = matrix_measures(6, edges, community);
        ensure(got == want, || format!("fixture {k}: got {got:?}, want {want:?}"))?;
    }

    // random graphs against the matrix oracle and the invariants
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..300 {
        let n = rng.random_range(1..=14);
        let k = rng.random_range(1..=n.min(4));
        let community: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let density = rng.random_range(0.05..0.7);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(density) {
                    edges.push((u, v));
                }
            }
        }
        let got = measured(n, &edges, &community)?;
        let want = matrix_measures(n, &edges, &community);
        for v in 0..n {
            let (g, w) = (&got[v], &want[v]);
            ensure(g.iter().zip(w).all(|(a, b)| close(*a, *b)), || {
                format!("case {case} node {v}: got {g:?}, want {w:?}")
            })?;
            ensure(g[di] <= g[d], || format!("case {case}: d_int > d"))?;
            ensure((0.0..=1.0).contains(&g[t]), || format!("case {case}: T out of range"))?;
            ensure(close(g[e] * g[d], g[di]), || format!("case {case}: e*d != d_int"))?;
            if g[d] == 0.0 {
                ensure(g[t] == 0.0 && g[p] == 0.0 && g[e] == 0.0, || {
                    format!("case {case}: isolated node {v} has {g:?}")
                })?;
            }
        }
        for c in 0..k {
            let members: Vec<usize> = (0..n).filter(|&v| community[v] == c).collect();
            if members.is_empty() {
                continue;
            }
            let values: Vec<f64> = members.iter().map(|&v| got[v][di]).collect();
            let zs: Vec<f64> = members.iter().map(|&v| got[v][z]).collect();
            if values.iter().all(|&x| x == values[0]) {
                ensure(zs.iter().all(|&x| x == 0.0), || format!("case {case}: sigma 0 but z {zs:?}"))?;
            } else {
                let mean = zs.iter().sum::<f64>() / zs.len() as f64;
                ensure(mean.abs() < 1e-9, || format!("case {case}: z mean {mean}"))?;
            }
        }
    }

    // even m-way splits: hub 0 with two neighbours in each of m communities
    for m in 1..=6usize {
        let n = 1 + 2 * m;
        let community: Vec<usize> = (0..n).map(|v| if v == 0 { 0 } else { (v - 1) / 2 }).collect();
        let edges: Vec<(usize, usize)> = (1..n).map(|v| (0, v)).collect();
        let got = measured(n, &edges, &community)?;
        let want = 1.0 - 1.0 / m as f64;
        ensure(close(got[0][p], want), || format!("m={m}: P={} want {want}", got[0][p]))?;
    }
    Ok(Outcome::Pass("3 fixtures exact, 300 random graphs, m-way splits 1..=6".into()))
}

// 3

fn weighted(n: usize, edges: &[(usize, usize)]) -> WeightedGraph {
    let edges: Vec<_> = edges.iter().map(|&(u, v)| (NodeId::from(u), NodeId::from(v), 1)).collect();
    WeightedGraph::from_edges(n, &edges).expect("valid graph")
}

/// Newman modularity of a two-way split given as a bitmask.
fn split_modularity(edges: &[(usize, usize)], n: usize, mask: u32) -> f64 {
    let side = |v: usize| (mask >> v) & 1;
    let m = edges.len() as f64;
    let mut deg = vec![0usize; n];
    let mut inside = [0usize; 2];
    for &(u, v) in edges {
        deg[u] += 1;
        deg[v] += 1;
        if side(u) == side(v) {
            inside[side(u) as usize] += 1;
        }
    }
    (0..2)
        .map(|s| {
            let total: usize = (0..n).filter(|&v| side(v) == s as u32).map(|v| deg[v]).sum();
            inside[s] as f64 / m - (total as f64 / (2.0 * m)).powi(2)
        })
        .sum()
}

fn louvain_sanity() -> Check {
    let mut edges = Vec::new();
    for base in [0, 5] {
        for u in base..base + 5 {
            for v in u + 1..base + 5 {
                edges.push((u, v));
            }
        }
    }
    edges.push((4, 5));
    let g = weighted(10, &edges);

    let best = (0..1u32 << 9)
        .map(|mask| (mask << 1, split_modularity(&edges, 10, mask << 1)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let clique_mask = 0b11111_00000u32;
    ensure(best.0 == clique_mask, || format!("best 2-split is {:010b}", best.0))?;

    let expected: BTreeSet<BTreeSet<usize>> = [(0..5).collect(), (5..10).collect()].into_iter().collect();
    for seed in 0..20 {
        let r = louvain_with_trace(&g, seed).map_err(|e| e.to_string())?;
        let mut groups = std::collections::BTreeMap::<CommunityId, BTreeSet<usize>>::new();
        for (v, c) in r.structure.assignment().iter().enumerate() {
            groups.entry(*c).or_default().insert(v);
        }
        let got: BTreeSet<BTreeSet<usize>> = groups.into_values().collect();
        ensure(got == expected, || format!("seed {seed}: {got:?}"))?;
        ensure(r.level_modularity.windows(2).all(|w| w[1] >= w[0]), || {
            format!("seed {seed}: modularity decreased {:?}", r.level_modularity)
        })?;
        let q = modularity(&g, &r.structure).map_err(|e| e.to_string())?;
        ensure(close(q, best.1), || format!("seed {seed}: Q {q} vs oracle {}", best.1))?;
    }

    let one = modularity(&g, &CommunityStructure::from_labels(&[0; 10])).map_err(|e| e.to_string())?;
    ensure(one == 0.0, || format!("all-in-one Q = {one}"))?;
    let pair = weighted(2, &[(0, 1)]);
    let single = modularity(&pair, &CommunityStructure::singletons(2)).map_err(|e| e.to_string())?;
    ensure(single == -0.5, || format!("singleton Q = {single}"))?;
    Ok(Outcome::Pass(format!("clique split for 20 seeds, Q = {:.6}", best.1)))
}

// 4

/// Backtracking embedding search.
fn embeds(pattern: &[Itemset], sequence: &[Itemset]) -> bool {
    fn go(p: &[Itemset], s: &[Itemset], from: usize) -> bool {
        match p.split_first() {
            None => true,
            Some((head, rest)) => (from..s.len()).any(|j| {
                head.items().iter().all(|i| s[j].items().contains(i)) && go(rest, s, j + 1)
            }),
        }
    }
    go(pattern, sequence, 0)
}

fn random_pattern(rng: &mut ChaCha8Rng, db: &SequenceDatabase) -> Vec<Itemset> {
    if rng.random_bool(0.5) {
        // drawn from a random node so that it has at least one supporter
        let v = rng.random_range(0..db.len());
        let mut out = Vec::new();
        for set in db.entries()[v].sequence.elements() {
            if rng.random_bool(0.5) {
                let items: Vec<Item> = set.items().iter().copied().filter(|_| rng.random_bool(0.6)).collect();
                if !items.is_empty() {
                    out.push(Itemset::new(items).unwrap());
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
    }
    let descriptors = db.vocabulary().len();
    let len = rng.random_range(1..=2);
    (0..len)
        .map(|_| {
            let d = rng.random_range(0..descriptors) as u16;
            Itemset::new([Item::new(DescriptorId(d), 0)]).unwrap()
        })
        .collect()
}

fn support_growth() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = RandomDbParams::default();
    let (mut finite, mut infinite, mut zero) = (0, 0, 0);
    for draw in 0..100 {
        let db = random_database(&mut rng, &params);
        let n = db.len();
        let size = rng.random_range(1..n);
        let mut nodes: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(nodes.as_mut_slice(), &mut rng);
        let community: Vec<NodeId> = nodes[..size].iter().map(|&v| NodeId::from(v)).collect();
        let inside: HashSet<NodeId> = community.iter().copied().collect();
        let s = random_pattern(&mut rng, &db);

        let count = |pred: &dyn Fn(NodeId) -> bool| {
            db.entries()
                .iter()
                .filter(|e| pred(e.node) && embeds(&s, e.sequence.elements()))
                .count() as u64
        };
        let sup_in = Ratio::new(count(&|v| inside.contains(&v)), size as u64);
        let sup_out = Ratio::new(count(&|v| !inside.contains(&v)), (n - size) as u64);

        let got = support(&s, &community, &db).map_err(|e| e.to_string())?;
        ensure(got == sup_in, || format!("draw {draw}: support {got} want {sup_in}"))?;
        let gr = growth_rate(&s, &community, &db).map_err(|e| e.to_string())?;
        match gr {
            GrowthRate::Finite(r) if !sup_out.is_zero() => {
                ensure(r * sup_out == sup_in, || format!("draw {draw}: {r} * {sup_out} != {sup_in}"))?;
                finite += 1;
            }
            GrowthRate::Infinite => {
                ensure(sup_out.is_zero() && !sup_in.is_zero(), || format!("draw {draw}: spurious infinity"))?;
                infinite += 1;
            }
            GrowthRate::Finite(r) => {
                ensure(sup_in.is_zero() && r.is_zero(), || format!("draw {draw}: {r} with empty complement support"))?;
                zero += 1;
            }
        }
    }
    Ok(Outcome::Pass(format!("100 draws: {finite} finite, {infinite} infinite, {zero} zero/zero")))
}

// 5

fn tagged(tag: u16, supporters: Vec<NodeId>, size: usize, gr: u64) -> Pattern {
    Pattern {
        community: CommunityId(0),
        sequence: vec![Itemset::new([Item::new(DescriptorId(tag), 0)]).unwrap()],
        supporting_nodes: supporters,
        community_size: size,
        complement_support: Ratio::new(1, 10),
        growth_rate: GrowthRate::Finite(Ratio::from_integer(gr)),
    }
}

fn selection_contract() -> Check {
    let ids = |r: std::ops::RangeInclusive<u32>| r.map(NodeId).collect::<Vec<_>>();
    let c = ids(1..=12);
    let a = tagged(0, ids(1..=6), 12, 9);
    let b = tagged(1, ids(5..=10), 12, 3);
    let d = tagged(2, ids(9..=10), 12, 2);
    let opts = SelectionOptions {
        max_uncovered: 2,
        ..Default::default()
    };
    let ch = select_representatives(&[b.clone(), d.clone(), a.clone()], &c, &opts).map_err(|e| e.to_string())?;
    ensure(ch.selected == vec![a, d, b], || "selection order differs from the hand trace".into())?;
    let dist: Vec<_> = ch.trace.iter().map(|t| t.distance).collect();
    ensure(dist == vec![None, Some(Ratio::from_integer(1)), Some(Ratio::new(3, 5))], || {
        format!("distances {dist:?}")
    })?;
    let fresh: Vec<_> = ch.trace.iter().map(|t| t.newly_covered).collect();
    ensure(fresh == vec![6, 2, 2], || format!("newly covered {fresh:?}"))?;
    ensure(ch.deviants == vec![NodeId(11), NodeId(12)], || format!("deviants {:?}", ch.deviants))?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut runs, mut achievable) = (0, 0);
    while runs < 200 {
        let db = random_database(&mut rng, &RandomDbParams::default());
        let sup = [Ratio::new(1, 5), Ratio::new(3, 10), Ratio::new(1, 2)][rng.random_range(0..3)];
        let patterns = match mine_closed(&db, CommunityId(0), &MiningOptions::with_min_sup(sup)) {
            Ok(p) if !p.is_empty() => p,
            _ => continue,
        };
        runs += 1;
        let members = db.members(CommunityId(0));
        let opts = SelectionOptions {
            max_uncovered: rng.random_range(0..=3),
            ..Default::default()
        };
        let ch = select_representatives(&patterns, &members, &opts).map_err(|e| e.to_string())?;
        let supports_any =
            |v: NodeId| ch.selected.iter().any(|p| is_subsequence(&p.sequence, db.sequence(v).elements()));
        for &v in &ch.deviants {
            ensure(!supports_any(v), || format!("deviant {v} supports a selected pattern\n{}", db.to_text()))?;
        }
        for &v in &ch.covered {
            ensure(supports_any(v), || format!("covered {v} supports nothing selected"))?;
        }
        ensure(ch.covered.len() + ch.deviants.len() == members.len(), || "coverage split is not a partition".into())?;
        let reachable: BTreeSet<NodeId> = patterns.iter().flat_map(|p| p.supporting_nodes.iter().copied()).collect();
        if members.len() - reachable.len() <= opts.max_uncovered {
            achievable += 1;
            ensure(ch.deviants.len() <= opts.max_uncovered, || {
                format!("{} deviants with max_uncovered {}", ch.deviants.len(), opts.max_uncovered)
            })?;
        }
    }
    Ok(Outcome::Pass(format!("hand trace, {runs} mined databases, {achievable} with achievable coverage")))
}

// 6

fn planted_end_to_end() -> Check {
    let params = PlantedParams::default();
    let mut details = Vec::new();
    for seed in [1, 2, 3] {
        let start = Instant::now();
        let net = planted_network(&params, seed).map_err(|e| e.to_string())?;
        let config = PipelineConfig::new(params.slices);
        let out = run_on_network(&config, net).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        ensure(elapsed < Duration::from_secs(30), || format!("seed {seed}: took {elapsed:?}"))?;

        let c0: Vec<NodeId> = out.network.nodes().filter(|&v| out.network.label(v).starts_with("c0_")).collect();
        let mut counts = std::collections::BTreeMap::<CommunityId, usize>::new();
        for &v in &c0 {
            *counts.entry(out.partition.community_of(v).map_err(|e| e.to_string())?).or_default() += 1;
        }
        let (&target, _) = counts.iter().max_by_key(|(c, n)| (**n, std::cmp::Reverse(**c))).unwrap();
        let (_, ch) = out
            .results
            .iter()
            .find(|(_, ch)| ch.community == target)
            .ok_or_else(|| format!("seed {seed}: community {target} not characterized"))?;
        let top = &ch.selected[0];
        let vocab = out.database.vocabulary();
        let has_planted = top
            .sequence
            .iter()
            .flat_map(|s| s.items())
            .any(|&i| vocab.descriptor_name(i.descriptor) == PLANTED_ATTRIBUTE);
        ensure(has_planted, || format!("seed {seed}: top pattern {}", vocab.format_sequence(&top.sequence)))?;
        ensure(top.growth_rate >= GrowthRate::Finite(Ratio::from_integer(5)), || {
            format!("seed {seed}: growth rate {:?}", top.growth_rate)
        })?;
        ensure(top.support() >= Ratio::new(1, 2), || format!("seed {seed}: support {}", top.support()))?;
        details.push(format!(
            "seed {seed} {} sup {} gr {} {:.2}s",
            vocab.format_sequence(&top.sequence),
            top.support(),
            match top.growth_rate {
                GrowthRate::Infinite => "inf".to_string(),
                GrowthRate::Finite(r) => format!("{:.2}", r.to_f64().unwrap_or(f64::NAN)),
            },
            elapsed.as_secs_f64()
        ));
    }
    Ok(Outcome::Pass(details.join("; ")))
}

// 7

/// Reference run: `COMMCHAR_DBLP_DIR` holds `config.toml` naming the inputs,
/// plus an optional `expected.csv` with `community,support` rows for the
/// top growth-rate pattern of selected communities.
fn dblp_reproduction() -> Check {
    let Some(dir) = std::env::var_os("COMMCHAR_DBLP_DIR") else {
        return Ok(Outcome::Skip("COMMCHAR_DBLP_DIR not set".into()));
    };
    let dir = Path::new(&dir);
    let config = PipelineConfig::load(dir.join("config.toml")).map_err(|e| e.to_string())?;
    let out = with_thread_pool(config.pipeline.threads, || run_pipeline(&config)).map_err(|e| e.to_string())?;
    ensure((out.modularity - 0.59).abs() <= 0.02, || format!("Q = {:.4}", out.modularity))?;
    let sizes = out.partition.sizes();
    let mut detail = format!(
        "Q = {:.4}, {} communities, {} singletons, largest {}",
        out.modularity,
        sizes.len(),
        sizes.iter().filter(|&&s| s == 1).count(),
        sizes.iter().max().copied().unwrap_or(0)
    );
    let expected = dir.join("expected.csv");
    if expected.exists() {
        let mut reader = csv::Reader::from_path(&expected).map_err(|e| e.to_string())?;
        let mut checked = 0;
        for row in reader.records() {
            let row = row.map_err(|e| e.to_string())?;
            let c: u32 = row[0].trim().parse().map_err(|e| format!("{e}"))?;
            let want: f64 = row[1].trim().parse().map_err(|e| format!("{e}"))?;
            let (_, ch) = out
                .results
                .iter()
                .find(|(_, ch)| ch.community == CommunityId(c))
                .ok_or_else(|| format!("community {c} not characterized"))?;
            let got = ch.selected[0].support().to_f64().unwrap_or(f64::NAN);
            ensure((got - want).abs() <= 0.05, || format!("community {c}: support {got:.3} want {want}"))?;
            checked += 1;
        }
        detail.push_str(&format!(", {checked} top patterns within 0.05"));
    }
    Ok(Outcome::Pass(detail))
}

// 8

fn determinism() -> Check {
    let params = PlantedParams::default();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |threads: usize, tag: &str| -> Result<(String, Vec<u8>, Vec<u8>), String> {
        let mut config = PipelineConfig::new(params.slices);
        config.output.report = Some(dir.path().join(format!("{tag}.json")));
        config.output.patterns = Some(dir.path().join(format!("{tag}.jsonl")));
        let out: PipelineOutput = with_thread_pool(Some(threads), || {
            let net = planted_network(&params, 11)?;
            run_on_network(&config, net)
        })
        .map_err(|e| e.to_string())?;
        write_outputs(&config, &out).map_err(|e| e.to_string())?;
        let json = Report::new(&config, &out).to_json().map_err(|e| e.to_string())?;
        let read = |p: &Option<std::path::PathBuf>| std::fs::read(p.as_ref().unwrap()).map_err(|e| e.to_string());
        Ok((json, read(&config.output.report)?, read(&config.output.patterns)?))
    };
    let a = run(1, "a")?;
    let b = run(1, "b")?;
    let c = run(4, "c")?;
    ensure(a == b, || "two identical runs differ".into())?;
    ensure(a == c, || "1 and 4 worker threads differ".into())?;
    ensure(a.0.as_bytes() == a.1.as_slice(), || "written report differs from rendered".into())?;
    Ok(Outcome::Pass(format!(
        "report {} bytes and patterns {} bytes identical across 3 runs",
        a.1.len(),
        a.2.len()
    )))
}
