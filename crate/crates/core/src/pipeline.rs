//! End-to-end orchestration, report types and output writers.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::community::{aggregate, louvain_with_trace, modularity, CommunityStructure};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::ids::CommunityId;
use crate::measures::{compute_measure_table, Measure, MeasureTable};
use crate::mining::{Fraction, GrowthRate, Pattern};
use crate::network::{load_network, DescriptorKind, DynamicAttributedNetwork};
use crate::selection::{characterize_all_with_patterns, CommunityCharacterization};
use crate::seqdb::{build_database, SequenceDatabase};

/// Environment variable overriding the worker pool size.
pub const THREADS_ENV: &str = "COMMCHAR_THREADS";

/// Runs `f` inside a rayon pool sized by `COMMCHAR_THREADS`, then by
/// `configured`, then by rayon's default.
pub fn with_thread_pool<T: Send>(
    configured: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::Config(format!("{THREADS_ENV}={v:?} is not a positive integer")))?,
        ),
        Err(_) => configured,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(f)
}

/// Everything the pipeline computes.
#[derive(Debug)]
pub struct PipelineOutput {
    pub network: DynamicAttributedNetwork,
    pub partition: CommunityStructure,
    pub modularity: f64,
    pub level_modularity: Vec<f64>,
    pub measures: MeasureTable,
    pub database: SequenceDatabase,
    pub results: Vec<(Vec<Pattern>, CommunityCharacterization)>,
}

/// Loads the network named by the config's input section.
pub fn load_input(config: &PipelineConfig) -> Result<DynamicAttributedNetwork> {
    let edges = config
        .input
        .edges
        .as_deref()
        .ok_or_else(|| Error::Config("no edge file given".into()))?;
    load_network(edges, config.input.attributes.as_deref(), &config.descriptor_config()?)
}

/// Louvain on the aggregated graph, with its modularity trace.
pub fn detect_communities(
    net: &DynamicAttributedNetwork,
    seed: u64,
) -> Result<(CommunityStructure, f64, Vec<f64>)> {
    let g = aggregate(net);
    let result = louvain_with_trace(&g, seed)?;
    let q = modularity(&g, &result.structure)?;
    log::info!(
        "{} communities, modularity {q:.4}",
        result.structure.len()
    );
    Ok((result.structure, q, result.level_modularity))
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let network = load_input(config)?;
    run_on_network(config, network)
}

/// The pipeline on an already loaded network.
pub fn run_on_network(config: &PipelineConfig, network: DynamicAttributedNetwork) -> Result<PipelineOutput> {
    let (partition, q, levels) = detect_communities(&network, config.pipeline.seed)?;
    let measures = compute_measure_table(&network, &partition)?;
    let database = build_database(&network, &measures, &partition)?;
    let results = characterize_all_with_patterns(
        &database,
        &config.mining_options(),
        &config.selection_options(),
    )?;
    Ok(PipelineOutput {
        network,
        partition,
        modularity: q,
        level_modularity: levels,
        measures,
        database,
        results,
    })
}

/// Writes every output named in the config.
pub fn write_outputs(config: &PipelineConfig, out: &PipelineOutput) -> Result<()> {
    let o = &config.output;
    if let Some(p) = &o.partition {
        write_file(p, |w| write_partition(w, &out.network, &out.partition))?;
    }
    if let Some(p) = &o.measures {
        write_file(p, |w| write_measures(w, &out.network, &out.measures))?;
    }
    if let Some(p) = &o.database {
        write_file(p, |w| out.database.write(w))?;
    }
    if let Some(p) = &o.patterns {
        write_file(p, |w| {
            for (patterns, _) in &out.results {
                write_patterns(&mut *w, &out.database, patterns)?;
            }
            Ok(())
        })?;
    }
    if let Some(p) = &o.report {
        let report = Report::new(config, out);
        write_file(p, |w| {
            w.write_all(report.to_json()?.as_bytes())
                .map_err(|e| Error::io(p, e))
        })?;
    }
    Ok(())
}

pub fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn out_err(e: std::io::Error) -> Error {
    Error::io("<output>", e)
}

/// `node,community` rows.
pub fn write_partition(
    w: &mut dyn Write,
    net: &DynamicAttributedNetwork,
    cs: &CommunityStructure,
) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["node", "community"]).map_err(|e| Error::parse("partition", e))?;
    for v in net.nodes() {
        csv.write_record([net.label(v), &cs.community_of(v)?.to_string()])
            .map_err(|e| Error::parse("partition", e))?;
    }
    csv.flush().map_err(out_err)
}

/// Reads `node,community` rows into a partition over the network's nodes.
/// Community ids are renumbered by smallest member.
pub fn read_partition(path: &Path, net: &DynamicAttributedNetwork) -> Result<CommunityStructure> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path.display().to_string(), e))?;
    let mut labels: Vec<Option<String>> = vec![None; net.node_count()];
    for row in reader.records() {
        let row = row.map_err(|e| Error::parse(path.display().to_string(), e))?;
        if row.len() != 2 {
            return Err(Error::parse(path.display().to_string(), "expected node,community"));
        }
        let v = net
            .node_by_label(&row[0])
            .ok_or_else(|| Error::Consistency(format!("unknown node {:?} in partition", &row[0])))?;
        if labels[v.index()].replace(row[1].to_string()).is_some() {
            return Err(Error::Consistency(format!("node {:?} assigned twice", &row[0])));
        }
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(v, l)| l.ok_or(Error::UnassignedNode(v)))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    Ok(CommunityStructure::from_labels(&refs))
}

/// `node,slice,measure,value,bin` rows. The bin column is empty for
/// measures that are disabled or undefined (degree 0).
pub fn write_measures(w: &mut dyn Write, net: &DynamicAttributedNetwork, table: &MeasureTable) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let ctx = |e: csv::Error| Error::parse("measures", e);
    csv.write_record(["node", "slice", "measure", "value", "bin"]).map_err(ctx)?;
    let descriptors: Vec<Option<&crate::network::Descriptor>> = Measure::ALL
        .iter()
        .map(|&m| {
            net.descriptors()
                .iter()
                .find(|d| d.kind == DescriptorKind::Topological(m))
        })
        .collect();
    for v in net.nodes() {
        for j in 0..net.num_slices() {
            let isolated = table.is_isolated(v, j);
            for (&m, d) in Measure::ALL.iter().zip(&descriptors) {
                let value = table.get(v, j, m);
                let bin = match d {
                    Some(d) if !isolated => d.bins.label(d.bins.bin_of(value)),
                    _ => "",
                };
                csv.write_record([net.label(v), &j.to_string(), m.name(), &value.to_string(), bin])
                    .map_err(ctx)?;
            }
        }
    }
    csv.flush().map_err(out_err)
}

/// Growth rate as JSON: a number, or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GrowthValue {
    Finite(f64),
    Infinite(Inf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inf {
    #[serde(rename = "inf")]
    Inf,
}

impl From<GrowthRate> for GrowthValue {
    fn from(g: GrowthRate) -> Self {
        match g {
            GrowthRate::Infinite => GrowthValue::Infinite(Inf::Inf),
            GrowthRate::Finite(r) => GrowthValue::Finite(ratio_f64(r)),
        }
    }
}

impl std::fmt::Display for GrowthValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GrowthValue::Finite(x) => write!(f, "{x:.2}"),
            GrowthValue::Infinite(_) => f.write_str("inf"),
        }
    }
}

fn ratio_f64(r: Fraction) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// One line of the patterns JSONL output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRecord {
    pub community: u32,
    pub sequence: String,
    pub length: usize,
    pub support: f64,
    pub support_exact: String,
    pub growth_rate: GrowthValue,
    pub supporters: Vec<String>,
}

impl PatternRecord {
    pub fn new(db: &SequenceDatabase, p: &Pattern) -> Self {
        PatternRecord {
            community: p.community.0,
            sequence: db.vocabulary().format_sequence(&p.sequence),
            length: p.length(),
            support: ratio_f64(p.support()),
            support_exact: p.support().to_string(),
            growth_rate: p.growth_rate.into(),
            supporters: p.supporting_nodes.iter().map(|&v| db.label(v).to_string()).collect(),
        }
    }
}

pub fn write_patterns(w: &mut dyn Write, db: &SequenceDatabase, patterns: &[Pattern]) -> Result<()> {
    for p in patterns {
        let line = serde_json::to_string(&PatternRecord::new(db, p))
            .map_err(|e| Error::parse("patterns", e))?;
        writeln!(w, "{line}").map_err(out_err)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub sequence: String,
    pub distance: Option<f64>,
    pub newly_covered: usize,
    pub uncovered_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationRecord {
    pub community: u32,
    pub size: usize,
    pub pattern_count: usize,
    pub top_support: PatternRecord,
    pub selected: Vec<PatternRecord>,
    pub trace: Vec<TraceRecord>,
    pub covered: usize,
    pub deviants: Vec<String>,
}

impl CharacterizationRecord {
    pub fn new(db: &SequenceDatabase, c: &CommunityCharacterization) -> Self {
        CharacterizationRecord {
            community: c.community.0,
            size: c.size,
            pattern_count: c.pattern_count,
            top_support: PatternRecord::new(db, &c.top_support),
            selected: c.selected.iter().map(|p| PatternRecord::new(db, p)).collect(),
            trace: c
                .trace
                .iter()
                .map(|t| TraceRecord {
                    sequence: db.vocabulary().format_sequence(&c.selected[t.selected].sequence),
                    distance: t.distance.map(ratio_f64),
                    newly_covered: t.newly_covered,
                    uncovered_after: t.uncovered_after,
                })
                .collect(),
            covered: c.covered.len(),
            deviants: c.deviants.iter().map(|&v| db.label(v).to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub nodes: usize,
    pub slices: usize,
    pub edges_per_slice: Vec<usize>,
    pub descriptors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySummary {
    pub count: usize,
    pub singletons: usize,
    pub largest: usize,
    pub modularity: f64,
    pub level_modularity: Vec<f64>,
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsSummary {
    pub seed: u64,
    pub min_sup: String,
    pub min_community_size: usize,
    pub max_uncovered: usize,
    pub distance_anchor: String,
    pub mode: String,
}

/// The characterization report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub network: NetworkSummary,
    pub communities: CommunitySummary,
    pub settings: SettingsSummary,
    pub characterizations: Vec<CharacterizationRecord>,
}

impl Report {
    pub fn new(config: &PipelineConfig, out: &PipelineOutput) -> Self {
        let sizes = out.partition.sizes();
        let p = &config.pipeline;
        let lower = |s: String| s.to_lowercase();
        Report {
            network: NetworkSummary {
                nodes: out.network.node_count(),
                slices: out.network.num_slices(),
                edges_per_slice: (0..out.network.num_slices())
                    .map(|j| out.network.slice_edges(j).map(<[_]>::len).unwrap_or(0))
                    .collect(),
                descriptors: out.network.descriptors().iter().map(|d| d.name.clone()).collect(),
            },
            communities: CommunitySummary {
                count: sizes.len(),
                singletons: sizes.iter().filter(|&&s| s == 1).count(),
                largest: sizes.iter().copied().max().unwrap_or(0),
                modularity: out.modularity,
                level_modularity: out.level_modularity.clone(),
                sizes,
            },
            settings: SettingsSummary {
                seed: p.seed,
                min_sup: p.min_sup.0.to_string(),
                min_community_size: p.min_community_size,
                max_uncovered: p.max_uncovered,
                distance_anchor: lower(format!("{:?}", p.distance_anchor)),
                mode: lower(format!("{:?}", p.mode)),
            },
            characterizations: out
                .results
                .iter()
                .map(|(_, c)| CharacterizationRecord::new(&out.database, c))
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::parse("report", e))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("report", e))
    }

    pub fn characterization(&self, c: CommunityId) -> Option<&CharacterizationRecord> {
        self.characterizations.iter().find(|r| r.community == c.0)
    }

    /// Plain-text summary.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let n = &self.network;
        let c = &self.communities;
        let _ = writeln!(s, "network: {} nodes, {} slices", n.nodes, n.slices);
        let _ = writeln!(
            s,
            "communities: {} ({} singletons, largest {}), modularity {:.4}",
            c.count, c.singletons, c.largest, c.modularity
        );
        let _ = writeln!(
            s,
            "settings: min_sup {}, min size {}, max uncovered {}, anchor {}, mode {}",
            self.settings.min_sup,
            self.settings.min_community_size,
            self.settings.max_uncovered,
            self.settings.distance_anchor,
            self.settings.mode
        );
        for ch in &self.characterizations {
            let _ = writeln!(
                s,
                "\ncommunity {} ({} nodes, {} patterns)",
                ch.community, ch.size, ch.pattern_count
            );
            let t = &ch.top_support;
            let _ = writeln!(
                s,
                "  top support: {} sup {:.2} gr {} length {}",
                t.sequence, t.support, t.growth_rate, t.length
            );
            for p in &ch.selected {
                let _ = writeln!(
                    s,
                    "  selected: {} sup {:.2} gr {} covers {}",
                    p.sequence,
                    p.support,
                    p.growth_rate,
                    p.supporters.len()
                );
            }
            let deviants = if ch.deviants.is_empty() {
                "none".to_string()
            } else {
                ch.deviants.join(", ")
            };
            let _ = writeln!(s, "  deviants: {deviants}");
        }
        s
    }
}
