use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commchar::config::{Anchor, MinSupport, Mode, PipelineConfig};
use commchar::mining::{mine_closed, parse_fraction, MiningMode, MiningOptions};
use commchar::pipeline::{
    detect_communities, load_input, run_on_network, with_thread_pool, write_file, write_measures,
    write_outputs, write_partition, write_patterns, read_partition, Report,
};
use commchar::measures::compute_measure_table;
use commchar::network::DynamicAttributedNetwork;
use commchar::community::CommunityStructure;
use commchar::selection::eligible_communities;
use commchar::seqdb::{build_database, SequenceDatabase};
use commchar::{CommunityId, Error, Result};

/// Community characterization in dynamic attributed networks.
#[derive(Parser)]
#[command(name = "commchar", version)]
struct Cli {
    /// Validate configuration and inputs without writing anything.
    #[arg(long, global = true)]
    dry_run: bool,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect communities on the aggregated graph and write `node,community`.
    Communities {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the per-slice topological measures.
    Measures {
        #[command(flatten)]
        input: InputArgs,
        /// Reuse a partition instead of running community detection.
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the node sequence database.
    Builddb {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mine closed patterns from a sequence database, one JSON object per line.
    Mine {
        #[arg(long)]
        db: PathBuf,
        #[arg(long, default_value = "0.3")]
        min_sup: String,
        /// Only this community; every community otherwise.
        #[arg(long)]
        community: Option<u32>,
        #[arg(long)]
        maximal: bool,
        #[arg(long, default_value_t = 1)]
        min_community_size: usize,
        #[arg(long)]
        max_length: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        max_patterns: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the whole pipeline and write the characterization report.
    Characterize {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        min_sup: Option<String>,
        #[arg(long)]
        max_uncovered: Option<usize>,
        #[arg(long)]
        min_community_size: Option<usize>,
        #[arg(long, value_enum)]
        distance_anchor: Option<AnchorArg>,
        #[arg(long)]
        maximal: bool,
        #[arg(long)]
        max_length: Option<usize>,
        #[arg(long)]
        max_patterns: Option<usize>,
        /// Report path; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        patterns_out: Option<PathBuf>,
        #[arg(long)]
        partition_out: Option<PathBuf>,
        #[arg(long)]
        measures_out: Option<PathBuf>,
        #[arg(long)]
        db_out: Option<PathBuf>,
    },
    /// Print a text summary of a report.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args)]
struct InputArgs {
    /// TOML pipeline configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge file (`slice,src,dst`).
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Attribute file (`node,slice,descriptor,value`).
    #[arg(long)]
    attrs: Option<PathBuf>,
    /// Number of slices when no config file is given.
    #[arg(long)]
    theta: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnchorArg {
    Union,
    First,
}

impl InputArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let mut config = match (&self.config, self.theta) {
            (Some(path), _) => PipelineConfig::load(path)?,
            (None, Some(theta)) => PipelineConfig::new(theta),
            (None, None) => return Err(Error::Config("give --config or --theta".into())),
        };
        if let (Some(_), Some(theta)) = (&self.config, self.theta) {
            config.theta = theta;
        }
        if let Some(e) = &self.edges {
            config.input.edges = Some(e.clone());
        }
        if let Some(a) = &self.attrs {
            config.input.attributes = Some(a.clone());
        }
        if let Some(s) = self.seed {
            config.pipeline.seed = s;
        }
        config.validate()?;
        Ok(config)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::InvalidSupport(_) => 2,
                _ => 1,
            })
        }
    }
}

/// Writes to `path`, or to stdout when absent.
fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => write_file(p, f),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
            lock.flush().map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            })
        }
    }
}

fn partition_for(
    net: &DynamicAttributedNetwork,
    config: &PipelineConfig,
    partition: Option<&Path>,
) -> Result<CommunityStructure> {
    match partition {
        Some(p) => read_partition(p, net),
        None => detect_communities(net, config.pipeline.seed).map(|(cs, _, _)| cs),
    }
}

fn run(cli: Cli) -> Result<()> {
    let dry = cli.dry_run;
    match cli.command {
        Command::Communities { input, out } => {
            let config = input.config()?;
            let net = load_input(&config)?;
            if dry {
                return Ok(());
            }
            with_thread_pool(config.pipeline.threads, || {
                let (cs, _, _) = detect_communities(&net, config.pipeline.seed)?;
                emit(out.as_deref(), |w| write_partition(w, &net, &cs))
            })
        }
        Command::Measures {
            input,
            partition,
            out,
        } => {
            let config = input.config()?;
            let net = load_input(&config)?;
            if dry {
                return Ok(());
            }
            with_thread_pool(config.pipeline.threads, || {
                let cs = partition_for(&net, &config, partition.as_deref())?;
                let table = compute_measure_table(&net, &cs)?;
                emit(out.as_deref(), |w| write_measures(w, &net, &table))
            })
        }
        Command::Builddb {
            input,
            partition,
            out,
        } => {
            let config = input.config()?;
            let net = load_input(&config)?;
            if dry {
                return Ok(());
            }
            with_thread_pool(config.pipeline.threads, || {
                let cs = partition_for(&net, &config, partition.as_deref())?;
                let table = compute_measure_table(&net, &cs)?;
                let db = build_database(&net, &table, &cs)?;
                emit(out.as_deref(), |w| db.write(w))
            })
        }
        Command::Mine {
            db,
            min_sup,
            community,
            maximal,
            min_community_size,
            max_length,
            max_patterns,
            out,
        } => {
            let options = MiningOptions {
                min_sup: parse_fraction(&min_sup)?,
                mode: if maximal {
                    MiningMode::Maximal
                } else {
                    MiningMode::Closed
                },
                max_length,
                max_patterns,
                min_community_size,
            };
            options.validate()?;
            let db = SequenceDatabase::load(&db)?;
            let targets = match community {
                Some(c) => vec![CommunityId(c)],
                None => eligible_communities(&db, min_community_size),
            };
            if dry {
                return Ok(());
            }
            with_thread_pool(None, || {
                use rayon::prelude::*;
                let mined = targets
                    .par_iter()
                    .map(|&c| mine_closed(&db, c, &options))
                    .collect::<Result<Vec<_>>>()?;
                emit(out.as_deref(), |w| {
                    for patterns in &mined {
                        write_patterns(&mut *w, &db, patterns)?;
                    }
                    Ok(())
                })
            })
        }
        Command::Characterize {
            input,
            min_sup,
            max_uncovered,
            min_community_size,
            distance_anchor,
            maximal,
            max_length,
            max_patterns,
            out,
            patterns_out,
            partition_out,
            measures_out,
            db_out,
        } => {
            let mut config = input.config()?;
            let p = &mut config.pipeline;
            if let Some(s) = min_sup {
                p.min_sup = MinSupport(parse_fraction(&s)?);
            }
            if let Some(m) = max_uncovered {
                p.max_uncovered = m;
            }
            if let Some(m) = min_community_size {
                p.min_community_size = m;
            }
            if let Some(a) = distance_anchor {
                p.distance_anchor = match a {
                    AnchorArg::Union => Anchor::Union,
                    AnchorArg::First => Anchor::First,
                };
            }
            if maximal {
                p.mode = Mode::Maximal;
            }
            if max_length.is_some() {
                p.max_pattern_length = max_length;
            }
            if let Some(m) = max_patterns {
                p.max_patterns = m;
            }
            let o = &mut config.output;
            for (slot, value) in [
                (&mut o.report, out),
                (&mut o.patterns, patterns_out),
                (&mut o.partition, partition_out),
                (&mut o.measures, measures_out),
                (&mut o.database, db_out),
            ] {
                if value.is_some() {
                    *slot = value;
                }
            }
            config.validate()?;
            let net = load_input(&config)?;
            if dry {
                return Ok(());
            }
            with_thread_pool(config.pipeline.threads, || {
                let output = run_on_network(&config, net)?;
                if config.output.report.is_none() {
                    let report = Report::new(&config, &output);
                    emit(None, |w| {
                        w.write_all(report.to_json()?.as_bytes())
                            .map_err(|e| Error::Io {
                                path: "<stdout>".into(),
                                source: e,
                            })
                    })?;
                }
                write_outputs(&config, &output)
            })
        }
        Command::Report { input } => {
            let text = std::fs::read_to_string(&input).map_err(|e| Error::Io {
                path: input.clone(),
                source: e,
            })?;
            let report = Report::from_json(&text)?;
            if dry {
                return Ok(());
            }
            print!("{}", report.render());
            Ok(())
        }
    }
}
