//! Writes the planted synthetic network as CSV files plus a matching config.
//!
//! ```text
//! cargo run --example planted_fixture -- [out-dir] [seed]
//! commchar characterize --config <out-dir>/config.toml
//! ```

use std::fs::File;
use std::path::PathBuf;

use commchar::config::{DescriptorSpec, Kind, PipelineConfig};
use commchar::synthetic::{planted_network, PlantedParams, NOISE_ATTRIBUTE, PLANTED_ATTRIBUTE};

fn main() -> commchar::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "fixtures/planted".into()));
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(1);
    std::fs::create_dir_all(&dir).map_err(|e| commchar::Error::Io { path: dir.clone(), source: e })?;

    let params = PlantedParams::default();
    let net = planted_network(&params, seed)?;
    let create = |name: &str| {
        let path = dir.join(name);
        File::create(&path).map_err(|e| commchar::Error::Io { path, source: e })
    };
    net.write_edges(create("edges.csv")?)?;
    net.write_attributes(create("attributes.csv")?)?;

    let mut config = PipelineConfig::new(params.slices);
    config.input.edges = Some("edges.csv".into());
    config.input.attributes = Some("attributes.csv".into());
    config.output.report = Some("report.json".into());
    config.output.patterns = Some("patterns.jsonl".into());
    config.output.partition = Some("partition.csv".into());
    config.pipeline.seed = seed;
    for name in [NOISE_ATTRIBUTE, PLANTED_ATTRIBUTE] {
        config.descriptor.insert(
            name.to_string(),
            DescriptorSpec {
                kind: Kind::Attribute,
                bins: Some(vec![]),
                labels: Some(vec!["yes".into()]),
                enabled: true,
            },
        );
    }
    let toml = config.to_toml_string()?;
    std::fs::write(dir.join("config.toml"), toml)
        .map_err(|e| commchar::Error::Io { path: dir.join("config.toml"), source: e })?;
    println!("{}: {net}", dir.display());
    Ok(())
}
