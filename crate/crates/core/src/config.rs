//! TOML pipeline configuration.
//!
//! ```toml
//! theta = 8
//!
//! [input]
//! edges = "edges.csv"
//! attributes = "attributes.csv"
//!
//! [output]
//! report = "report.json"
//! patterns = "patterns.jsonl"
//!
//! [pipeline]
//! seed = 42
//! min_sup = "0.3"
//! min_community_size = 10
//!
//! [descriptor.publications]
//! kind = "attribute"
//! bins = [1, 5]
//!
//! [descriptor.transitivity]
//! kind = "topological"
//! enabled = false
//! ```
//!
//! The six topological measures are enabled with their default bins unless
//! a `[descriptor.<measure>]` table says otherwise. Descriptor ids follow
//! the measure order, then attribute names alphabetically.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::mining::{parse_fraction, Fraction, MiningMode, MiningOptions};
use crate::network::{Bins, DescriptorConfig, DescriptorKind};
use crate::selection::{DistanceAnchor, SelectionOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Attribute,
    Topological,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorSpec {
    pub kind: Kind,
    /// Thresholds; measures fall back to their defaults when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub enabled: bool,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attributes: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub database: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patterns: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    #[default]
    Union,
    First,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Closed,
    Maximal,
}

/// Minimum support written as text (`"0.3"`, `"3/10"`) or as a TOML float.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SupportRepr", into = "String")]
pub struct MinSupport(pub Fraction);

#[derive(Deserialize)]
#[serde(untagged)]
enum SupportRepr {
    Text(String),
    Number(f64),
}

impl TryFrom<SupportRepr> for MinSupport {
    type Error = Error;

    fn try_from(r: SupportRepr) -> Result<Self> {
        let text = match r {
            SupportRepr::Text(t) => t,
            SupportRepr::Number(x) => x.to_string(),
        };
        parse_fraction(&text).map(MinSupport)
    }
}

impl From<MinSupport> for String {
    fn from(m: MinSupport) -> String {
        m.0.to_string()
    }
}

impl Default for MinSupport {
    fn default() -> Self {
        MinSupport(Fraction::new(3, 10))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineSettings {
    pub seed: u64,
    pub min_sup: MinSupport,
    pub min_community_size: usize,
    pub max_uncovered: usize,
    pub distance_anchor: Anchor,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_pattern_length: Option<usize>,
    pub max_patterns: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings {
            seed: 0,
            min_sup: MinSupport::default(),
            min_community_size: 10,
            max_uncovered: 5,
            distance_anchor: Anchor::Union,
            mode: Mode::Closed,
            max_pattern_length: None,
            max_patterns: 100_000,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub theta: usize,
    #[serde(default)]
    pub input: InputPaths,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub pipeline: PipelineSettings,
    #[serde(default)]
    pub descriptor: BTreeMap<String, DescriptorSpec>,
}

impl PipelineConfig {
    /// Defaults for `theta` slices: all measures, no attributes.
    pub fn new(theta: usize) -> Self {
        PipelineConfig {
            theta,
            input: InputPaths::default(),
            output: OutputPaths::default(),
            pipeline: PipelineSettings::default(),
            descriptor: BTreeMap::new(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml_str(&text)?;
        if let Some(base) = path.parent() {
            config.rebase(base);
        }
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        fix(&mut self.input.edges);
        fix(&mut self.input.attributes);
        fix(&mut self.output.partition);
        fix(&mut self.output.measures);
        fix(&mut self.output.database);
        fix(&mut self.output.patterns);
        fix(&mut self.output.report);
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.pipeline;
        self.mining_options().validate()?;
        if p.min_community_size == 0 {
            return Err(Error::Config("min_community_size must be at least 1".into()));
        }
        if p.max_patterns == 0 {
            return Err(Error::Config("max_patterns must be at least 1".into()));
        }
        if p.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        self.descriptor_config().map(|_| ())
    }

    pub fn descriptor_config(&self) -> Result<DescriptorConfig> {
        let mut descriptors = Vec::new();
        for m in Measure::ALL {
            let spec = self.descriptor.get(m.name());
            if let Some(s) = spec {
                if s.kind != Kind::Topological {
                    return Err(Error::Config(format!(
                        "descriptor {:?} is a topological measure",
                        m.name()
                    )));
                }
                if !s.enabled {
                    continue;
                }
            }
            let thresholds = spec
                .and_then(|s| s.bins.clone())
                .unwrap_or_else(|| m.default_thresholds().to_vec());
            let labels = spec.and_then(|s| s.labels.clone());
            descriptors.push((
                m.name().to_string(),
                DescriptorKind::Topological(m),
                Bins::new(thresholds, labels)?,
            ));
        }
        for (name, s) in &self.descriptor {
            match s.kind {
                Kind::Topological => {
                    name.parse::<Measure>()?;
                }
                Kind::Attribute => {
                    if !s.enabled {
                        continue;
                    }
                    let thresholds = s.bins.clone().ok_or_else(|| {
                        Error::Config(format!("attribute {name:?} needs bins"))
                    })?;
                    descriptors.push((
                        name.clone(),
                        DescriptorKind::Attribute,
                        Bins::new(thresholds, s.labels.clone())?,
                    ));
                }
            }
        }
        DescriptorConfig::new(self.theta, descriptors)
    }

    pub fn mining_options(&self) -> MiningOptions {
        let p = &self.pipeline;
        MiningOptions {
            min_sup: p.min_sup.0,
            mode: match p.mode {
                Mode::Closed => MiningMode::Closed,
                Mode::Maximal => MiningMode::Maximal,
            },
            max_length: p.max_pattern_length,
            max_patterns: p.max_patterns,
            min_community_size: p.min_community_size,
        }
    }

    pub fn selection_options(&self) -> SelectionOptions {
        SelectionOptions {
            max_uncovered: self.pipeline.max_uncovered,
            anchor: match self.pipeline.distance_anchor {
                Anchor::Union => DistanceAnchor::Union,
                Anchor::First => DistanceAnchor::First,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
theta = 4

[input]
edges = "e.csv"

[pipeline]
seed = 7
min_sup = 0.3
max_pattern_length = 3

[descriptor.pubs]
kind = "attribute"
bins = [1, 5]
labels = ["one", "few", "many"]

[descriptor.transitivity]
kind = "topological"
enabled = false

[descriptor.degree]
kind = "topological"
bins = [2, 8]
"#;

    #[test]
    fn parses_and_orders_descriptors() {
        let c = PipelineConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(c.pipeline.min_sup.0, Fraction::new(3, 10));
        let schema = c.descriptor_config().unwrap();
        let names: Vec<&str> = schema.descriptors().iter().map(|d| d.name.as_str()).collect();
        assert_eq!(
            names,
            ["degree", "internal_degree", "z_score", "participation", "embeddedness", "pubs"]
        );
        assert_eq!(schema.by_name("degree").unwrap().bins.thresholds(), &[2.0, 8.0]);
        assert_eq!(schema.by_name("pubs").unwrap().bins.label(2), "many");
        assert_eq!(c.mining_options().max_length, Some(3));
    }

    #[test]
    fn round_trips() {
        let c = PipelineConfig::from_toml_str(SAMPLE).unwrap();
        let text = c.to_toml_string().unwrap();
        assert_eq!(PipelineConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            "theta = 0",
            "theta = 2\n[pipeline]\nmin_sup = 1.01",
            "theta = 2\n[pipeline]\nmin_sup = \"0\"",
            "theta = 2\n[pipeline]\nmin_community_size = 0",
            "theta = 2\n[pipeline]\nsurprise = 1",
            "theta = 2\n[descriptor.foo]\nkind = \"topological\"",
            "theta = 2\n[descriptor.degree]\nkind = \"attribute\"\nbins = [1]",
            "theta = 2\n[descriptor.x]\nkind = \"attribute\"",
            "theta = 2\n[descriptor.x]\nkind = \"attribute\"\nbins = [2, 1]",
        ] {
            assert!(PipelineConfig::from_toml_str(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, SAMPLE).unwrap();
        let c = PipelineConfig::load(&path).unwrap();
        assert_eq!(c.input.edges.unwrap(), dir.path().join("e.csv"));
    }
}
