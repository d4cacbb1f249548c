use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::pipelines::{Method, MethodConfig, SplitRatio};
use crate::synth::{BlockModelConfig, DegreeCorrection};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Cluster,
    Classify,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Cluster => "cluster",
            Task::Classify => "classify",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Grid of inter-community probabilities, written as a list, as
/// comma-separated text, or as `"start:stop:step"` with both ends included.
#[derive(Clone, Debug, PartialEq)]
pub struct RGrid(pub Vec<f64>);

impl RGrid {
    pub fn parse(s: &str) -> Result<Self> {
        if s.contains(',') {
            return s
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad number {p:?} in r grid {s:?}")))
                })
                .collect::<Result<Vec<_>>>()
                .map(Self);
        }
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |p: &str| -> Result<f64> {
            p.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number {p:?} in r grid {s:?}")))
        };
        match parts.as_slice() {
            [single] => Ok(Self(vec![num(single)?])),
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if step.is_nan() || step <= 0.0 || stop < start {
                    return Err(Error::Config(format!("r grid {s:?} must have step > 0 and stop >= start")));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                Ok(Self(
                    (0..count)
                        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                        .collect(),
                ))
            }
            _ => Err(Error::Config(format!("r grid {s:?} is not start:stop:step"))),
        }
    }
}

impl Serialize for RGrid {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RGrid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<f64>),
            One(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(v) => Ok(Self(v)),
            Raw::One(x) => Ok(Self(vec![x])),
            Raw::Text(s) => Self::parse(&s).map_err(de::Error::custom),
        }
    }
}

/// A planted-partition generator swept over `r_grid`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n: usize,
    pub intra: f64,
    pub r_grid: RGrid,
    /// Relative community sizes, e.g. `[1, 2, 3, 4]`.
    pub sizes: Vec<f64>,
    /// `Beta(a, b)` for the degree parameters; DC-SBM only.
    #[serde(default)]
    pub theta: Option<(f64, f64)>,
}

impl GeneratorSpec {
    pub fn block_model(&self, r: f64, degree_corrected: bool) -> BlockModelConfig {
        let dc = if degree_corrected {
            let (a, b) = self.theta.unwrap_or((1.0, 4.0));
            DegreeCorrection::Beta { a, b }
        } else {
            DegreeCorrection::None
        };
        BlockModelConfig::planted(self.n, self.intra, r, self.sizes.clone(), dc)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Files {
        edges: PathBuf,
        labels: PathBuf,
        #[serde(default)]
        name: Option<String>,
    },
    /// A dataset directory under the fixtures root.
    Fixture { name: String },
    Sbm(GeneratorSpec),
    Dcsbm(GeneratorSpec),
}

impl Source {
    pub fn dataset_name(&self) -> String {
        match self {
            Source::Files { edges, name, .. } => name.clone().unwrap_or_else(|| {
                edges
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "graph".into())
            }),
            Source::Fixture { name } => name.clone(),
            Source::Sbm(_) => "sbm".into(),
            Source::Dcsbm(_) => "dcsbm".into(),
        }
    }

    pub fn generator(&self) -> Option<(&GeneratorSpec, bool)> {
        match self {
            Source::Sbm(g) => Some((g, false)),
            Source::Dcsbm(g) => Some((g, true)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_trials() -> usize {
    1
}

fn default_ratios() -> Vec<f64> {
    SplitRatio::STANDARD.iter().map(|r| r.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub source: Source,
    /// Defaults to every method valid for the task.
    #[serde(default)]
    pub methods: Vec<Method>,
    /// Train/val pool sizes in percent; classification only.
    #[serde(default = "default_ratios")]
    pub ratios: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Worker pool size; `GNNSEED_THREADS` or the CPU count when unset.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub train: MethodConfig,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    pub fn new(task: Task, source: Source) -> Self {
        Self {
            task,
            source,
            methods: Vec::new(),
            ratios: default_ratios(),
            trials: 1,
            base_seed: 0,
            threads: None,
            train: MethodConfig::default(),
            output: None,
        }
    }

    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg = if is_json {
            Self::from_json_str(&text)?
        } else {
            Self::from_toml_str(&text)?
        };
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolved_methods(&self) -> Vec<Method> {
        if !self.methods.is_empty() {
            return self.methods.clone();
        }
        match self.task {
            Task::Cluster => Method::CLUSTERING.to_vec(),
            Task::Classify => Method::CLASSIFICATION.to_vec(),
        }
    }

    /// The split ratios a sweep iterates over; a single dummy entry when clustering.
    pub fn resolved_ratios(&self) -> Vec<Option<SplitRatio>> {
        match self.task {
            Task::Cluster => vec![None],
            Task::Classify => self.ratios.iter().map(|&r| Some(SplitRatio(r))).collect(),
        }
    }

    pub fn r_values(&self) -> Vec<Option<f64>> {
        match self.source.generator() {
            Some((g, _)) => g.r_grid.0.iter().map(|&r| Some(r)).collect(),
            None => vec![None],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        let mut seen = Vec::new();
        for m in self.resolved_methods() {
            if m == Method::GgC && self.task == Task::Cluster {
                return Err(Error::Config("gg-c is only valid for the classify task".into()));
            }
            if seen.contains(&m) {
                return Err(Error::Config(format!("method {m} listed twice")));
            }
            seen.push(m);
        }
        if self.task == Task::Classify {
            if self.ratios.is_empty() {
                return Err(Error::Config("classify needs at least one ratio".into()));
            }
            if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0 && **r < 100.0)) {
                return Err(Error::Config(format!("ratio {r} must lie strictly between 0 and 100")));
            }
        }
        if let Some((g, dc)) = self.source.generator() {
            if g.r_grid.0.is_empty() {
                return Err(Error::Config("r_grid is empty".into()));
            }
            if let Some(r) = g.r_grid.0.iter().find(|r| !(**r >= 0.0 && **r <= g.intra)) {
                return Err(Error::Config(format!("r = {r} outside [0, intra = {}]", g.intra)));
            }
            if g.theta.is_some() && !dc {
                return Err(Error::Config("theta is only meaningful for the dcsbm source".into()));
            }
            for &r in &g.r_grid.0 {
                g.block_model(r, dc).validate()?;
            }
        }
        self.train.clustering.validate()?;
        self.train.classification.validate()?;
        if self.train.gee_max_iter == 0 {
            return Err(Error::Config("gee_max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_grid_parses_inclusive_range() {
        let g = RGrid::parse("0:0.3:0.02").unwrap();
        assert_eq!(g.0.len(), 16);
        assert_eq!(g.0[0], 0.0);
        assert_eq!(g.0[5], 0.1);
        assert_eq!(g.0[15], 0.3);
        assert_eq!(RGrid::parse("0.1").unwrap().0, vec![0.1]);
        assert_eq!(RGrid::parse("0.06, 0.1").unwrap().0, vec![0.06, 0.1]);
        assert!(RGrid::parse("0:1").is_err());
        assert!(RGrid::parse("0.3:0:0.1").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
task = "classify"
methods = ["gee", "gg-c"]
ratios = [5, 50]
trials = 3
base_seed = 7

[source]
kind = "dcsbm"
n = 200
intra = 0.3
r_grid = "0:0.1:0.05"
sizes = [1, 2, 3, 4]
theta = [1.0, 4.0]

[train.classification]
max_epochs = 50
"#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.methods, vec![Method::Gee, Method::GgC]);
        assert_eq!(cfg.r_values(), vec![Some(0.0), Some(0.05), Some(0.1)]);
        assert_eq!(cfg.train.classification.max_epochs, 50);
        assert_eq!(cfg.train.clustering, MethodConfig::default().clustering);
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn json_and_defaults() {
        let cfg = ExperimentConfig::from_json_str(
            r#"{"task": "cluster", "source": {"kind": "fixture", "name": "karate"}}"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.resolved_methods(), Method::CLUSTERING.to_vec());
        assert_eq!(cfg.resolved_ratios(), vec![None]);
        assert_eq!(cfg.trials, 1);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = ExperimentConfig::new(Task::Cluster, Source::Fixture { name: "karate".into() });
        cfg.methods = vec![Method::GgC];
        assert!(cfg.validate().is_err());
        cfg.methods = vec![Method::Gee];
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.validate().unwrap();

        let gen = GeneratorSpec {
            n: 100,
            intra: 0.3,
            r_grid: RGrid(vec![0.5]),
            sizes: vec![1.0, 1.0],
            theta: None,
        };
        let cfg = ExperimentConfig::new(Task::Cluster, Source::Sbm(gen));
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::from_toml_str("task = \"cluster\"\nbogus = 1\n[source]\nkind = \"fixture\"\nname = \"k\"").is_err());
    }
}
