//! Declarative run configuration, loaded from a single TOML file.
//!
//! Relative paths are resolved against the directory holding the config.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::FeatureStreamSpec;
use crate::scoring::FusionConfig;
use crate::svm::SolverConfig;
use crate::synth::SyntheticSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamConfig {
    pub name: String,
    pub dim: usize,
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub metadata: PathBuf,
    /// Optional explicit 1:1 comparison list; defaults to every probe
    /// against every gallery template.
    #[serde(default)]
    pub pairs: Option<PathBuf>,
    pub streams: Vec<StreamConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write fused features, models, scores and curves during `run`.
    #[serde(default = "default_true")]
    pub persist: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub far_targets: Vec<f64>,
    pub fpir_targets: Vec<f64>,
    pub ranks: Vec<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            far_targets: vec![0.001, 0.01, 0.1],
            fpir_targets: vec![0.01, 0.1],
            ranks: vec![1, 5, 10],
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        for &t in self.far_targets.iter().chain(&self.fpir_targets) {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Config(format!("rate target {t} outside (0, 1]")));
            }
        }
        if self.ranks.contains(&0) {
            return Err(Error::Config("ranks start at 1".into()));
        }
        Ok(())
    }

    pub fn max_rank(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub data: DataConfig,
    pub output: OutputConfig,
    #[serde(default)]
    pub svm: SolverConfig,
    #[serde(default)]
    pub fusion: FusionConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    /// Parameters for `synth`; ignored by the other stages.
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
}

impl Config {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.resolve_paths(base_dir);
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Config::from_toml(&text, base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data.metadata);
        if let Some(p) = self.data.pairs.as_mut() {
            fix(p);
        }
        for s in &mut self.data.streams {
            fix(&mut s.path);
        }
        fix(&mut self.output.dir);
    }

    pub fn validate(&self) -> Result<()> {
        self.stream_spec()?;
        self.svm.validate()?;
        self.fusion.validate()?;
        self.eval.validate()?;
        if let Some(s) = &self.synthetic {
            s.validate()?;
        }
        Ok(())
    }

    pub fn stream_spec(&self) -> Result<FeatureStreamSpec> {
        FeatureStreamSpec::new(
            self.data
                .streams
                .iter()
                .map(|s| (s.name.clone(), s.dim))
                .collect(),
        )
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn fused_path(&self) -> PathBuf {
        self.output.dir.join("fused.tdff")
    }

    pub fn split_dir(&self, split_id: u32) -> PathBuf {
        self.output.dir.join(format!("split_{split_id}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[data]
metadata = "meta.csv"
streams = [
    { name = "R", dim = 2048, path = "r.tdff" },
    { name = "G", dim = 1024, path = "/abs/g.tdff" },
]

[output]
dir = "out"
"#;

    #[test]
    fn defaults_and_path_resolution() {
        let c = Config::from_toml(MINIMAL, Path::new("/work")).unwrap();
        assert_eq!(c.data.metadata, PathBuf::from("/work/meta.csv"));
        assert_eq!(c.data.streams[1].path, PathBuf::from("/abs/g.tdff"));
        assert_eq!(c.stream_spec().unwrap().fused_dim(), 3072);
        assert_eq!(c.svm.c, 10.0);
        assert_eq!(c.svm.tolerance, 1e-4);
        assert_eq!(c.svm.max_iterations, 1000);
        assert_eq!(c.fusion.beta, 0.0);
        assert!(c.output.persist);
        assert_eq!(c.eval.max_rank(), 10);
        let again = Config::from_toml(&c.to_toml().unwrap(), Path::new("/elsewhere")).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_values() {
        let bad_c = format!("{MINIMAL}\n[svm]\nc = -1.0\n");
        assert!(Config::from_toml(&bad_c, Path::new(".")).is_err());
        let bad_beta = format!("{MINIMAL}\n[fusion]\nbeta = -0.5\n");
        assert!(Config::from_toml(&bad_beta, Path::new(".")).is_err());
        let unknown = format!("{MINIMAL}\n[svm]\ncost = 1.0\n");
        assert!(Config::from_toml(&unknown, Path::new(".")).is_err());
        let no_streams = "[data]\nmetadata = \"m\"\nstreams = []\n[output]\ndir = \"o\"\n";
        assert!(Config::from_toml(no_streams, Path::new(".")).is_err());
    }
}
