use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::Result;
use commitvec::ast::ExtractionConfig;
use commitvec::mining::{default_security_labels, TrackerConfig};
use commitvec::models::{PathDims, SvmConfig, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::run::DataContext;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub tracker: TrackerConfig,
    pub mine: MineConfig,
    pub extract: ExtractionConfig,
    pub train: TrainConfig,
    pub path_attention: PathDims,
    pub svm: SvmConfig,
    pub evaluate: EvaluateConfig,
    pub variability: VariabilityConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepoSpec {
    pub id: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    #[default]
    Priority,
    Security,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MineConfig {
    pub repos: Vec<RepoSpec>,
    pub project_keys: Vec<String>,
    pub task: Task,
    pub security_labels: BTreeSet<String>,
    /// Regexes over commit messages; matching commits are never drawn as
    /// negatives.
    pub exclusion_patterns: Vec<String>,
    pub cache_dir: PathBuf,
    /// Drop commits referencing an issue that other projects also reference.
    pub dedupe_issues: bool,
}

impl Default for MineConfig {
    fn default() -> Self {
        Self {
            repos: Vec::new(),
            project_keys: Vec::new(),
            task: Task::Priority,
            security_labels: default_security_labels(),
            exclusion_patterns: Vec::new(),
            cache_dir: PathBuf::from("issue-cache"),
            dedupe_issues: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub folds: usize,
    pub threshold: f64,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self { folds: 5, threshold: 0.5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariabilityConfig {
    pub runs: usize,
    /// Seed of the fixed train/test split; the global seed when unset.
    pub split_seed: Option<u64>,
    pub threshold: f64,
}

impl Default for VariabilityConfig {
    fn default() -> Self {
        Self { runs: 100, split_seed: None, threshold: 0.5 }
    }
}

impl Config {
    /// Reads a TOML config; relative repository and cache paths are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).data(format!("reading config {}", path.display()))?;
        let mut cfg: Config = toml::from_str(&text).data(format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for r in &mut cfg.mine.repos {
            if r.path.is_relative() {
                r.path = base.join(&r.path);
            }
        }
        if cfg.mine.cache_dir.is_relative() {
            cfg.mine.cache_dir = base.join(&cfg.mine.cache_dir);
        }
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.train.seed = seed;
        self.extract.seed = seed;
        self
    }

    pub fn repo(&self, id: &str) -> Option<&RepoSpec> {
        self.mine.repos.iter().find(|r| r.id == id)
    }
}
