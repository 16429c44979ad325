use std::path::{Path, PathBuf};

use chidt::eval::EvalMode;
use chidt::multilabel::CascadeConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// One JSON document describing a run. Relative paths are resolved against
/// the directory holding the config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub paths: Paths,
    pub split: SplitSection,
    pub cascade: CascadeConfig,
    pub evaluation: EvaluationSection,
    /// Strategy named on the command line; a stored model must match it.
    #[serde(skip)]
    pub strategy_flag: Option<chidt::multilabel::Strategy>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Generator profiles (`gen`).
    pub generator: Option<PathBuf>,
    /// Corpus CSV; defaults to `<out>/corpus.csv`.
    pub dataset: Option<PathBuf>,
    pub hierarchy: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub exclusions: Option<PathBuf>,
    /// Extra valid combinations merged into the observed registry.
    pub registry: Option<PathBuf>,
    /// Model file; defaults to `<out>/model.json`.
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    /// Records drawn by the cover-all-labels split; all records when absent.
    pub train_size: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolName {
    Resubstitution,
    Holdout,
    KFold,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub mode: EvalMode,
    pub protocol: ProtocolName,
    pub k: usize,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            mode: EvalMode::Principal,
            protocol: ProtocolName::Resubstitution,
            k: 10,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = crate::read(path)?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.out_dir);
        let p = &mut self.paths;
        for slot in [
            &mut p.generator,
            &mut p.dataset,
            &mut p.hierarchy,
            &mut p.lexicon,
            &mut p.exclusions,
            &mut p.registry,
            &mut p.model,
        ] {
            fix(slot);
        }
    }

    pub fn require_seed(&self, step: &str) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::Invalid(format!("{step} is seeded: set \"seed\" in the config or pass --seed")))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.paths
            .dataset
            .clone()
            .unwrap_or_else(|| self.out_dir().join("corpus.csv"))
    }

    pub fn model_path(&self) -> PathBuf {
        self.paths
            .model
            .clone()
            .unwrap_or_else(|| self.out_dir().join("model.json"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"seed": 1, "sede": 2}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"paths": {"data": "x"}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"cascade": {"threshold": 0.5, "extra": 1}}"#).is_err());
    }

    #[test]
    fn relative_paths_follow_the_config() {
        let mut cfg: RunConfig =
            serde_json::from_str(r#"{"out_dir": "o", "paths": {"dataset": "d.csv", "model": "/abs/m.json"}}"#).unwrap();
        cfg.resolve(Path::new("/cfg"));
        assert_eq!(cfg.dataset_path(), PathBuf::from("/cfg/d.csv"));
        assert_eq!(cfg.model_path(), PathBuf::from("/abs/m.json"));
        assert_eq!(cfg.out_dir(), PathBuf::from("/cfg/o"));
    }

    #[test]
    fn defaults() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.evaluation.k, 10);
        assert!(cfg.require_seed("gen").is_err());
        assert_eq!(cfg.dataset_path(), PathBuf::from("out/corpus.csv"));
    }
}
