//! Confusion-matrix metrics, the probabilistic error measures, multi-label
//! metrics and the evaluation protocols, plus text and JSON reports.
//!
//! Two modes decide what counts as one classification:
//!
//! * [`EvalMode::Principal`] reduces every record to one code (its PDx code,
//!   else its lowest code) and every prediction to the principal code the
//!   training data associates with the predicted combination.
//! * [`EvalMode::Multilabel`] compares whole code sets; "correctly
//!   classified" means an exact match and the probabilistic errors are
//!   averaged over one binary problem per code.

mod metrics;
mod protocol;
mod render;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use metrics::{
    accuracy, hamming_loss, kappa, label_stats, probabilistic_errors, ConfusionMatrix, LabelStats, ProbabilisticErrors,
};
pub use protocol::{evaluate_holdout, evaluate_kfold, evaluate_resubstitution, stratified_folds};
pub use render::{format_metrics, format_percentages, format_report};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    #[default]
    Principal,
    Multilabel,
}

impl EvalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalMode::Principal => "principal",
            EvalMode::Multilabel => "multilabel",
        }
    }
}

impl std::str::FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "principal" => Ok(EvalMode::Principal),
            "multilabel" => Ok(EvalMode::Multilabel),
            other => Err(Error::InvalidArgument(format!("unknown evaluation mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Protocol {
    /// Every record, training records included.
    Resubstitution,
    /// Test records only.
    Holdout,
    KFold {
        k: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub model: String,
    pub mode: EvalMode,
    pub protocol: Protocol,
    /// True when training records are part of the evaluation set.
    pub contaminated: bool,
}

/// The single-prediction summary rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total: u64,
    pub correct: u64,
    pub accuracy_pct: f64,
    pub kappa: f64,
    pub mae: f64,
    pub rmse: f64,
    /// `None` when undefined (the prior predictor is never wrong).
    pub rae_pct: Option<f64>,
    pub rrse_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiLabelReport {
    pub subset_accuracy_pct: f64,
    pub hamming_loss: f64,
    pub per_label: Vec<LabelStats>,
    /// Share of predictions answered by stage 2; `None` for single-stage models.
    pub trigger_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub header: ReportHeader,
    pub metrics: MetricsReport,
    pub multilabel: MultiLabelReport,
    pub confusion: ConfusionMatrix,
    /// Per-fold metrics for k-fold runs, in fold order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub folds: Vec<MetricsReport>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
