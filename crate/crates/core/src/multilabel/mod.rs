//! Multi-label wrappers around C4.5 and the two-stage cascade.
//!
//! * [`BrModel`]: binary relevance, one tree per code.
//! * [`LpModel`]: label powerset, one tree whose classes are the observed
//!   code combinations.
//! * [`ChiDtModel`]: stage 1 is a BR model; when its prediction is a known
//!   error (empty, exclusion-violating or unregistered) the stage-2 prediction
//!   is returned instead, without further correction.

mod br;
mod cascade;
mod lp;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureVector, LabelSet};
use crate::Result;

pub use br::{train_br, BrModel};
pub use cascade::{
    train_chidt, trigger_rate, CascadeConfig, CascadeOutcome, CascadeTrace, ChiDtModel, Stage2, Strategy,
};
pub use lp::{train_label_powerset, LpModel};

/// Principal-code class used for empty or unattributable predictions.
pub const NO_CODE: &str = "(none)";

/// Facts about the training records that evaluation needs later: code
/// priors for the relative error metrics and the usual principal code of each
/// training combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub training_ids: BTreeSet<String>,
    pub alphabet: Vec<String>,
    /// Fraction of training records carrying each alphabet code.
    pub label_prior: Vec<f64>,
    /// Alphabet followed by [`NO_CODE`].
    pub principal_classes: Vec<String>,
    /// Frequency of each principal class among training records.
    pub principal_prior: Vec<f64>,
    /// Most frequent principal code of each training combination.
    pub principal_of: Vec<(LabelSet, String)>,
}

impl TrainingSummary {
    pub fn from_dataset(ds: &Dataset) -> Self {
        let n = ds.len().max(1) as f64;
        let label_prior = ds
            .alphabet()
            .iter()
            .map(|c| ds.records().iter().filter(|r| r.labels.contains(c)).count() as f64 / n)
            .collect();
        let mut principal_classes = ds.alphabet().to_vec();
        principal_classes.push(NO_CODE.to_owned());
        let mut principal_counts = vec![0.0; principal_classes.len()];
        let mut per_combo: BTreeMap<&LabelSet, BTreeMap<&str, usize>> = BTreeMap::new();
        for r in ds.records() {
            let p = r.principal_code().unwrap_or(NO_CODE);
            let idx = principal_classes
                .iter()
                .position(|c| c == p)
                .expect("principal is in the alphabet");
            principal_counts[idx] += 1.0;
            if let Some(code) = r.principal_code() {
                *per_combo.entry(&r.labels).or_default().entry(code).or_default() += 1;
            }
        }
        let principal_prior = principal_counts.iter().map(|c| c / n).collect();
        let principal_of = per_combo
            .into_iter()
            .map(|(ls, counts)| {
                // BTreeMap order makes the first maximum the lowest code
                let best = counts
                    .iter()
                    .fold(None::<(&str, usize)>, |acc, (c, n)| match acc {
                        Some((_, m)) if m >= *n => acc,
                        _ => Some((c, *n)),
                    })
                    .map(|(c, _)| c.to_owned())
                    .expect("non-empty counts");
                (ls.clone(), best)
            })
            .collect();
        TrainingSummary {
            training_ids: ds.ids(),
            alphabet: ds.alphabet().to_vec(),
            label_prior,
            principal_classes,
            principal_prior,
            principal_of,
        }
    }

    /// Principal code attributed to a predicted combination: the training
    /// mapping when the combination was seen, the code itself for a single
    /// code, and [`NO_CODE`] otherwise.
    pub fn principal_for(&self, ls: &LabelSet) -> &str {
        if let Ok(i) = self.principal_of.binary_search_by(|(k, _)| k.cmp(ls)) {
            return &self.principal_of[i].1;
        }
        match (ls.len(), ls.first()) {
            (1, Some(code)) => self
                .alphabet
                .iter()
                .find(|c| *c == code)
                .map_or(NO_CODE, String::as_str),
            _ => NO_CODE,
        }
    }
}

/// A multi-label prediction with per-code probabilities over the alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPrediction {
    pub labels: LabelSet,
    pub probabilities: Vec<f64>,
    /// Whether a cascade fell back to stage 2; `None` for single-stage models.
    pub triggered: Option<bool>,
}

/// Anything that assigns code sets to feature vectors and can be evaluated.
pub trait CodePredictor {
    /// Short model description for report headers.
    fn name(&self) -> String;

    fn summary(&self) -> &TrainingSummary;

    fn predict_scored(&self, x: &FeatureVector) -> Result<ScoredPrediction>;

    fn alphabet(&self) -> &[String] {
        &self.summary().alphabet
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Attribute, CodeRole, Record, Value};

    #[test]
    fn summary_priors_and_principals() {
        let fv = || FeatureVector::new(vec![Value::Numeric(0.0)]);
        let records = vec![
            Record::new("a", fv(), LabelSet::from_iter(["x", "y"])).with_role("y", CodeRole::Principal),
            Record::new("b", fv(), LabelSet::from_iter(["x", "y"])).with_role("y", CodeRole::Principal),
            Record::new("c", fv(), LabelSet::from_iter(["x"])),
            Record::new("d", fv(), LabelSet::new()),
        ];
        let ds = Dataset::new(vec![Attribute::numeric("v")], vec!["x".into(), "y".into()], records).unwrap();
        let s = TrainingSummary::from_dataset(&ds);
        assert_eq!(s.label_prior, vec![0.75, 0.5]);
        assert_eq!(s.principal_classes, vec!["x", "y", NO_CODE]);
        assert_eq!(s.principal_prior, vec![0.25, 0.5, 0.25]);
        assert_eq!(s.principal_for(&LabelSet::from_iter(["x", "y"])), "y");
        assert_eq!(s.principal_for(&LabelSet::from_iter(["y"])), "y");
        assert_eq!(s.principal_for(&LabelSet::new()), NO_CODE);
        assert_eq!(s.principal_for(&LabelSet::from_iter(["q"])), NO_CODE);
    }
}
