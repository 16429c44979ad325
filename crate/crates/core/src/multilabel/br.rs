use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CodePredictor, ScoredPrediction, TrainingSummary};
use crate::c45::{C45Params, DecisionTree, TrainingSet};
use crate::dataset::{Attribute, Dataset, FeatureVector, LabelSet};
use crate::{Error, Result};

/// Class names of every per-code tree: index 1 means "code assigned".
pub(crate) const BINARY_CLASSES: [&str; 2] = ["0", "1"];

/// Binary relevance: one C4.5 tree per code of the alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrModel {
    pub codes: Vec<String>,
    pub trees: Vec<DecisionTree>,
    /// A code is assigned when its tree gives the positive class at least this probability.
    pub threshold: f64,
    pub params: C45Params,
    /// Codes whose training target had a single class, so their tree is one leaf.
    pub constant_labels: Vec<String>,
    pub summary: TrainingSummary,
}

/// Trains one tree per alphabet code on "does the record carry this code".
///
/// Codes with no positive (or no negative) training records get a constant
/// single-leaf tree and are listed in `constant_labels`.
pub fn train_br(ds: &Dataset, params: &C45Params) -> Result<BrModel> {
    if ds.is_empty() {
        return Err(Error::Empty("training dataset"));
    }
    if ds.alphabet().is_empty() {
        return Err(Error::Empty("label alphabet"));
    }
    params.validate()?;
    let rows: Vec<&FeatureVector> = ds.records().iter().map(|r| &r.features).collect();
    let classes: Vec<String> = BINARY_CLASSES.iter().map(|c| c.to_string()).collect();
    // collect() keeps alphabet order whatever the scheduling
    let trees = ds
        .alphabet()
        .par_iter()
        .map(|code| {
            let targets = ds
                .records()
                .iter()
                .map(|r| usize::from(r.labels.contains(code)))
                .collect();
            let set = TrainingSet::new(ds.attributes(), classes.clone(), rows.clone(), targets)?;
            DecisionTree::train(&set, params)
        })
        .collect::<Result<Vec<_>>>()?;
    let constant_labels = ds
        .alphabet()
        .iter()
        .filter(|code| {
            let positives = ds.records().iter().filter(|r| r.labels.contains(code)).count();
            positives == 0 || positives == ds.len()
        })
        .cloned()
        .collect();
    Ok(BrModel {
        codes: ds.alphabet().to_vec(),
        trees,
        threshold: 0.5,
        params: params.clone(),
        constant_labels,
        summary: TrainingSummary::from_dataset(ds),
    })
}

impl BrModel {
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.trees[0].attributes
    }

    /// Positive-class probability of each code, in alphabet order.
    pub fn probabilities(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        x.check(self.attributes())?;
        self.trees
            .iter()
            .map(|t| Ok(t.root.route(x)?.distribution().normalized()?.weights()[1]))
            .collect()
    }

    /// Codes whose probability reaches the threshold. May be empty.
    pub fn predict(&self, x: &FeatureVector) -> Result<LabelSet> {
        Ok(self.labels_from(&self.probabilities(x)?))
    }

    pub(crate) fn labels_from(&self, probabilities: &[f64]) -> LabelSet {
        self.codes
            .iter()
            .zip(probabilities)
            .filter(|(_, p)| **p >= self.threshold)
            .map(|(c, _)| c.clone())
            .collect()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.codes.is_empty() || self.codes.len() != self.trees.len() {
            return Err(Error::SchemaMismatch(
                "binary relevance model needs one tree per code".into(),
            ));
        }
        for t in &self.trees {
            if t.classes != BINARY_CLASSES {
                return Err(Error::SchemaMismatch("per-code trees must have classes [0, 1]".into()));
            }
            if t.attributes != self.trees[0].attributes {
                return Err(Error::SchemaMismatch("per-code trees disagree on the schema".into()));
            }
            t.validate()?;
        }
        Ok(())
    }
}

impl CodePredictor for BrModel {
    fn name(&self) -> String {
        "br".into()
    }

    fn summary(&self) -> &TrainingSummary {
        &self.summary
    }

    fn predict_scored(&self, x: &FeatureVector) -> Result<ScoredPrediction> {
        let probabilities = self.probabilities(x)?;
        Ok(ScoredPrediction {
            labels: self.labels_from(&probabilities),
            probabilities,
            triggered: None,
        })
    }
}
