use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::c45::{C45Params, DecisionTree, TrainingSet};
use crate::dataset::{Dataset, FeatureVector, LabelSet};
use crate::{Error, Result};

/// Label powerset: one multi-class tree whose classes are the distinct
/// training combinations, so every prediction is an observed combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpModel {
    pub alphabet: Vec<String>,
    /// Combination behind each tree class, in class order.
    pub combinations: Vec<LabelSet>,
    pub tree: DecisionTree,
    pub params: C45Params,
    pub training_ids: BTreeSet<String>,
}

/// Trains a label-powerset model. Every record must carry at least one code.
pub fn train_label_powerset(ds: &Dataset, params: &C45Params) -> Result<LpModel> {
    if ds.is_empty() {
        return Err(Error::Empty("training dataset"));
    }
    if let Some(r) = ds.records().iter().find(|r| r.labels.is_empty()) {
        return Err(Error::InvalidArgument(format!(
            "record `{}` has no codes; label powerset needs a combination per record",
            r.id
        )));
    }
    let combinations: Vec<LabelSet> = ds
        .records()
        .iter()
        .map(|r| r.labels.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let targets = ds
        .records()
        .iter()
        .map(|r| {
            combinations
                .binary_search(&r.labels)
                .expect("combination collected above")
        })
        .collect();
    let rows = ds.records().iter().map(|r| &r.features).collect();
    let classes = combinations.iter().map(LabelSet::canonical).collect();
    let set = TrainingSet::new(ds.attributes(), classes, rows, targets)?;
    let tree = DecisionTree::train(&set, params)?;
    Ok(LpModel {
        alphabet: ds.alphabet().to_vec(),
        combinations,
        tree,
        params: params.clone(),
        training_ids: ds.ids(),
    })
}

impl LpModel {
    pub fn predict(&self, x: &FeatureVector) -> Result<LabelSet> {
        Ok(self.combinations[self.tree.predict(x)?].clone())
    }

    /// Predicted combination plus, for each alphabet code, the total
    /// probability of the combinations containing it.
    pub fn predict_scored(&self, x: &FeatureVector) -> Result<(LabelSet, Vec<f64>)> {
        let dist = self.tree.predict_distribution(x)?;
        let labels = self.combinations[dist.majority()].clone();
        let marginals = self
            .alphabet
            .iter()
            .map(|code| {
                self.combinations
                    .iter()
                    .zip(dist.weights())
                    .filter(|(c, _)| c.contains(code))
                    .map(|(_, p)| p)
                    .sum()
            })
            .collect();
        Ok((labels, marginals))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.combinations.is_empty() || self.combinations.iter().any(LabelSet::is_empty) {
            return Err(Error::SchemaMismatch(
                "label powerset classes must be non-empty combinations".into(),
            ));
        }
        let names: Vec<String> = self.combinations.iter().map(LabelSet::canonical).collect();
        if names != self.tree.classes {
            return Err(Error::SchemaMismatch(
                "tree classes do not match the combinations".into(),
            ));
        }
        self.tree.validate()
    }
}
