//! C4.5 decision trees.
//!
//! Induction follows Quinlan's recipe: a node is split on the attribute with
//! the highest gain ratio among those whose information gain is at least the
//! average gain of all admissible splits. Numeric attributes are split at the
//! midpoint between consecutive distinct values that maximizes information
//! gain. Grown trees are pruned bottom-up by subtree replacement using the
//! pessimistic (upper confidence limit) error estimate.
//!
//! Missing values are not supported; every training and query vector must be
//! complete.

mod grow;
mod prune;
mod render;
mod split;

use serde::{Deserialize, Serialize};

use crate::dataset::{Attribute, FeatureVector, Value};
use crate::{Error, Result};

pub use grow::grow;
pub use prune::{pessimistic_error_rate, prune_ebp};
pub use split::{best_numeric_threshold, gain_ratio, NumericSplit, SplitScore, TrainingSet};

/// Per-class weights over an ordered class list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassDistribution(Vec<f64>);

impl ClassDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument(
                "class weights must be finite and non-negative".into(),
            ));
        }
        Ok(ClassDistribution(weights))
    }

    pub(crate) fn zeros(k: usize) -> Self {
        ClassDistribution(vec![0.0; k])
    }

    pub(crate) fn add(&mut self, class: usize, w: f64) {
        self.0[class] += w;
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Index of the largest weight; ties go to the lowest index.
    pub fn majority(&self) -> usize {
        argmax(&self.0)
    }

    /// Weight not on the majority class.
    pub fn errors(&self) -> f64 {
        let total = self.total();
        if total == 0.0 {
            0.0
        } else {
            total - self.0[self.majority()]
        }
    }

    pub fn is_pure(&self) -> bool {
        self.0.iter().filter(|w| **w > 0.0).count() <= 1
    }

    /// Scaled to sum to one.
    pub fn normalized(&self) -> Result<ClassDistribution> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("distribution has zero total weight".into()));
        }
        Ok(ClassDistribution(self.0.iter().map(|w| w / total).collect()))
    }
}

/// First index of the maximum; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Shannon entropy in bits, with `0·log 0 = 0`.
pub fn entropy(d: &ClassDistribution) -> Result<f64> {
    let total = d.total();
    if total <= 0.0 {
        return Err(Error::InvalidArgument("entropy of an empty distribution".into()));
    }
    Ok(entropy_of(d.weights(), total))
}

pub(crate) fn entropy_of(weights: &[f64], total: f64) -> f64 {
    let h: f64 = weights
        .iter()
        .filter(|w| **w > 0.0)
        .map(|w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Induction parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct C45Params {
    /// Minimum number of training cases on at least two branches of a split.
    pub min_leaf: usize,
    /// Pruning confidence, in (0, 0.5]. Smaller prunes harder.
    pub confidence_factor: f64,
    pub pruning: bool,
    pub max_depth: Option<usize>,
    /// Evaluate candidate attributes on the rayon pool. Does not change the tree.
    #[serde(skip_serializing)]
    pub parallel: bool,
}

impl Default for C45Params {
    fn default() -> Self {
        C45Params {
            min_leaf: 2,
            confidence_factor: 0.25,
            pruning: true,
            max_depth: None,
            parallel: false,
        }
    }
}

impl C45Params {
    /// Unpruned, `min_leaf = 1`: grows until leaves are pure or inseparable.
    pub fn unpruned() -> Self {
        C45Params {
            min_leaf: 1,
            pruning: false,
            ..C45Params::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_leaf < 1 {
            return Err(Error::InvalidArgument("min_leaf must be at least 1".into()));
        }
        if !(self.confidence_factor > 0.0 && self.confidence_factor <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "confidence factor {} outside (0, 0.5]",
                self.confidence_factor
            )));
        }
        Ok(())
    }
}

/// The test applied at an internal node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SplitTest {
    /// One branch per declared value of a nominal attribute.
    Nominal { attribute: usize },
    /// Branch 0 takes `value <= threshold`, branch 1 the rest.
    Numeric { attribute: usize, threshold: f64 },
}

impl SplitTest {
    pub fn attribute(&self) -> usize {
        match self {
            SplitTest::Nominal { attribute } | SplitTest::Numeric { attribute, .. } => *attribute,
        }
    }

    pub fn branch_count(&self, attributes: &[Attribute]) -> usize {
        match self {
            SplitTest::Nominal { attribute } => attributes[*attribute].values().map_or(0, <[_]>::len),
            SplitTest::Numeric { .. } => 2,
        }
    }

    /// Branch taken by `x`.
    pub fn branch(&self, x: &FeatureVector) -> Result<usize> {
        let value = x
            .get(self.attribute())
            .ok_or_else(|| Error::SchemaMismatch(format!("vector has no attribute {}", self.attribute())))?;
        match (self, value) {
            (SplitTest::Nominal { .. }, Value::Nominal(i)) => Ok(i),
            (SplitTest::Numeric { threshold, .. }, Value::Numeric(v)) => Ok(usize::from(v > *threshold)),
            _ => Err(Error::SchemaMismatch(format!(
                "attribute {} has the wrong value kind",
                self.attribute()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        /// Class weights used for prediction. A branch that received no
        /// training cases inherits its parent's weights.
        distribution: ClassDistribution,
        /// Training cases that reached the leaf.
        cases: f64,
    },
    Split {
        test: SplitTest,
        /// Training class counts at this node.
        distribution: ClassDistribution,
        cases: f64,
        children: Vec<Node>,
    },
}

impl Node {
    pub fn distribution(&self) -> &ClassDistribution {
        match self {
            Node::Leaf { distribution, .. } | Node::Split { distribution, .. } => distribution,
        }
    }

    pub fn cases(&self) -> f64 {
        match self {
            Node::Leaf { cases, .. } | Node::Split { cases, .. } => *cases,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }

    /// Majority class of the node's distribution.
    pub fn class(&self) -> usize {
        self.distribution().majority()
    }

    pub fn node_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { children, .. } => 1 + children.iter().map(Node::node_count).sum::<usize>(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { children, .. } => children.iter().map(Node::leaf_count).sum(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { children, .. } => 1 + children.iter().map(Node::depth).max().unwrap_or(0),
        }
    }

    /// The leaf `x` is routed to.
    pub fn route(&self, x: &FeatureVector) -> Result<&Node> {
        let mut node = self;
        while let Node::Split { test, children, .. } = node {
            let b = test.branch(x)?;
            node = children
                .get(b)
                .ok_or_else(|| Error::Domain(format!("value index {b} has no branch")))?;
        }
        Ok(node)
    }
}

/// A trained tree together with the schema and class list it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub attributes: Vec<Attribute>,
    pub classes: Vec<String>,
    pub root: Node,
}

impl DecisionTree {
    /// Grows a tree on every row of `set` and prunes it when `params.pruning` is set.
    pub fn train(set: &TrainingSet<'_>, params: &C45Params) -> Result<DecisionTree> {
        params.validate()?;
        let rows: Vec<usize> = (0..set.len()).collect();
        let mut root = grow(set, &rows, params)?;
        if params.pruning {
            root = prune_ebp(&root, params)?;
        }
        Ok(DecisionTree {
            attributes: set.attributes().to_vec(),
            classes: set.classes().to_vec(),
            root,
        })
    }

    /// Class probabilities at the leaf `x` reaches, summing to one.
    pub fn predict_distribution(&self, x: &FeatureVector) -> Result<ClassDistribution> {
        x.check(&self.attributes)?;
        self.root.route(x)?.distribution().normalized()
    }

    /// Most probable class; ties go to the lowest class index.
    pub fn predict(&self, x: &FeatureVector) -> Result<usize> {
        Ok(self.predict_distribution(x)?.majority())
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Loads a tree, refusing it unless its schema equals `expected`.
    pub fn from_json(content: &str, expected: &[Attribute]) -> Result<DecisionTree> {
        let tree: DecisionTree = serde_json::from_str(content)?;
        if tree.attributes != expected {
            return Err(Error::SchemaMismatch(
                "tree was trained on a different attribute schema".into(),
            ));
        }
        tree.validate()?;
        Ok(tree)
    }

    /// Structural checks for trees that did not come out of [`DecisionTree::train`].
    pub fn validate(&self) -> Result<()> {
        fn walk(node: &Node, attrs: &[Attribute], k: usize) -> Result<()> {
            if node.distribution().len() != k {
                return Err(Error::SchemaMismatch(
                    "distribution length differs from class count".into(),
                ));
            }
            match node {
                Node::Leaf { distribution, .. } => {
                    if distribution.total() <= 0.0 {
                        return Err(Error::InvalidArgument("leaf with zero total weight".into()));
                    }
                    Ok(())
                }
                Node::Split { test, children, .. } => {
                    if test.attribute() >= attrs.len() {
                        return Err(Error::SchemaMismatch(format!(
                            "split on missing attribute {}",
                            test.attribute()
                        )));
                    }
                    let kind_ok = matches!(
                        (test, attrs[test.attribute()].is_numeric()),
                        (SplitTest::Nominal { .. }, false) | (SplitTest::Numeric { .. }, true)
                    );
                    if !kind_ok || children.len() != test.branch_count(attrs) || children.len() < 2 {
                        return Err(Error::SchemaMismatch("split does not match its attribute".into()));
                    }
                    children.iter().try_for_each(|c| walk(c, attrs, k))
                }
            }
        }
        crate::dataset::validate_schema(&self.attributes)?;
        walk(&self.root, &self.attributes, self.classes.len())
    }
}
