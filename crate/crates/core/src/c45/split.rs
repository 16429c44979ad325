use crate::dataset::{Attribute, FeatureVector, Value};
use crate::{Error, Result};

use super::{entropy_of, ClassDistribution, SplitTest};

/// Feature rows paired with class targets, borrowed from a dataset.
#[derive(Debug, Clone)]
pub struct TrainingSet<'a> {
    attributes: &'a [Attribute],
    classes: Vec<String>,
    rows: Vec<&'a FeatureVector>,
    targets: Vec<usize>,
}

impl<'a> TrainingSet<'a> {
    pub fn new(
        attributes: &'a [Attribute],
        classes: Vec<String>,
        rows: Vec<&'a FeatureVector>,
        targets: Vec<usize>,
    ) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidArgument("class list is empty".into()));
        }
        if rows.len() != targets.len() {
            return Err(Error::InvalidArgument(format!(
                "{} rows but {} targets",
                rows.len(),
                targets.len()
            )));
        }
        if let Some(t) = targets.iter().find(|t| **t >= classes.len()) {
            return Err(Error::InvalidArgument(format!(
                "target {t} outside {} classes",
                classes.len()
            )));
        }
        for r in &rows {
            r.check(attributes)?;
        }
        Ok(TrainingSet {
            attributes,
            classes,
            rows,
            targets,
        })
    }

    pub fn attributes(&self) -> &'a [Attribute] {
        self.attributes
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &FeatureVector {
        self.rows[i]
    }

    pub fn target(&self, i: usize) -> usize {
        self.targets[i]
    }

    /// Class counts over `rows`.
    pub fn distribution(&self, rows: &[usize]) -> ClassDistribution {
        let mut d = ClassDistribution::zeros(self.classes.len());
        for &r in rows {
            d.add(self.targets[r], 1.0);
        }
        d
    }

    pub(crate) fn numeric(&self, row: usize, attribute: usize) -> f64 {
        match self.rows[row].values()[attribute] {
            Value::Numeric(v) => v,
            Value::Nominal(i) => i as f64,
        }
    }

    /// Rows of `rows` grouped by the branch `test` sends them to.
    pub fn partition(&self, rows: &[usize], test: &SplitTest) -> Vec<Vec<usize>> {
        let mut branches = vec![Vec::new(); test.branch_count(self.attributes)];
        for &r in rows {
            let b = test.branch(self.rows[r]).expect("training rows match the schema");
            branches[b].push(r);
        }
        branches
    }
}

/// Information gain, split information and their ratio for one candidate split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitScore {
    pub info_gain: f64,
    pub split_info: f64,
    pub gain_ratio: f64,
}

/// Scores a split from the class counts of each branch.
pub(crate) fn score_branches(parent: &ClassDistribution, branches: &[ClassDistribution]) -> Option<SplitScore> {
    let n = parent.total();
    let sizes: Vec<f64> = branches.iter().map(ClassDistribution::total).collect();
    if n <= 0.0 || sizes.iter().filter(|s| **s > 0.0).count() < 2 {
        return None;
    }
    let remainder: f64 = branches
        .iter()
        .zip(&sizes)
        .filter(|(_, s)| **s > 0.0)
        .map(|(b, s)| s / n * entropy_of(b.weights(), *s))
        .sum();
    let info_gain = (entropy_of(parent.weights(), n) - remainder).max(0.0);
    let split_info = entropy_of(&sizes, n);
    if split_info <= 0.0 {
        return None;
    }
    Some(SplitScore {
        info_gain,
        split_info,
        gain_ratio: info_gain / split_info,
    })
}

/// Gain ratio of `test` over the rows of `set` listed in `rows`.
///
/// `None` when the split leaves fewer than two non-empty branches, i.e. its
/// split information is zero and the ratio is undefined.
pub fn gain_ratio(set: &TrainingSet<'_>, rows: &[usize], test: &SplitTest) -> Option<SplitScore> {
    let parent = set.distribution(rows);
    let branches: Vec<ClassDistribution> = set.partition(rows, test).iter().map(|b| set.distribution(b)).collect();
    score_branches(&parent, &branches)
}

/// Best threshold for a numeric attribute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericSplit {
    pub threshold: f64,
    pub score: SplitScore,
}

/// Searches the midpoints between consecutive distinct values of `attribute`
/// for the one with the highest information gain (ties: smallest threshold).
/// Only thresholds leaving at least `min_leaf` rows on both sides are
/// considered. Returns `None` when no threshold qualifies.
pub fn best_numeric_threshold(
    set: &TrainingSet<'_>,
    rows: &[usize],
    attribute: usize,
    min_leaf: usize,
) -> Option<NumericSplit> {
    let mut sorted: Vec<(f64, usize)> = rows.iter().map(|&r| (set.numeric(r, attribute), r)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n = sorted.len();
    let parent = set.distribution(rows);
    let mut left = ClassDistribution::zeros(set.classes().len());
    let mut best: Option<NumericSplit> = None;
    for i in 1..n {
        left.add(set.target(sorted[i - 1].1), 1.0);
        let (lo, hi) = (sorted[i - 1].0, sorted[i].0);
        if lo == hi || i < min_leaf || n - i < min_leaf {
            continue;
        }
        let mut threshold = lo + (hi - lo) / 2.0;
        if threshold >= hi {
            // adjacent floats: no representable midpoint
            threshold = lo;
        }
        let mut right = parent.clone();
        for (r, l) in right.0.iter_mut().zip(left.weights()) {
            *r -= l;
        }
        let Some(score) = score_branches(&parent, &[left.clone(), right]) else {
            continue;
        };
        if best.is_none_or(|b| score.info_gain > b.score.info_gain) {
            best = Some(NumericSplit { threshold, score });
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric_set(values: &[f64]) -> Vec<FeatureVector> {
        values
            .iter()
            .map(|v| FeatureVector::new(vec![Value::Numeric(*v)]))
            .collect()
    }

    #[test]
    fn single_midpoint() {
        let attrs = [Attribute::numeric("x")];
        let rows = numeric_set(&[1.0, 2.0]);
        let set = TrainingSet::new(&attrs, vec!["A".into(), "B".into()], rows.iter().collect(), vec![0, 1]).unwrap();
        let s = best_numeric_threshold(&set, &[0, 1], 0, 1).unwrap();
        assert_eq!(s.threshold, 1.5);
        assert_eq!(s.score.gain_ratio, 1.0);
        assert!(best_numeric_threshold(&set, &[0, 1], 0, 2).is_none());
    }

    #[test]
    fn constant_attribute_has_no_threshold() {
        let attrs = [Attribute::numeric("x")];
        let rows = numeric_set(&[3.0, 3.0, 3.0]);
        let set = TrainingSet::new(
            &attrs,
            vec!["A".into(), "B".into()],
            rows.iter().collect(),
            vec![0, 1, 0],
        )
        .unwrap();
        assert!(best_numeric_threshold(&set, &[0, 1, 2], 0, 1).is_none());
    }

    #[test]
    fn separating_and_uninformative_splits() {
        let attrs = [Attribute::binary("x")];
        let rows: Vec<FeatureVector> = (0..10)
            .map(|i| FeatureVector::new(vec![Value::Nominal(usize::from(i >= 5))]))
            .collect();
        let all: Vec<usize> = (0..10).collect();
        let separating = (0..10).map(|i| usize::from(i >= 5)).collect();
        let set = TrainingSet::new(&attrs, vec!["+".into(), "-".into()], rows.iter().collect(), separating).unwrap();
        let s = gain_ratio(&set, &all, &SplitTest::Nominal { attribute: 0 }).unwrap();
        assert_eq!((s.info_gain, s.split_info, s.gain_ratio), (1.0, 1.0, 1.0));

        // each branch has the parent's 3:2 proportions
        let same = vec![0, 0, 0, 1, 1, 0, 0, 0, 1, 1];
        let set = TrainingSet::new(&attrs, vec!["+".into(), "-".into()], rows.iter().collect(), same).unwrap();
        let s = gain_ratio(&set, &all, &SplitTest::Nominal { attribute: 0 }).unwrap();
        assert!(s.info_gain.abs() < 1e-12 && s.gain_ratio.abs() < 1e-12);
    }

    #[test]
    fn single_branch_is_not_a_candidate() {
        let attrs = [Attribute::binary("x")];
        let rows: Vec<FeatureVector> = (0..4).map(|_| FeatureVector::new(vec![Value::Nominal(0)])).collect();
        let set = TrainingSet::new(
            &attrs,
            vec!["+".into(), "-".into()],
            rows.iter().collect(),
            vec![0, 1, 0, 1],
        )
        .unwrap();
        assert!(gain_ratio(&set, &[0, 1, 2, 3], &SplitTest::Nominal { attribute: 0 }).is_none());
    }

    #[test]
    fn training_set_checks() {
        let attrs = [Attribute::binary("x")];
        let rows = [FeatureVector::new(vec![Value::Nominal(0)])];
        assert!(TrainingSet::new(&attrs, vec!["a".into()], rows.iter().collect(), vec![1]).is_err());
        assert!(TrainingSet::new(&attrs, vec![], rows.iter().collect(), vec![0]).is_err());
        assert!(TrainingSet::new(&attrs, vec!["a".into()], rows.iter().collect(), vec![]).is_err());
    }
}
