use serde::{Deserialize, Serialize};

use crate::dataset::LabelSet;
use crate::{Error, Result};

/// Counts of (true class, predicted class) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    /// `counts[i][j]`: instances of true class `i` predicted as `j`.
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let k = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; k]; k],
        }
    }

    /// Builds a matrix from explicit counts; must be square and match `classes`.
    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != classes.len() || counts.iter().any(|row| row.len() != classes.len()) {
            return Err(Error::InvalidArgument(
                "confusion matrix must be k×k for k classes".into(),
            ));
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn add(&mut self, actual: usize, predicted: usize) {
        self.counts[actual][predicted] += 1;
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.classes.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    /// Same counts with class `perm[i]` moved to position `i` on both axes.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        ConfusionMatrix {
            classes: perm.iter().map(|&p| self.classes[p].clone()).collect(),
            counts: perm
                .iter()
                .map(|&i| perm.iter().map(|&j| self.counts[i][j]).collect())
                .collect(),
        }
    }

    fn nonempty(&self) -> Result<u64> {
        match self.total() {
            0 => Err(Error::Empty("confusion matrix")),
            n => Ok(n),
        }
    }
}

/// Correct count and percentage.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<(u64, f64)> {
    let n = cm.nonempty()?;
    let c = cm.correct();
    Ok((c, 100.0 * c as f64 / n as f64))
}

/// Cohen's kappa; 0 when chance agreement is already perfect.
pub fn kappa(cm: &ConfusionMatrix) -> Result<f64> {
    let n = cm.nonempty()? as f64;
    let po = cm.correct() as f64 / n;
    let pe: f64 = cm
        .row_sums()
        .iter()
        .zip(cm.col_sums())
        .map(|(r, c)| *r as f64 * c as f64)
        .sum::<f64>()
        / (n * n);
    if pe >= 1.0 {
        return Ok(0.0);
    }
    Ok((po - pe) / (1.0 - pe))
}

/// Error measures of class-probability predictions. The relative measures
/// are `None` when the prior predictor makes no error at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilisticErrors {
    pub mae: f64,
    pub rmse: f64,
    pub rae: Option<f64>,
    pub rrse: Option<f64>,
}

/// MAE, RMSE, RAE % and RRSE % of `predicted` against one-hot `actual`
/// targets, relative to always predicting `prior`.
pub fn probabilistic_errors(predicted: &[Vec<f64>], actual: &[usize], prior: &[f64]) -> Result<ProbabilisticErrors> {
    if predicted.is_empty() {
        return Err(Error::Empty("prediction list"));
    }
    if predicted.len() != actual.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} targets",
            predicted.len(),
            actual.len()
        )));
    }
    let k = prior.len();
    if k == 0 || predicted.iter().any(|p| p.len() != k) || actual.iter().any(|a| *a >= k) {
        return Err(Error::InvalidArgument(
            "predictions, targets and prior disagree on the class count".into(),
        ));
    }
    let (mut abs, mut sq, mut prior_abs, mut prior_sq) = (0.0, 0.0, 0.0, 0.0);
    for (p, &a) in predicted.iter().zip(actual) {
        for j in 0..k {
            let y = if j == a { 1.0 } else { 0.0 };
            abs += (p[j] - y).abs();
            sq += (p[j] - y).powi(2);
            prior_abs += (prior[j] - y).abs();
            prior_sq += (prior[j] - y).powi(2);
        }
    }
    let cells = (predicted.len() * k) as f64;
    Ok(ProbabilisticErrors {
        mae: abs / cells,
        rmse: (sq / cells).sqrt(),
        rae: (prior_abs > 0.0).then(|| 100.0 * abs / prior_abs),
        rrse: (prior_sq > 0.0).then(|| 100.0 * (sq / prior_sq).sqrt()),
    })
}

/// Precision and recall of one code; `None` where the denominator is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub code: String,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    /// Records that truly carry the code.
    pub support: usize,
}

/// Fraction of (record, code) decisions that are wrong.
pub fn hamming_loss(actual: &[LabelSet], predicted: &[LabelSet], alphabet_len: usize) -> Result<f64> {
    if actual.is_empty() || alphabet_len == 0 {
        return Err(Error::Empty("label sets"));
    }
    if actual.len() != predicted.len() {
        return Err(Error::InvalidArgument(
            "actual and predicted label lists differ in length".into(),
        ));
    }
    let wrong: usize = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| a.symmetric_difference_len(p))
        .sum();
    Ok(wrong as f64 / (actual.len() * alphabet_len) as f64)
}

pub fn label_stats(actual: &[LabelSet], predicted: &[LabelSet], alphabet: &[String]) -> Vec<LabelStats> {
    alphabet
        .iter()
        .map(|code| {
            let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
            for (a, p) in actual.iter().zip(predicted) {
                match (a.contains(code), p.contains(code)) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    (false, false) => {}
                }
            }
            let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
            LabelStats {
                code: code.clone(),
                precision: ratio(tp, tp + fp),
                recall: ratio(tp, tp + fn_),
                support: tp + fn_,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(counts: Vec<Vec<u64>>) -> ConfusionMatrix {
        let classes = (0..counts.len()).map(|i| format!("c{i}")).collect();
        ConfusionMatrix::from_counts(classes, counts).unwrap()
    }

    #[test]
    fn accuracy_and_kappa_examples() {
        let m = cm(vec![vec![20, 5], vec![10, 15]]);
        assert_eq!(accuracy(&m).unwrap(), (35, 70.0));
        assert!((kappa(&m).unwrap() - 0.4).abs() < 1e-12);
        let id = cm(vec![vec![3, 0, 0], vec![0, 4, 0], vec![0, 0, 5]]);
        assert_eq!(accuracy(&id).unwrap().1, 100.0);
        assert_eq!(kappa(&id).unwrap(), 1.0);
    }

    #[test]
    fn single_column_kappa_not_positive() {
        assert!(kappa(&cm(vec![vec![5, 0], vec![5, 0]])).unwrap() <= 0.0);
        // everything in one cell: chance agreement is 1
        assert_eq!(kappa(&cm(vec![vec![7, 0], vec![0, 0]])).unwrap(), 0.0);
    }

    #[test]
    fn empty_matrix_errors() {
        let m = ConfusionMatrix::new(vec!["a".into()]);
        assert!(accuracy(&m).is_err());
        assert!(kappa(&m).is_err());
        assert!(ConfusionMatrix::from_counts(vec!["a".into()], vec![vec![1, 2]]).is_err());
    }

    #[test]
    fn perfect_and_prior_predictions() {
        let actual = [0, 1, 1, 0];
        let onehot: Vec<Vec<f64>> = actual
            .iter()
            .map(|&a| if a == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
            .collect();
        let prior = [0.5, 0.5];
        let e = probabilistic_errors(&onehot, &actual, &prior).unwrap();
        assert_eq!((e.mae, e.rmse), (0.0, 0.0));
        let at_prior = vec![prior.to_vec(); 4];
        let e = probabilistic_errors(&at_prior, &actual, &prior).unwrap();
        assert_eq!(e.rae, Some(100.0));
        assert_eq!(e.rrse, Some(100.0));
    }

    #[test]
    fn constant_corpus_relative_errors_undefined() {
        let e = probabilistic_errors(&[vec![0.9, 0.1]], &[0], &[1.0, 0.0]).unwrap();
        assert!(e.rae.is_none() && e.rrse.is_none());
        assert!((e.mae - 0.1).abs() < 1e-15);
    }

    #[test]
    fn multilabel_helpers() {
        let a: Vec<LabelSet> = vec![LabelSet::from_iter(["x"]), LabelSet::from_iter(["x", "y"])];
        let p: Vec<LabelSet> = vec![LabelSet::from_iter(["x", "y"]), LabelSet::from_iter(["x"])];
        assert_eq!(hamming_loss(&a, &p, 2).unwrap(), 0.5);
        let s = label_stats(&a, &p, &["x".into(), "y".into(), "z".into()]);
        assert_eq!((s[0].precision, s[0].recall, s[0].support), (Some(1.0), Some(1.0), 2));
        assert_eq!((s[1].precision, s[1].recall), (Some(0.0), Some(0.0)));
        assert_eq!((s[2].precision, s[2].recall, s[2].support), (None, None, 0));
    }
}
