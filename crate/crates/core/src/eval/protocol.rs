use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::metrics::{hamming_loss, label_stats, probabilistic_errors, ConfusionMatrix, ProbabilisticErrors};
use super::{accuracy, kappa, EvalMode, EvaluationReport, MetricsReport, MultiLabelReport, Protocol, ReportHeader};
use crate::dataset::{Dataset, LabelSet, Record, SplitSpec};
use crate::multilabel::{CodePredictor, NO_CODE};
use crate::{Error, Result};

/// Predictions of one model on one batch of records, reduced to what the
/// reports need.
struct Scored {
    model: String,
    /// Class names of the mode's fixed class list (principal mode only).
    classes: Option<Vec<String>>,
    actual: Vec<String>,
    predicted: Vec<String>,
    errors: ProbabilisticErrors,
    actual_sets: Vec<LabelSet>,
    predicted_sets: Vec<LabelSet>,
    alphabet: Vec<String>,
    triggered: Vec<Option<bool>>,
}

fn combination_name(ls: &LabelSet) -> String {
    if ls.is_empty() {
        NO_CODE.to_owned()
    } else {
        ls.canonical()
    }
}

fn score<'a, M: CodePredictor + ?Sized>(
    model: &M,
    records: impl IntoIterator<Item = &'a Record>,
    mode: EvalMode,
) -> Result<Scored> {
    let summary = model.summary();
    let alphabet = summary.alphabet.clone();
    let mut actual_sets = Vec::new();
    let mut predicted_sets = Vec::new();
    let mut triggered = Vec::new();
    let mut probabilities = Vec::new();
    let mut principals = Vec::new();
    for r in records {
        let p = model.predict_scored(&r.features)?;
        principals.push(r.principal_code().unwrap_or(NO_CODE).to_owned());
        actual_sets.push(r.labels.clone());
        predicted_sets.push(p.labels);
        probabilities.push(p.probabilities);
        triggered.push(p.triggered);
    }
    if actual_sets.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let (classes, actual, predicted, errors) = match mode {
        EvalMode::Principal => {
            let classes = summary.principal_classes.clone();
            let index = |code: &str| {
                classes
                    .iter()
                    .position(|c| c == code)
                    .ok_or_else(|| Error::UnknownCode(code.to_owned()))
            };
            let predicted: Vec<String> = predicted_sets
                .iter()
                .map(|ls| summary.principal_for(ls).to_owned())
                .collect();
            let targets = principals.iter().map(|c| index(c)).collect::<Result<Vec<_>>>()?;
            let one_hot = predicted
                .iter()
                .map(|c| {
                    let mut v = vec![0.0; classes.len()];
                    v[index(c)?] = 1.0;
                    Ok(v)
                })
                .collect::<Result<Vec<_>>>()?;
            let errors = probabilistic_errors(&one_hot, &targets, &summary.principal_prior)?;
            (Some(classes.clone()), principals, predicted, errors)
        }
        EvalMode::Multilabel => {
            let mut per_label = Vec::with_capacity(alphabet.len());
            for (l, code) in alphabet.iter().enumerate() {
                let preds: Vec<Vec<f64>> = probabilities.iter().map(|p| vec![1.0 - p[l], p[l]]).collect();
                let targets: Vec<usize> = actual_sets.iter().map(|a| usize::from(a.contains(code))).collect();
                let q = summary.label_prior[l];
                per_label.push(probabilistic_errors(&preds, &targets, &[1.0 - q, q])?);
            }
            let actual = actual_sets.iter().map(combination_name).collect();
            let predicted = predicted_sets.iter().map(combination_name).collect();
            (None, actual, predicted, average_errors(&per_label))
        }
    };
    Ok(Scored {
        model: model.name(),
        classes,
        actual,
        predicted,
        errors,
        actual_sets,
        predicted_sets,
        alphabet,
        triggered,
    })
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

/// Mean over labels; relative errors average the labels where they are defined.
fn average_errors(parts: &[ProbabilisticErrors]) -> ProbabilisticErrors {
    let n = parts.len().max(1) as f64;
    ProbabilisticErrors {
        mae: parts.iter().map(|e| e.mae).sum::<f64>() / n,
        rmse: parts.iter().map(|e| e.rmse).sum::<f64>() / n,
        rae: mean_defined(parts.iter().map(|e| e.rae)),
        rrse: mean_defined(parts.iter().map(|e| e.rrse)),
    }
}

fn confusion(parts: &[&Scored]) -> Result<ConfusionMatrix> {
    let classes: Vec<String> = match parts[0].classes.clone() {
        Some(c) => c,
        None => parts
            .iter()
            .flat_map(|s| s.actual.iter().chain(&s.predicted).cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let mut cm = ConfusionMatrix::new(classes);
    for s in parts {
        for (a, p) in s.actual.iter().zip(&s.predicted) {
            let i = cm
                .classes()
                .iter()
                .position(|c| c == a)
                .ok_or_else(|| Error::UnknownCode(a.clone()))?;
            let j = cm
                .classes()
                .iter()
                .position(|c| c == p)
                .ok_or_else(|| Error::UnknownCode(p.clone()))?;
            cm.add(i, j);
        }
    }
    Ok(cm)
}

fn metrics(cm: &ConfusionMatrix, errors: &ProbabilisticErrors) -> Result<MetricsReport> {
    let (correct, accuracy_pct) = accuracy(cm)?;
    Ok(MetricsReport {
        total: cm.total(),
        correct,
        accuracy_pct,
        kappa: kappa(cm)?,
        mae: errors.mae,
        rmse: errors.rmse,
        rae_pct: errors.rae,
        rrse_pct: errors.rrse,
    })
}

fn multilabel(parts: &[&Scored]) -> Result<MultiLabelReport> {
    let actual: Vec<LabelSet> = parts.iter().flat_map(|s| s.actual_sets.iter().cloned()).collect();
    let predicted: Vec<LabelSet> = parts.iter().flat_map(|s| s.predicted_sets.iter().cloned()).collect();
    let alphabet = &parts[0].alphabet;
    let exact = actual.iter().zip(&predicted).filter(|(a, p)| a == p).count();
    let triggered: Option<Vec<bool>> = parts.iter().flat_map(|s| s.triggered.iter().copied()).collect();
    Ok(MultiLabelReport {
        subset_accuracy_pct: 100.0 * exact as f64 / actual.len() as f64,
        hamming_loss: hamming_loss(&actual, &predicted, alphabet.len())?,
        per_label: label_stats(&actual, &predicted, alphabet),
        trigger_rate: triggered.map(|t| t.iter().filter(|b| **b).count() as f64 / t.len() as f64),
    })
}

fn report(s: Scored, mode: EvalMode, protocol: Protocol, contaminated: bool) -> Result<EvaluationReport> {
    let cm = confusion(&[&s])?;
    Ok(EvaluationReport {
        header: ReportHeader {
            model: s.model.clone(),
            mode,
            protocol,
            contaminated,
        },
        metrics: metrics(&cm, &s.errors)?,
        multilabel: multilabel(&[&s])?,
        confusion: cm,
        folds: Vec::new(),
    })
}

/// Evaluates on every record of `ds`, training records included.
///
/// `model` must have been trained on exactly `split.train_ids`. The report
/// is marked contaminated whenever the training side is non-empty.
pub fn evaluate_resubstitution<M: CodePredictor + ?Sized>(
    model: &M,
    ds: &Dataset,
    split: &SplitSpec,
    mode: EvalMode,
) -> Result<EvaluationReport> {
    SplitSpec::new(split.train_ids.clone(), split.test_ids.clone(), ds)?;
    if model.summary().training_ids != split.train_ids {
        return Err(Error::InvalidArgument(
            "model was not trained on the split's training side".into(),
        ));
    }
    let s = score(model, ds.records(), mode)?;
    report(s, mode, Protocol::Resubstitution, !split.train_ids.is_empty())
}

/// Evaluates on the test side of `split` only. Priors come from the model,
/// so training records are never read.
pub fn evaluate_holdout<M: CodePredictor + ?Sized>(
    model: &M,
    ds: &Dataset,
    split: &SplitSpec,
    mode: EvalMode,
) -> Result<EvaluationReport> {
    if split.test_ids.is_empty() {
        return Err(Error::Empty("test side of the split"));
    }
    let trained = &model.summary().training_ids;
    if let Some(id) = split.test_ids.iter().find(|id| trained.contains(*id)) {
        return Err(Error::InvalidArgument(format!(
            "test record `{id}` was used for training"
        )));
    }
    let mut records = Vec::with_capacity(split.test_ids.len());
    for id in &split.test_ids {
        records.push(
            ds.record(id)
                .ok_or_else(|| Error::Dataset(format!("no record `{id}`")))?,
        );
    }
    let s = score(model, records, mode)?;
    report(s, mode, Protocol::Holdout, false)
}

/// Assigns record indices to `k` folds, stratified by each record's lowest
/// code. Records are shuffled within each stratum, strata are concatenated in
/// code order and dealt round-robin, so fold sizes differ by at most one.
pub fn stratified_folds(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k-fold needs k >= 2, got {k}")));
    }
    if k > ds.len() {
        return Err(Error::InvalidArgument(format!(
            "{k} folds over {} records would leave a fold empty",
            ds.len()
        )));
    }
    let mut strata: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in ds.records().iter().enumerate() {
        strata.entry(r.labels.first().unwrap_or("")).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for members in strata.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// K-fold cross-validation: `trainer` is called once per fold on the other
/// folds' records. Correct counts, kappa and the multi-label figures are
/// computed over the pooled predictions; the probabilistic errors are fold
/// means. Per-fold metrics are kept in fold order.
pub fn evaluate_kfold<M, F>(ds: &Dataset, k: usize, seed: u64, mode: EvalMode, trainer: F) -> Result<EvaluationReport>
where
    M: CodePredictor,
    F: Fn(&Dataset) -> Result<M> + Sync,
{
    let folds = stratified_folds(ds, k, seed)?;
    let scored = folds
        .par_iter()
        .map(|fold| {
            let test: BTreeSet<usize> = fold.iter().copied().collect();
            let train_ids = ds
                .records()
                .iter()
                .enumerate()
                .filter(|(i, _)| !test.contains(i))
                .map(|(_, r)| r.id.clone())
                .collect();
            let model = trainer(&ds.subset(&train_ids))?;
            score(&model, fold.iter().map(|&i| &ds.records()[i]), mode)
        })
        .collect::<Result<Vec<_>>>()?;
    let per_fold = scored
        .iter()
        .map(|s| metrics(&confusion(&[s])?, &s.errors))
        .collect::<Result<Vec<_>>>()?;
    let parts: Vec<&Scored> = scored.iter().collect();
    let cm = confusion(&parts)?;
    let n = per_fold.len() as f64;
    let errors = ProbabilisticErrors {
        mae: per_fold.iter().map(|m| m.mae).sum::<f64>() / n,
        rmse: per_fold.iter().map(|m| m.rmse).sum::<f64>() / n,
        rae: mean_defined(per_fold.iter().map(|m| m.rae_pct)),
        rrse: mean_defined(per_fold.iter().map(|m| m.rrse_pct)),
    };
    Ok(EvaluationReport {
        header: ReportHeader {
            model: scored[0].model.clone(),
            mode,
            protocol: Protocol::KFold { k, seed },
            contaminated: false,
        },
        metrics: metrics(&cm, &errors)?,
        multilabel: multilabel(&parts)?,
        confusion: cm,
        folds: per_fold,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicUsize, Ordering};

    use super::*;
    use crate::c45::C45Params;
    use crate::dataset::{Attribute, FeatureVector, Value};
    use crate::multilabel::{train_br, BrModel, ScoredPrediction, TrainingSummary};

    fn ds(n: usize) -> Dataset {
        let records = (0..n)
            .map(|i| {
                let code = ["a", "b", "c"][i % 3];
                Record::new(
                    format!("r{i:02}"),
                    FeatureVector::new(vec![Value::Nominal(i % 3)]),
                    LabelSet::from_iter([code]),
                )
            })
            .collect();
        Dataset::new(
            vec![Attribute::nominal("x", ["0", "1", "2"])],
            vec!["a".into(), "b".into(), "c".into()],
            records,
        )
        .unwrap()
    }

    struct Counting<'a> {
        inner: &'a BrModel,
        calls: AtomicUsize,
    }

    impl CodePredictor for Counting<'_> {
        fn name(&self) -> String {
            "counting".into()
        }

        fn summary(&self) -> &TrainingSummary {
            self.inner.summary()
        }

        fn predict_scored(&self, x: &FeatureVector) -> Result<ScoredPrediction> {
            self.calls.fetch_add(1, Ordering::Relaxed);
            self.inner.predict_scored(x)
        }
    }

    #[test]
    fn resubstitution_covers_everything() {
        let d = ds(12);
        let split = SplitSpec::from_train(["r00", "r01", "r02"].map(String::from).into(), &d).unwrap();
        let m = train_br(&d.subset(&split.train_ids), &C45Params::unpruned()).unwrap();
        let r = evaluate_resubstitution(&m, &d, &split, EvalMode::Principal).unwrap();
        assert_eq!(r.metrics.total, 12);
        assert!(r.header.contaminated);
        assert_eq!(r.metrics.correct, 12);
        let other = SplitSpec::from_train(["r03"].map(String::from).into(), &d).unwrap();
        assert!(evaluate_resubstitution(&m, &d, &other, EvalMode::Principal).is_err());
    }

    #[test]
    fn holdout_only_predicts_test_records() {
        let d = ds(12);
        let split = SplitSpec::from_train((0..6).map(|i| format!("r{i:02}")).collect(), &d).unwrap();
        let m = train_br(&d.subset(&split.train_ids), &C45Params::unpruned()).unwrap();
        let counting = Counting {
            inner: &m,
            calls: AtomicUsize::new(0),
        };
        let r = evaluate_holdout(&counting, &d, &split, EvalMode::Multilabel).unwrap();
        assert_eq!(counting.calls.load(Ordering::Relaxed), 6);
        assert_eq!(r.metrics.total, 6);
        assert!(!r.header.contaminated);
        let leaky = SplitSpec::from_train((3..12).map(|i| format!("r{i:02}")).collect(), &d).unwrap();
        assert!(evaluate_holdout(&m, &d, &leaky, EvalMode::Multilabel).is_err());
    }

    #[test]
    fn fold_sizes_and_determinism() {
        let d = ds(10);
        let folds = stratified_folds(&d, 3, 5).unwrap();
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert_eq!(sizes.iter().sum::<usize>(), 10);
        assert_eq!(folds, stratified_folds(&d, 3, 5).unwrap());
        assert!(stratified_folds(&d, 1, 0).is_err());
        assert!(stratified_folds(&d, 11, 0).is_err());
    }

    #[test]
    fn leave_one_out_trains_n_models() {
        let d = ds(9);
        let trainings = AtomicUsize::new(0);
        let r = evaluate_kfold(&d, 9, 1, EvalMode::Principal, |train| {
            trainings.fetch_add(1, Ordering::Relaxed);
            train_br(train, &C45Params::unpruned())
        })
        .unwrap();
        assert_eq!(trainings.load(Ordering::Relaxed), 9);
        assert_eq!(r.folds.len(), 9);
        assert_eq!(r.metrics.total, 9);
    }

    #[test]
    fn single_label_modes_agree() {
        let d = ds(12);
        let split = SplitSpec::from_train(d.ids(), &d).unwrap();
        let m = train_br(&d, &C45Params::default()).unwrap();
        let p = evaluate_resubstitution(&m, &d, &split, EvalMode::Principal).unwrap();
        let ml = evaluate_resubstitution(&m, &d, &split, EvalMode::Multilabel).unwrap();
        assert_eq!(p.metrics.accuracy_pct, ml.multilabel.subset_accuracy_pct);
        assert_eq!(ml.metrics.accuracy_pct, ml.multilabel.subset_accuracy_pct);
        assert_eq!(ml.multilabel.trigger_rate, None);
    }
}
