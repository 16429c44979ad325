#![allow(clippy::needless_range_loop)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use chidt::c45::C45Params;
use chidt::dataset::{cover_all_labels_split, generate_synthetic, GeneratorConfig, Profile, SplitSpec};
use chidt::eval::{
    accuracy, evaluate_resubstitution, format_report, kappa, probabilistic_errors, ConfusionMatrix, EvalMode,
};
use chidt::multilabel::{train_br, train_chidt, CascadeConfig};
use chidt::ontology::ValidCombinationRegistry;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn oracle_kappa(counts: &[Vec<u64>]) -> f64 {
    let k = counts.len();
    let n: f64 = counts.iter().flatten().map(|c| *c as f64).sum();
    let mut agree = 0.0;
    let mut chance = 0.0;
    for i in 0..k {
        agree += counts[i][i] as f64 / n;
        let row: f64 = (0..k).map(|j| counts[i][j] as f64).sum::<f64>() / n;
        let col: f64 = (0..k).map(|j| counts[j][i] as f64).sum::<f64>() / n;
        chance += row * col;
    }
    if chance == 1.0 {
        0.0
    } else {
        (agree - chance) / (1.0 - chance)
    }
}

#[test]
fn random_fixtures_match_direct_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let k = rng.gen_range(2..=5);
        let n = rng.gen_range(1..=50);
        let actual: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let predicted: Vec<usize> = actual
            .iter()
            .map(|&a| if rng.gen_bool(0.6) { a } else { rng.gen_range(0..k) })
            .collect();
        let mut counts = vec![vec![0u64; k]; k];
        for (a, p) in actual.iter().zip(&predicted) {
            counts[*a][*p] += 1;
        }
        let cm = ConfusionMatrix::from_counts((0..k).map(|i| i.to_string()).collect(), counts.clone()).unwrap();
        let (correct, pct) = accuracy(&cm).unwrap();
        let diag = actual.iter().zip(&predicted).filter(|(a, p)| a == p).count() as u64;
        assert_eq!(correct, diag);
        assert!((pct - 100.0 * diag as f64 / n as f64).abs() < 1e-12);
        assert!((kappa(&cm).unwrap() - oracle_kappa(&counts)).abs() < 1e-12);

        let dists: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let w: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
                let s: f64 = w.iter().sum();
                w.iter().map(|v| v / s).collect()
            })
            .collect();
        let mut prior = vec![0.0; k];
        for _ in 0..20 {
            prior[rng.gen_range(0..k)] += 1.0 / 20.0;
        }
        let e = probabilistic_errors(&dists, &actual, &prior).unwrap();
        let y = |i: usize, j: usize| f64::from(u8::from(actual[i] == j));
        let cells = (n * k) as f64;
        let abs: f64 = (0..n)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| (dists[i][j] - y(i, j)).abs())
            .sum();
        let sq: f64 = (0..n)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| (dists[i][j] - y(i, j)).powi(2))
            .sum();
        let pabs: f64 = (0..n)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| (prior[j] - y(i, j)).abs())
            .sum();
        let psq: f64 = (0..n)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| (prior[j] - y(i, j)).powi(2))
            .sum();
        assert!((e.mae - abs / cells).abs() < 1e-12);
        assert!((e.rmse - (sq / cells).sqrt()).abs() < 1e-12);
        assert!((e.rae.unwrap() - 100.0 * abs / pabs).abs() < 1e-12);
        assert!((e.rrse.unwrap() - 100.0 * (sq / psq).sqrt()).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&e.mae) && (0.0..=1.0).contains(&e.rmse));
    }
}

fn corpus(seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        profiles: vec![
            Profile::new(["I21.0", "I25.1"], vec![0.9, 0.8, 0.1, 0.1, 0.3, 0.5]).with_principal("I21.0"),
            Profile::new(["I21.4"], vec![0.9, 0.1, 0.8, 0.1, 0.3, 0.5]),
            Profile::new(["I20.0", "I25.1"], vec![0.1, 0.8, 0.1, 0.2, 0.3, 0.5]).with_principal("I20.0"),
            Profile::new(["I20.9"], vec![0.1, 0.1, 0.1, 0.9, 0.3, 0.5]),
        ],
        n_records: 80,
        noise_rate: 0.05,
        seed,
        feature_names: None,
    }
}

#[test]
fn memorizing_model_gets_its_training_records_right() {
    let (ds, _) = generate_synthetic(&corpus(1)).unwrap();
    // drop duplicate feature vectors so memorization is possible
    let mut seen = BTreeSet::new();
    let unique: BTreeSet<String> = ds
        .records()
        .iter()
        .filter(|r| seen.insert(format!("{:?}", r.features)))
        .map(|r| r.id.clone())
        .collect();
    let ds = ds.subset(&unique);
    let split = cover_all_labels_split(&ds, ds.len() / 2, 3).unwrap();
    let train = ds.subset(&split.train_ids);
    let m = train_br(&train, &C45Params::unpruned()).unwrap();
    let full = evaluate_resubstitution(&m, &ds, &split, EvalMode::Multilabel).unwrap();
    let own = evaluate_resubstitution(
        &m,
        &train,
        &SplitSpec::from_train(train.ids(), &train).unwrap(),
        EvalMode::Multilabel,
    )
    .unwrap();
    assert_eq!(own.metrics.correct, train.len() as u64);
    assert!(full.metrics.correct >= train.len() as u64);
    assert_eq!(full.metrics.total, ds.len() as u64);
}

#[test]
fn prior_predictor_scores_one_hundred_percent() {
    let actual = [0, 1, 2, 1, 1];
    let prior = vec![0.2, 0.6, 0.2];
    let e = probabilistic_errors(&vec![prior.clone(); 5], &actual, &prior).unwrap();
    assert!((e.rae.unwrap() - 100.0).abs() < 1e-12);
    assert!((e.rrse.unwrap() - 100.0).abs() < 1e-12);
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

/// Compares against the stored file; `UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(
        actual, expected,
        "{name} drifted; rerun with UPDATE_GOLDEN=1 if intended"
    );
}

#[test]
fn report_matches_golden_files() {
    let (ds, _) = generate_synthetic(&corpus(7)).unwrap();
    let split = cover_all_labels_split(&ds, 24, 7).unwrap();
    let train = ds.subset(&split.train_ids);
    let m = train_chidt(
        &train,
        &CascadeConfig::default(),
        ValidCombinationRegistry::observed(&train),
        vec![],
    )
    .unwrap();
    let principal = evaluate_resubstitution(&m, &ds, &split, EvalMode::Principal).unwrap();
    let multilabel = evaluate_resubstitution(&m, &ds, &split, EvalMode::Multilabel).unwrap();
    check_golden("resubstitution_principal.txt", &format_report(&principal));
    check_golden("resubstitution_multilabel.txt", &format_report(&multilabel));
    check_golden("resubstitution_multilabel.json", &multilabel.to_json().unwrap());
}
