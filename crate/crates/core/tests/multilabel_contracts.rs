use std::collections::BTreeSet;

use chidt::c45::C45Params;
use chidt::dataset::{
    generate_synthetic, Attribute, Dataset, FeatureVector, GeneratorConfig, LabelSet, Profile, Record, Value,
};
use chidt::multilabel::{
    train_br, train_chidt, train_label_powerset, trigger_rate, CascadeConfig, ChiDtModel, Stage2, Strategy,
};
use chidt::ontology::{ValidCombinationRegistry, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lattice() -> Vec<FeatureVector> {
    (0..16)
        .map(|i| FeatureVector::new((0..4).map(|b| Value::Nominal((i >> b) & 1)).collect()))
        .collect()
}

/// Four binary features; codes follow noisy rules so stage 1 makes some known errors.
fn toy(seed: u64, n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let combos: [&[&str]; 4] = [&["a"], &["a", "b"], &["c"], &["b", "d"]];
    let records = (0..n)
        .map(|i| {
            let bits: Vec<usize> = (0..4).map(|_| rng.gen_range(0..2)).collect();
            let pick = if rng.gen_bool(0.8) {
                (bits[0] + 2 * bits[1]) % 4
            } else {
                rng.gen_range(0..4)
            };
            Record::new(
                format!("t{i}"),
                FeatureVector::new(bits.iter().map(|b| Value::Nominal(*b)).collect()),
                combos[pick].iter().copied().collect(),
            )
        })
        .collect();
    Dataset::new(
        (0..4).map(|b| Attribute::binary(format!("x{b}"))).collect(),
        ["a", "b", "c", "d"].map(String::from).to_vec(),
        records,
    )
    .unwrap()
}

#[test]
fn br_is_the_per_tree_composition() {
    let ds = toy(1, 80);
    let m = train_br(&ds, &C45Params::default()).unwrap();
    assert_eq!(m.trees.len(), 4);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        let x = FeatureVector::new((0..4).map(|_| Value::Nominal(rng.gen_range(0..2))).collect());
        let want: LabelSet = m
            .codes
            .iter()
            .zip(&m.trees)
            .filter(|(_, t)| {
                let p = t.predict_distribution(&x).unwrap();
                // argmax sends a 0.5/0.5 tie to class 0, the threshold rule includes it
                t.predict(&x).unwrap() == 1 || p.weights()[1] == 0.5
            })
            .map(|(c, _)| c.as_str())
            .collect();
        assert_eq!(m.predict(&x).unwrap(), want);
    }
}

#[test]
fn eleven_codes_eleven_trees() {
    let codes = [
        "I20.0", "I20.9", "I21.0", "I21.1", "I21.4", "I21.9", "I24.8", "I25.1", "I25.2", "I25.5", "I25.9",
    ];
    let profiles = codes
        .iter()
        .enumerate()
        .map(|(i, c)| Profile::new([*c], (0..11).map(|j| if i == j { 0.9 } else { 0.1 }).collect()))
        .collect();
    let cfg = GeneratorConfig {
        profiles,
        n_records: 110,
        noise_rate: 0.0,
        seed: 4,
        feature_names: None,
    };
    let (ds, _) = generate_synthetic(&cfg).unwrap();
    let m = train_br(&ds, &C45Params::default()).unwrap();
    assert_eq!(m.trees.len(), 11);
}

#[test]
fn label_powerset_only_predicts_observed_combinations() {
    for seed in 0..5 {
        let ds = toy(seed, 60);
        let m = train_label_powerset(&ds, &C45Params::unpruned()).unwrap();
        let observed = ValidCombinationRegistry::observed(&ds);
        for x in lattice() {
            assert!(observed.contains(&m.predict(&x).unwrap()));
        }
    }
}

#[test]
fn three_profiles_three_classes() {
    let cfg = GeneratorConfig {
        profiles: vec![
            Profile::new(["a"], vec![0.9, 0.1]),
            Profile::new(["a", "b"], vec![0.1, 0.9]),
            Profile::new(["c"], vec![0.5, 0.5]),
        ],
        n_records: 90,
        noise_rate: 0.0,
        seed: 8,
        feature_names: None,
    };
    let (ds, _) = generate_synthetic(&cfg).unwrap();
    let m = train_label_powerset(&ds, &C45Params::default()).unwrap();
    assert_eq!(m.tree.classes, vec!["a", "a;b", "c"]);
}

#[test]
fn cascade_contract_on_the_lattice() {
    for strategy in [Strategy::DiverseBr, Strategy::LabelPowerset] {
        for seed in 0..5 {
            let ds = toy(seed, 60);
            let registry = ValidCombinationRegistry::observed(&ds);
            let cfg = CascadeConfig {
                strategy,
                ..CascadeConfig::default()
            };
            let m = train_chidt(&ds, &cfg, registry.clone(), vec![]).unwrap();
            for x in lattice() {
                let before = m.stage2_evaluations();
                let out = m.predict(&x).unwrap();
                let s1 = m.stage1.predict(&x).unwrap();
                assert_eq!(out.trace.stage1_output, s1);
                assert_eq!(out.trace.triggered, out.trace.reason != Verdict::Ok);
                if out.trace.triggered {
                    let (raw, _) = m.stage2.predict_scored(&x).unwrap();
                    assert_eq!(out.labels, raw);
                    assert_eq!(m.stage2_evaluations(), before + 1);
                    if strategy == Strategy::LabelPowerset {
                        assert!(registry.contains(&out.labels));
                    }
                } else {
                    assert_eq!(out.labels, s1);
                    assert_eq!(m.stage2_evaluations(), before);
                }
            }
        }
    }
}

#[test]
fn trigger_rate_is_mean_of_traces() {
    let ds = toy(9, 70);
    let m = train_chidt(
        &ds,
        &CascadeConfig::default(),
        ValidCombinationRegistry::observed(&ds),
        vec![],
    )
    .unwrap();
    let triggered = ds.records().iter().fold(0usize, |acc, r| {
        acc + usize::from(m.predict(&r.features).unwrap().trace.triggered)
    });
    assert_eq!(trigger_rate(&m, &ds).unwrap(), triggered as f64 / 70.0);
}

#[test]
fn constant_empty_stage1_always_triggers() {
    let records = (0..6)
        .map(|i| {
            Record::new(
                format!("r{i}"),
                FeatureVector::new(vec![Value::Nominal(i % 2)]),
                LabelSet::new(),
            )
        })
        .collect();
    let ds = Dataset::new(vec![Attribute::binary("x")], vec!["a".into()], records).unwrap();
    let m = train_chidt(&ds, &CascadeConfig::default(), ValidCombinationRegistry::new(), vec![]).unwrap();
    assert_eq!(trigger_rate(&m, &ds).unwrap(), 1.0);
}

#[test]
fn every_stage1_output_registered_never_triggers() {
    let ds = toy(12, 60);
    let m = train_chidt(&ds, &CascadeConfig::default(), ValidCombinationRegistry::new(), vec![]).unwrap();
    // the empty set can never be registered, so only records with a non-empty stage-1 output qualify
    let kept: BTreeSet<String> = ds
        .records()
        .iter()
        .filter(|r| !m.stage1.predict(&r.features).unwrap().is_empty())
        .map(|r| r.id.clone())
        .collect();
    let ds = ds.subset(&kept);
    assert!(!ds.is_empty());
    let mut registry = ValidCombinationRegistry::new();
    for r in ds.records() {
        registry.declare(m.stage1.predict(&r.features).unwrap()).unwrap();
    }
    let mut m = m;
    m.registry = registry;
    assert_eq!(trigger_rate(&m, &ds).unwrap(), 0.0);
}

#[test]
fn both_stages_record_the_same_training_ids() {
    let ds = toy(5, 40);
    for strategy in [Strategy::DiverseBr, Strategy::LabelPowerset] {
        let cfg = CascadeConfig {
            strategy,
            ..CascadeConfig::default()
        };
        let m = train_chidt(&ds, &cfg, ValidCombinationRegistry::observed(&ds), vec![]).unwrap();
        assert_eq!(m.stage1.summary.training_ids, ds.ids());
        match &m.stage2 {
            Stage2::Br(b) => assert_eq!(b.summary.training_ids, ds.ids()),
            Stage2::Lp(l) => assert_eq!(l.training_ids, ds.ids()),
        }
        assert_eq!(matches!(m.stage2, Stage2::Lp(_)), strategy == Strategy::LabelPowerset);
    }
}

#[test]
fn serialized_model_is_deterministic() {
    let ds = toy(6, 90);
    let reg = ValidCombinationRegistry::observed(&ds);
    let seq = train_chidt(&ds, &CascadeConfig::default(), reg.clone(), vec![]).unwrap();
    let parallel_params = C45Params {
        parallel: true,
        ..C45Params::default()
    };
    let cfg = CascadeConfig {
        stage1: parallel_params,
        stage2: Some(C45Params {
            parallel: true,
            ..C45Params::unpruned()
        }),
        ..CascadeConfig::default()
    };
    let par = train_chidt(&ds, &cfg, reg, vec![]).unwrap();
    assert_eq!(seq.to_json().unwrap(), par.to_json().unwrap());
    let reloaded = ChiDtModel::from_json(&seq.to_json().unwrap()).unwrap();
    assert_eq!(reloaded.to_json().unwrap(), seq.to_json().unwrap());
}

#[test]
fn model_refuses_foreign_vectors() {
    let ds = toy(7, 30);
    let m = train_chidt(
        &ds,
        &CascadeConfig::default(),
        ValidCombinationRegistry::observed(&ds),
        vec![],
    )
    .unwrap();
    assert!(m.predict(&FeatureVector::new(vec![Value::Nominal(0)])).is_err());
    assert!(m.predict(&FeatureVector::new(vec![Value::Nominal(2); 4])).is_err());
}
