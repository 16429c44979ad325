use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{Error, Result};

/// A train/test partition of a dataset's record ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_ids: BTreeSet<String>,
    pub test_ids: BTreeSet<String>,
}

impl SplitSpec {
    /// Checks that the sides are disjoint and together cover `ds` exactly.
    pub fn new(train_ids: BTreeSet<String>, test_ids: BTreeSet<String>, ds: &Dataset) -> Result<Self> {
        if let Some(id) = train_ids.intersection(&test_ids).next() {
            return Err(Error::InvalidArgument(format!(
                "record `{id}` is on both sides of the split"
            )));
        }
        let all = ds.ids();
        let union: BTreeSet<String> = train_ids.union(&test_ids).cloned().collect();
        if union != all {
            return Err(Error::InvalidArgument(
                "split does not cover the dataset exactly".into(),
            ));
        }
        Ok(SplitSpec { train_ids, test_ids })
    }

    /// Training side is `train_ids`, everything else in `ds` is test.
    pub fn from_train(train_ids: BTreeSet<String>, ds: &Dataset) -> Result<Self> {
        let test = ds.ids().difference(&train_ids).cloned().collect();
        SplitSpec::new(train_ids, test, ds)
    }
}

/// Chooses `train_size` records so that every code carried by some record
/// appears on the training side at least once.
///
/// Codes are visited in alphabet order; for each code not yet covered, one
/// record carrying it is drawn uniformly. Remaining slots are filled by a
/// seeded uniform draw from the records left over.
pub fn cover_all_labels_split(ds: &Dataset, train_size: usize, seed: u64) -> Result<SplitSpec> {
    let present = ds.present_labels();
    if train_size < present.len() {
        return Err(Error::InvalidArgument(format!(
            "train size {train_size} cannot cover {} distinct codes",
            present.len()
        )));
    }
    if train_size > ds.len() {
        return Err(Error::InvalidArgument(format!(
            "train size {train_size} exceeds the {} records available",
            ds.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![false; ds.len()];
    for code in present {
        let covered = ds
            .records()
            .iter()
            .zip(&chosen)
            .any(|(r, &c)| c && r.labels.contains(code));
        if covered {
            continue;
        }
        let candidates: Vec<usize> = ds
            .records()
            .iter()
            .enumerate()
            .filter(|(i, r)| !chosen[*i] && r.labels.contains(code))
            .map(|(i, _)| i)
            .collect();
        let pick = *candidates.choose(&mut rng).expect("present code has a carrier");
        chosen[pick] = true;
    }
    let forced = chosen.iter().filter(|c| **c).count();
    let mut rest: Vec<usize> = (0..ds.len()).filter(|i| !chosen[*i]).collect();
    rest.shuffle(&mut rng);
    for i in rest.into_iter().take(train_size - forced) {
        chosen[i] = true;
    }
    let (train, test): (Vec<_>, Vec<_>) = ds.records().iter().zip(&chosen).partition(|(_, c)| **c);
    Ok(SplitSpec {
        train_ids: train.into_iter().map(|(r, _)| r.id.clone()).collect(),
        test_ids: test.into_iter().map(|(r, _)| r.id.clone()).collect(),
    })
}
