//! Seeded synthetic corpus generator.
//!
//! Each record picks one of a fixed set of label *profiles* (a complete code
//! combination plus per-feature presence rates), so label co-occurrence is
//! structured the way real discharge summaries are rather than independent.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::csv_io::positional_id;
use super::{Attribute, CodeRole, Dataset, FeatureVector, LabelSet, Record, Value};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub labels: LabelSet,
    /// Bernoulli presence rate of each binary feature.
    pub rates: Vec<f64>,
    /// Code tagged PDx on generated records; other codes are tagged SDx.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub principal: Option<String>,
}

impl Profile {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>, rates: Vec<f64>) -> Self {
        Profile {
            labels: labels.into_iter().collect(),
            rates,
            principal: None,
        }
    }

    pub fn with_principal(mut self, code: impl Into<String>) -> Self {
        self.principal = Some(code.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub profiles: Vec<Profile>,
    pub n_records: usize,
    pub noise_rate: f64,
    /// Optional in files; callers driving a seeded run overwrite it.
    #[serde(default)]
    pub seed: u64,
    /// Feature names; defaults to `f1`, `f2`, ...
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_names: Option<Vec<String>>,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let first = self.profiles.first().ok_or(Error::Empty("generator profile list"))?;
        let width = first.rates.len();
        if self.n_records == 0 {
            return Err(Error::InvalidArgument("n_records must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::InvalidArgument(format!(
                "noise rate {} outside [0,1]",
                self.noise_rate
            )));
        }
        for (i, p) in self.profiles.iter().enumerate() {
            if p.labels.is_empty() {
                return Err(Error::InvalidArgument(format!("profile {i} has an empty label set")));
            }
            if p.rates.len() != width {
                return Err(Error::InvalidArgument(format!(
                    "profile {i} has {} rates, expected {width}",
                    p.rates.len()
                )));
            }
            if let Some(r) = p.rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
                return Err(Error::InvalidArgument(format!(
                    "profile {i} has rate {r} outside [0,1]"
                )));
            }
            if let Some(pdx) = &p.principal {
                if !p.labels.contains(pdx) {
                    return Err(Error::InvalidArgument(format!(
                        "profile {i} principal `{pdx}` is not one of its codes"
                    )));
                }
            }
        }
        if let Some(names) = &self.feature_names {
            if names.len() != width {
                return Err(Error::InvalidArgument(format!(
                    "{} feature names for {width} features",
                    names.len()
                )));
            }
        }
        Ok(())
    }
}

/// Draws a corpus from `cfg`. Returns the dataset and the profile label sets,
/// which are the combinations the corpus can contain.
pub fn generate_synthetic(cfg: &GeneratorConfig) -> Result<(Dataset, Vec<LabelSet>)> {
    cfg.validate()?;
    let width = cfg.profiles[0].rates.len();
    let attributes: Vec<Attribute> = match &cfg.feature_names {
        Some(names) => names.iter().map(|n| Attribute::binary(n.clone())).collect(),
        None => (1..=width).map(|i| Attribute::binary(format!("f{i}"))).collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::with_capacity(cfg.n_records);
    for i in 0..cfg.n_records {
        let profile = &cfg.profiles[rng.gen_range(0..cfg.profiles.len())];
        let features = profile
            .rates
            .iter()
            .map(|&rate| {
                let present = rng.gen::<f64>() < rate;
                let flip = rng.gen::<f64>() < cfg.noise_rate;
                Value::Nominal(usize::from(present ^ flip))
            })
            .collect();
        let mut record = Record::new(positional_id(i), FeatureVector::new(features), profile.labels.clone());
        if let Some(pdx) = &profile.principal {
            for code in profile.labels.iter() {
                let role = if code == pdx {
                    CodeRole::Principal
                } else {
                    CodeRole::Secondary
                };
                record.roles.insert(code.to_owned(), role);
            }
        }
        records.push(record);
    }
    let alphabet: BTreeSet<String> = cfg
        .profiles
        .iter()
        .flat_map(|p| p.labels.iter().map(str::to_owned))
        .collect();
    let ds = Dataset::new(attributes, alphabet.into_iter().collect(), records)?;
    Ok((ds, cfg.profiles.iter().map(|p| p.labels.clone()).collect()))
}
