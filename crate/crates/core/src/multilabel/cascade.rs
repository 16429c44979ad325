use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::{train_br, train_label_powerset, BrModel, CodePredictor, LpModel, ScoredPrediction, TrainingSummary};
use crate::c45::C45Params;
use crate::dataset::{Attribute, Dataset, FeatureVector, LabelSet};
use crate::ontology::{is_valid, ExclusionGroup, ValidCombinationRegistry, Verdict};
use crate::{Error, Result};

/// How the second stage is built.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Another binary-relevance model with different induction parameters
    /// (unpruned, one case per leaf unless overridden).
    #[default]
    DiverseBr,
    /// One tree over the observed code combinations.
    LabelPowerset,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::DiverseBr => "diverse-br",
            Strategy::LabelPowerset => "label-powerset",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diverse-br" => Ok(Strategy::DiverseBr),
            "label-powerset" => Ok(Strategy::LabelPowerset),
            other => Err(Error::InvalidArgument(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage2 {
    Br(BrModel),
    Lp(LpModel),
}

impl Stage2 {
    fn training_ids(&self) -> &BTreeSet<String> {
        match self {
            Stage2::Br(m) => &m.summary.training_ids,
            Stage2::Lp(m) => &m.training_ids,
        }
    }

    fn attributes(&self) -> &[Attribute] {
        match self {
            Stage2::Br(m) => m.attributes(),
            Stage2::Lp(m) => &m.tree.attributes,
        }
    }

    /// Raw stage-2 prediction and its per-code probabilities.
    pub fn predict_scored(&self, x: &FeatureVector) -> Result<(LabelSet, Vec<f64>)> {
        match self {
            Stage2::Br(m) => {
                let p = m.probabilities(x)?;
                Ok((m.labels_from(&p), p))
            }
            Stage2::Lp(m) => m.predict_scored(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CascadeConfig {
    pub strategy: Strategy,
    pub stage1: C45Params,
    /// Stage-2 parameters; `None` picks the strategy default.
    pub stage2: Option<C45Params>,
    /// Decision threshold of every binary-relevance stage.
    pub threshold: f64,
    /// Replace an invalid stage-2 output by its single most probable code.
    pub fallback: bool,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig {
            strategy: Strategy::DiverseBr,
            stage1: C45Params::default(),
            stage2: None,
            threshold: 0.5,
            fallback: false,
        }
    }
}

impl CascadeConfig {
    pub fn stage2_params(&self) -> C45Params {
        self.stage2.clone().unwrap_or_else(|| match self.strategy {
            Strategy::DiverseBr => C45Params::unpruned(),
            Strategy::LabelPowerset => C45Params::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "threshold {} outside (0, 1]",
                self.threshold
            )));
        }
        self.stage1.validate()?;
        self.stage2_params().validate()
    }
}

/// What happened to one prediction inside the cascade.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeTrace {
    pub triggered: bool,
    pub reason: Verdict,
    pub stage1_output: LabelSet,
    pub final_output: LabelSet,
    /// Set only when the optional fallback replaced the stage-2 output.
    pub fallback_applied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutcome {
    pub labels: LabelSet,
    /// Per-code probabilities of the stage that produced `labels`.
    pub probabilities: Vec<f64>,
    pub trace: CascadeTrace,
}

/// Two-stage cascade: a binary-relevance stage 1 whose known errors are
/// answered by stage 2.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiDtModel {
    pub strategy: Strategy,
    pub schema: Vec<Attribute>,
    pub schema_fingerprint: String,
    pub training_ids: BTreeSet<String>,
    pub registry: ValidCombinationRegistry,
    pub exclusions: Vec<ExclusionGroup>,
    pub fallback: bool,
    pub stage1: BrModel,
    pub stage2: Stage2,
    #[serde(skip)]
    stage2_calls: AtomicU64,
}

impl Clone for ChiDtModel {
    fn clone(&self) -> Self {
        ChiDtModel {
            strategy: self.strategy,
            schema: self.schema.clone(),
            schema_fingerprint: self.schema_fingerprint.clone(),
            training_ids: self.training_ids.clone(),
            registry: self.registry.clone(),
            exclusions: self.exclusions.clone(),
            fallback: self.fallback,
            stage1: self.stage1.clone(),
            stage2: self.stage2.clone(),
            stage2_calls: AtomicU64::new(0),
        }
    }
}

/// FNV-1a over the attribute names and kinds; identifies a schema in model files.
pub(crate) fn schema_fingerprint(attributes: &[Attribute]) -> String {
    let text = serde_json::to_string(attributes).expect("attributes serialize");
    let hash = text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    });
    format!("{hash:016x}")
}

/// Trains both stages on every record of `ds`.
pub fn train_chidt(
    ds: &Dataset,
    config: &CascadeConfig,
    registry: ValidCombinationRegistry,
    exclusions: Vec<ExclusionGroup>,
) -> Result<ChiDtModel> {
    config.validate()?;
    let stage1 = train_br(ds, &config.stage1)?.with_threshold(config.threshold);
    let stage2_params = config.stage2_params();
    let stage2 = match config.strategy {
        Strategy::DiverseBr => Stage2::Br(train_br(ds, &stage2_params)?.with_threshold(config.threshold)),
        Strategy::LabelPowerset => Stage2::Lp(train_label_powerset(ds, &stage2_params)?),
    };
    Ok(ChiDtModel {
        strategy: config.strategy,
        schema: ds.attributes().to_vec(),
        schema_fingerprint: schema_fingerprint(ds.attributes()),
        training_ids: ds.ids(),
        registry,
        exclusions,
        fallback: config.fallback,
        stage1,
        stage2,
        stage2_calls: AtomicU64::new(0),
    })
}

impl ChiDtModel {
    pub fn predict(&self, x: &FeatureVector) -> Result<CascadeOutcome> {
        x.check(&self.schema)?;
        let p1 = self.stage1.probabilities(x)?;
        let s1 = self.stage1.labels_from(&p1);
        let reason = is_valid(&self.registry, &self.exclusions, &s1);
        if reason.is_ok() {
            return Ok(CascadeOutcome {
                labels: s1.clone(),
                probabilities: p1,
                trace: CascadeTrace {
                    triggered: false,
                    reason,
                    stage1_output: s1.clone(),
                    final_output: s1,
                    fallback_applied: false,
                },
            });
        }
        self.stage2_calls.fetch_add(1, Ordering::Relaxed);
        let (mut labels, probabilities) = self.stage2.predict_scored(x)?;
        let mut fallback_applied = false;
        if self.fallback && !is_valid(&self.registry, &self.exclusions, &labels).is_ok() {
            let best = crate::c45::argmax(&probabilities);
            labels = LabelSet::from_iter([self.stage1.codes[best].as_str()]);
            fallback_applied = true;
        }
        Ok(CascadeOutcome {
            labels: labels.clone(),
            probabilities,
            trace: CascadeTrace {
                triggered: true,
                reason,
                stage1_output: s1,
                final_output: labels,
                fallback_applied,
            },
        })
    }

    /// Number of stage-2 predictions made since the model was built or loaded.
    pub fn stage2_evaluations(&self) -> u64 {
        self.stage2_calls.load(Ordering::Relaxed)
    }

    pub fn reset_stage2_evaluations(&self) {
        self.stage2_calls.store(0, Ordering::Relaxed);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(content: &str) -> Result<ChiDtModel> {
        let m: ChiDtModel = serde_json::from_str(content)?;
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if schema_fingerprint(&self.schema) != self.schema_fingerprint {
            return Err(Error::SchemaMismatch(
                "schema fingerprint does not match the stored schema".into(),
            ));
        }
        self.stage1.validate()?;
        match &self.stage2 {
            Stage2::Br(m) => m.validate()?,
            Stage2::Lp(m) => m.validate()?,
        }
        let stage2_matches = matches!(
            (&self.stage2, self.strategy),
            (Stage2::Br(_), Strategy::DiverseBr) | (Stage2::Lp(_), Strategy::LabelPowerset)
        );
        if !stage2_matches {
            return Err(Error::SchemaMismatch("stage 2 does not match the strategy".into()));
        }
        if self.stage1.attributes() != self.schema.as_slice() || self.stage2.attributes() != self.schema.as_slice() {
            return Err(Error::SchemaMismatch(
                "a stage was trained on a different schema".into(),
            ));
        }
        if self.stage1.summary.training_ids != self.training_ids || *self.stage2.training_ids() != self.training_ids {
            return Err(Error::InvalidArgument(
                "stages were not trained on the same records".into(),
            ));
        }
        Ok(())
    }
}

impl CodePredictor for ChiDtModel {
    fn name(&self) -> String {
        format!("chidt/{}", self.strategy.as_str())
    }

    fn summary(&self) -> &TrainingSummary {
        &self.stage1.summary
    }

    fn predict_scored(&self, x: &FeatureVector) -> Result<ScoredPrediction> {
        let out = self.predict(x)?;
        Ok(ScoredPrediction {
            labels: out.labels,
            probabilities: out.probabilities,
            triggered: Some(out.trace.triggered),
        })
    }
}

/// Fraction of the records of `ds` on which stage 1 makes a known error.
pub fn trigger_rate(m: &ChiDtModel, ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Ok(0.0);
    }
    let mut triggered = 0usize;
    for r in ds.records() {
        triggered += usize::from(m.predict(&r.features)?.trace.triggered);
    }
    Ok(triggered as f64 / ds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Record, Value};

    fn bits(i: usize) -> FeatureVector {
        FeatureVector::new(vec![Value::Nominal(i & 1), Value::Nominal((i >> 1) & 1)])
    }

    // a follows bit 0, c follows bit 1, b only when both are set
    fn toy() -> Dataset {
        let mut records = Vec::new();
        for rep in 0..3 {
            for i in 0..4 {
                let mut ls = LabelSet::new();
                if i & 1 == 1 {
                    ls.insert("a");
                }
                if i & 2 == 2 {
                    ls.insert("c");
                }
                records.push(Record::new(format!("r{rep}{i}"), bits(i), ls));
            }
        }
        Dataset::new(
            vec![Attribute::binary("x0"), Attribute::binary("x1")],
            vec!["a".into(), "b".into(), "c".into()],
            records,
        )
        .unwrap()
    }

    fn registry(sets: &[&[&str]]) -> ValidCombinationRegistry {
        let mut r = ValidCombinationRegistry::new();
        for s in sets {
            r.declare(s.iter().copied().collect()).unwrap();
        }
        r
    }

    #[test]
    fn registered_output_bypasses_stage2() {
        let m = train_chidt(
            &toy(),
            &CascadeConfig::default(),
            registry(&[&["a"], &["a", "b"]]),
            vec![],
        )
        .unwrap();
        let out = m.predict(&bits(1)).unwrap();
        assert!(!out.trace.triggered);
        assert_eq!(out.trace.reason, Verdict::Ok);
        assert_eq!(out.labels, LabelSet::from_iter(["a"]));
        assert_eq!(m.stage2_evaluations(), 0);
    }

    #[test]
    fn empty_and_unregistered_trigger() {
        let m = train_chidt(
            &toy(),
            &CascadeConfig::default(),
            registry(&[&["a"], &["a", "b"]]),
            vec![],
        )
        .unwrap();
        let empty = m.predict(&bits(0)).unwrap();
        assert_eq!(empty.trace.reason, Verdict::Empty);
        let both = m.predict(&bits(3)).unwrap();
        assert_eq!(both.trace.stage1_output, LabelSet::from_iter(["a", "c"]));
        assert_eq!(both.trace.reason, Verdict::Unregistered);
        assert!(both.trace.triggered);
        // stage 2 output returned as is, even though it is unregistered too
        let (raw, _) = m.stage2.predict_scored(&bits(3)).unwrap();
        assert_eq!(both.labels, raw);
        assert_eq!(m.stage2_evaluations(), 2);
    }

    #[test]
    fn exclusion_triggers() {
        let excl = vec![ExclusionGroup::new(["a", "c"]).unwrap()];
        let m = train_chidt(&toy(), &CascadeConfig::default(), registry(&[&["a", "c"]]), excl).unwrap();
        assert_eq!(m.predict(&bits(3)).unwrap().trace.reason, Verdict::ExclusionViolated);
    }

    #[test]
    fn fallback_picks_one_code() {
        let cfg = CascadeConfig {
            fallback: true,
            ..CascadeConfig::default()
        };
        let m = train_chidt(&toy(), &cfg, registry(&[&["b"]]), vec![]).unwrap();
        let out = m.predict(&bits(3)).unwrap();
        assert!(out.trace.fallback_applied);
        assert_eq!(out.labels.len(), 1);
    }

    #[test]
    fn default_stages_differ_in_params() {
        let m = train_chidt(&toy(), &CascadeConfig::default(), registry(&[&["a"]]), vec![]).unwrap();
        assert!(m.stage1.params.pruning);
        let Stage2::Br(s2) = &m.stage2 else {
            panic!("diverse-br builds a BR stage 2")
        };
        assert!(!s2.params.pruning);
        assert_eq!(s2.params.min_leaf, 1);
        assert_eq!(m.stage1.summary.training_ids, s2.summary.training_ids);
    }

    #[test]
    fn trigger_rate_extremes() {
        let ds = toy();
        let all = registry(&[&["a"], &["c"], &["a", "c"]]);
        let m = train_chidt(&ds, &CascadeConfig::default(), all, vec![]).unwrap();
        // only the all-zero input predicts {}
        assert_eq!(trigger_rate(&m, &ds).unwrap(), 0.25);
        let none = Dataset::new(ds.attributes().to_vec(), ds.alphabet().to_vec(), vec![]).unwrap();
        assert_eq!(trigger_rate(&m, &none).unwrap(), 0.0);
    }

    #[test]
    fn json_round_trip_and_checks() {
        let ds = toy();
        let m = train_chidt(
            &ds,
            &CascadeConfig::default(),
            ValidCombinationRegistry::observed(&ds),
            vec![],
        )
        .unwrap();
        let json = m.to_json().unwrap();
        let back = ChiDtModel::from_json(&json).unwrap();
        assert_eq!(back.to_json().unwrap(), json);
        let tampered = json.replacen(&m.schema_fingerprint, "0000000000000000", 1);
        assert!(matches!(
            ChiDtModel::from_json(&tampered),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn strategy_parse() {
        assert_eq!("label-powerset".parse::<Strategy>().unwrap(), Strategy::LabelPowerset);
        assert!("lp".parse::<Strategy>().is_err());
    }
}
