use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::CodeHierarchy;
use crate::dataset::{Dataset, LabelSet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Seen on a training record.
    Observed,
    /// Supplied by configuration.
    Declared,
}

/// Outcome of a validity check. Anything but [`Verdict::Ok`] is a known error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Ok,
    Empty,
    Unregistered,
    ExclusionViolated,
}

impl Verdict {
    pub fn is_ok(self) -> bool {
        self == Verdict::Ok
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Ok => "ok",
            Verdict::Empty => "empty",
            Verdict::Unregistered => "unregistered",
            Verdict::ExclusionViolated => "exclusion-violated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Entry {
    codes: LabelSet,
    provenance: Provenance,
}

/// The set of code combinations considered possible.
///
/// Never contains the empty set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidCombinationRegistry {
    entries: BTreeMap<LabelSet, Provenance>,
}

impl ValidCombinationRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Distinct non-empty label sets carried by records of `ds`.
    pub fn observed(ds: &Dataset) -> Self {
        let mut reg = Self::new();
        for r in ds.records().iter().filter(|r| !r.labels.is_empty()) {
            reg.entries.entry(r.labels.clone()).or_insert(Provenance::Observed);
        }
        reg
    }

    /// Adds a configured combination. An already-observed entry keeps its provenance.
    pub fn declare(&mut self, codes: LabelSet) -> Result<()> {
        if codes.is_empty() {
            return Err(Error::InvalidArgument(
                "the empty combination cannot be registered".into(),
            ));
        }
        self.entries.entry(codes).or_insert(Provenance::Declared);
        Ok(())
    }

    pub fn contains(&self, codes: &LabelSet) -> bool {
        self.entries.contains_key(codes)
    }

    pub fn provenance(&self, codes: &LabelSet) -> Option<Provenance> {
        self.entries.get(codes).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn combinations(&self) -> impl Iterator<Item = &LabelSet> {
        self.entries.keys()
    }

    /// Merges `other` in; observed provenance wins over declared.
    pub fn extend(&mut self, other: &ValidCombinationRegistry) {
        for (codes, prov) in &other.entries {
            let slot = self.entries.entry(codes.clone()).or_insert(*prov);
            if *prov == Provenance::Observed {
                *slot = Provenance::Observed;
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(content: &str) -> Result<Self> {
        Ok(serde_json::from_str(content)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryDocument {
    combinations: Vec<Entry>,
}

impl Serialize for ValidCombinationRegistry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RegistryDocument {
            combinations: self
                .entries
                .iter()
                .map(|(codes, provenance)| Entry {
                    codes: codes.clone(),
                    provenance: *provenance,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ValidCombinationRegistry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = RegistryDocument::deserialize(d)?;
        let mut entries = BTreeMap::new();
        for e in doc.combinations {
            if e.codes.is_empty() {
                return Err(serde::de::Error::custom("registry contains the empty combination"));
            }
            entries.insert(e.codes, e.provenance);
        }
        Ok(ValidCombinationRegistry { entries })
    }
}

/// Codes that may not be assigned together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeSet<String>", into = "BTreeSet<String>")]
pub struct ExclusionGroup(BTreeSet<String>);

impl ExclusionGroup {
    pub fn new<S: Into<String>>(codes: impl IntoIterator<Item = S>) -> Result<Self> {
        let codes: BTreeSet<String> = codes.into_iter().map(Into::into).collect();
        if codes.len() < 2 {
            return Err(Error::InvalidArgument(
                "an exclusion group needs at least two codes".into(),
            ));
        }
        Ok(ExclusionGroup(codes))
    }

    /// Like [`ExclusionGroup::new`], additionally requiring every code to exist in `hierarchy`.
    pub fn in_hierarchy<S: Into<String>>(
        codes: impl IntoIterator<Item = S>,
        hierarchy: &CodeHierarchy,
    ) -> Result<Self> {
        let g = Self::new(codes)?;
        if let Some(c) = g.0.iter().find(|c| !hierarchy.contains(c)) {
            return Err(Error::UnknownCode(c.clone()));
        }
        Ok(g)
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// True when `ls` carries two or more codes of this group.
    pub fn violated_by(&self, ls: &LabelSet) -> bool {
        self.0.iter().filter(|c| ls.contains(c)).count() >= 2
    }
}

impl TryFrom<BTreeSet<String>> for ExclusionGroup {
    type Error = Error;

    fn try_from(codes: BTreeSet<String>) -> Result<Self> {
        ExclusionGroup::new(codes)
    }
}

impl From<ExclusionGroup> for BTreeSet<String> {
    fn from(g: ExclusionGroup) -> Self {
        g.0
    }
}

/// Parses an exclusion file (a JSON array of code arrays) and checks every
/// code against `hierarchy`.
pub fn load_exclusions(content: &str, hierarchy: &CodeHierarchy) -> Result<Vec<ExclusionGroup>> {
    let raw: Vec<Vec<String>> = serde_json::from_str(content)?;
    raw.into_iter()
        .map(|g| ExclusionGroup::in_hierarchy(g, hierarchy))
        .collect()
}

/// Checks a predicted combination: empty, then exclusion groups, then registry membership.
pub fn is_valid(registry: &ValidCombinationRegistry, exclusions: &[ExclusionGroup], ls: &LabelSet) -> Verdict {
    if ls.is_empty() {
        Verdict::Empty
    } else if exclusions.iter().any(|g| g.violated_by(ls)) {
        Verdict::ExclusionViolated
    } else if !registry.contains(ls) {
        Verdict::Unregistered
    } else {
        Verdict::Ok
    }
}
