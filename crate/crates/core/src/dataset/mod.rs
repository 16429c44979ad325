//! Clinical-coding records and the corpora built from them.
//!
//! A [`Dataset`] is an attribute schema, an ordered label alphabet (the
//! diagnosis codes that may appear) and a list of [`Record`]s. Datasets are
//! validated on construction and immutable afterwards.

mod arff;
mod csv_io;
mod split;
mod synth;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use arff::{load_arff_subset, to_arff};
pub use csv_io::{load_csv, read_records_csv, to_csv, CsvOptions};
pub use split::{cover_all_labels_split, SplitSpec};
pub use synth::{generate_synthetic, GeneratorConfig, Profile};

/// Default separator between codes inside a label cell.
pub const LABEL_SEPARATOR: char = ';';

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Numeric,
    /// Nominal attribute with its ordered value list.
    Nominal(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

impl Attribute {
    pub fn numeric(name: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Numeric,
        }
    }

    pub fn nominal<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Nominal(values.into_iter().map(Into::into).collect()),
        }
    }

    /// A nominal `{0,1}` indicator attribute.
    pub fn binary(name: impl Into<String>) -> Self {
        Self::nominal(name, ["0", "1"])
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, AttributeKind::Numeric)
    }

    /// Value list of a nominal attribute, `None` for numerics.
    pub fn values(&self) -> Option<&[String]> {
        match &self.kind {
            AttributeKind::Nominal(v) => Some(v),
            AttributeKind::Numeric => None,
        }
    }

    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.values()?.iter().position(|v| v == value)
    }

    fn validate(&self) -> Result<()> {
        if let AttributeKind::Nominal(values) = &self.kind {
            if values.is_empty() {
                return Err(Error::Dataset(format!(
                    "nominal attribute `{}` has no values",
                    self.name
                )));
            }
            let mut seen = HashSet::new();
            for v in values {
                if !seen.insert(v) {
                    return Err(Error::Dataset(format!(
                        "nominal attribute `{}` declares `{v}` twice",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks that `value` fits this attribute.
    pub fn check(&self, value: Value) -> Result<()> {
        match (&self.kind, value) {
            (AttributeKind::Numeric, Value::Numeric(v)) if v.is_finite() => Ok(()),
            (AttributeKind::Numeric, Value::Numeric(v)) => {
                Err(Error::Domain(format!("non-finite value {v} for `{}`", self.name)))
            }
            (AttributeKind::Nominal(values), Value::Nominal(i)) if i < values.len() => Ok(()),
            (AttributeKind::Nominal(values), Value::Nominal(i)) => Err(Error::Domain(format!(
                "index {i} for `{}` which has {} values",
                self.name,
                values.len()
            ))),
            _ => Err(Error::SchemaMismatch(format!(
                "value kind does not match attribute `{}`",
                self.name
            ))),
        }
    }
}

/// Checks that attribute names are unique and nominal domains well formed.
pub fn validate_schema(attributes: &[Attribute]) -> Result<()> {
    let mut names = HashSet::new();
    for a in attributes {
        if !names.insert(a.name.as_str()) {
            return Err(Error::Dataset(format!("duplicate attribute name `{}`", a.name)));
        }
        a.validate()?;
    }
    Ok(())
}

/// One slot of a feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Numeric(f64),
    /// Index into the attribute's nominal value list.
    Nominal(usize),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector(Vec<Value>);

impl FeatureVector {
    pub fn new(values: Vec<Value>) -> Self {
        FeatureVector(values)
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn get(&self, index: usize) -> Option<Value> {
        self.0.get(index).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Arity and per-slot domain check against a schema.
    pub fn check(&self, attributes: &[Attribute]) -> Result<()> {
        if self.0.len() != attributes.len() {
            return Err(Error::SchemaMismatch(format!(
                "vector has {} values, schema has {} attributes",
                self.0.len(),
                attributes.len()
            )));
        }
        for (a, v) in attributes.iter().zip(&self.0) {
            a.check(*v)?;
        }
        Ok(())
    }
}

impl From<Vec<Value>> for FeatureVector {
    fn from(values: Vec<Value>) -> Self {
        FeatureVector(values)
    }
}

/// A set of diagnosis codes. Iteration order is sorted, so two equal sets
/// always render and serialize identically.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelSet(BTreeSet<String>);

impl LabelSet {
    pub fn new() -> Self {
        LabelSet(BTreeSet::new())
    }

    /// Parses a separator-joined code list. Blank items are skipped, so an
    /// empty string yields the empty set.
    pub fn parse(text: &str, separator: char) -> Self {
        text.split(separator)
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(str::to_owned)
            .collect()
    }

    pub fn insert(&mut self, code: impl Into<String>) -> bool {
        self.0.insert(code.into())
    }

    pub fn contains(&self, code: &str) -> bool {
        self.0.contains(code)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// Lowest code in sort order.
    pub fn first(&self) -> Option<&str> {
        self.0.iter().next().map(String::as_str)
    }

    /// Codes joined with `separator`; the empty set joins to "".
    pub fn join(&self, separator: char) -> String {
        let mut out = String::new();
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                out.push(separator);
            }
            out.push_str(c);
        }
        out
    }

    /// Canonical `;`-joined form, used as a class name by label-powerset models.
    pub fn canonical(&self) -> String {
        self.join(LABEL_SEPARATOR)
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn symmetric_difference_len(&self, other: &LabelSet) -> usize {
        self.0.symmetric_difference(&other.0).count()
    }
}

impl<S: Into<String>> FromIterator<S> for LabelSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        LabelSet(iter.into_iter().map(Into::into).collect())
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().cloned().collect::<Vec<_>>().join(", "))
    }
}

/// Discharge-summary role of a code on a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodeRole {
    /// Principal diagnosis.
    #[serde(rename = "PDx")]
    Principal,
    /// Secondary diagnosis.
    #[serde(rename = "SDx")]
    Secondary,
    /// Procedure.
    #[serde(rename = "PROC")]
    Procedure,
}

impl CodeRole {
    pub fn tag(self) -> &'static str {
        match self {
            CodeRole::Principal => "PDx",
            CodeRole::Secondary => "SDx",
            CodeRole::Procedure => "PROC",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag.trim().to_ascii_lowercase().as_str() {
            "pdx" => Some(CodeRole::Principal),
            "sdx" => Some(CodeRole::Secondary),
            "proc" => Some(CodeRole::Procedure),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub features: FeatureVector,
    pub labels: LabelSet,
    /// Optional role tag per code; every key is a member of `labels`.
    pub roles: BTreeMap<String, CodeRole>,
}

impl Record {
    pub fn new(id: impl Into<String>, features: FeatureVector, labels: LabelSet) -> Self {
        Record {
            id: id.into(),
            features,
            labels,
            roles: BTreeMap::new(),
        }
    }

    pub fn with_role(mut self, code: impl Into<String>, role: CodeRole) -> Self {
        self.roles.insert(code.into(), role);
        self
    }

    /// The code tagged PDx, or the lowest code when nothing is tagged.
    pub fn principal_code(&self) -> Option<&str> {
        self.roles
            .iter()
            .find(|(_, r)| **r == CodeRole::Principal)
            .map(|(c, _)| c.as_str())
            .or_else(|| self.labels.first())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    attributes: Vec<Attribute>,
    alphabet: Vec<String>,
    records: Vec<Record>,
}

impl Dataset {
    /// Builds a dataset, checking every structural invariant.
    pub fn new(attributes: Vec<Attribute>, alphabet: Vec<String>, records: Vec<Record>) -> Result<Self> {
        validate_schema(&attributes)?;
        let codes: HashSet<&str> = alphabet.iter().map(String::as_str).collect();
        if codes.len() != alphabet.len() {
            return Err(Error::Dataset("label alphabet contains duplicates".into()));
        }
        let mut ids = HashSet::new();
        for r in &records {
            if !ids.insert(r.id.as_str()) {
                return Err(Error::Dataset(format!("duplicate record id `{}`", r.id)));
            }
            r.features
                .check(&attributes)
                .map_err(|e| Error::Dataset(format!("record `{}`: {e}", r.id)))?;
            if let Some(code) = r.labels.iter().find(|c| !codes.contains(c)) {
                return Err(Error::Dataset(format!(
                    "record `{}` carries `{code}` which is not in the label alphabet",
                    r.id
                )));
            }
            if let Some(code) = r.roles.keys().find(|c| !r.labels.contains(c)) {
                return Err(Error::Dataset(format!(
                    "record `{}` tags `{code}` which it does not carry",
                    r.id
                )));
            }
            if r.roles.values().filter(|x| **x == CodeRole::Principal).count() > 1 {
                return Err(Error::Dataset(format!("record `{}` has more than one PDx", r.id)));
            }
        }
        Ok(Dataset {
            attributes,
            alphabet,
            records,
        })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, id: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn ids(&self) -> BTreeSet<String> {
        self.records.iter().map(|r| r.id.clone()).collect()
    }

    pub fn label_index(&self, code: &str) -> Option<usize> {
        self.alphabet.iter().position(|c| c == code)
    }

    /// Codes of the alphabet carried by at least one record, in alphabet order.
    pub fn present_labels(&self) -> Vec<&str> {
        self.alphabet
            .iter()
            .filter(|c| self.records.iter().any(|r| r.labels.contains(c)))
            .map(String::as_str)
            .collect()
    }

    /// Records whose id is in `ids`, in dataset order, sharing the schema and
    /// alphabet of `self`.
    pub fn subset(&self, ids: &BTreeSet<String>) -> Dataset {
        Dataset {
            attributes: self.attributes.clone(),
            alphabet: self.alphabet.clone(),
            records: self.records.iter().filter(|r| ids.contains(&r.id)).cloned().collect(),
        }
    }
}
