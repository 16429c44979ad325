use std::collections::{BTreeMap, BTreeSet};

use crate::dataset::{Attribute, AttributeKind, FeatureVector, Value};
use crate::{Error, Result};

/// Lowercases, trims and collapses internal whitespace. Idempotent.
pub fn normalize_term(term: &str) -> String {
    term.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Maps clinical terms to the binary features they switch on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermLexicon {
    entries: BTreeMap<String, BTreeSet<String>>,
}

/// Result of [`TermLexicon::map_terms`].
#[derive(Debug, Clone, PartialEq)]
pub struct TermMapping {
    pub features: FeatureVector,
    /// Input terms (counting repeats) with no lexicon entry.
    pub ignored: usize,
}

impl TermLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses a lexicon file: a JSON object from term to feature names.
    /// Terms that normalize to the same key have their targets merged.
    pub fn from_json(content: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(content)?;
        let mut lex = Self::new();
        for (term, features) in raw {
            lex.insert(&term, features);
        }
        Ok(lex)
    }

    pub fn insert<S: Into<String>>(&mut self, term: &str, features: impl IntoIterator<Item = S>) {
        self.entries
            .entry(normalize_term(term))
            .or_default()
            .extend(features.into_iter().map(Into::into));
    }

    pub fn lookup(&self, term: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(&normalize_term(term))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Builds a presence vector over `schema`: a lexicon target feature is 1
    /// iff some input term maps to it. Every target must be a `{0,1}` nominal
    /// attribute of the schema. Attributes the lexicon never targets are 0.
    pub fn map_terms<S: AsRef<str>>(&self, terms: &[S], schema: &[Attribute]) -> Result<TermMapping> {
        let mut slots = BTreeMap::new();
        for (i, a) in schema.iter().enumerate() {
            slots.insert(a.name.as_str(), i);
        }
        let binary = |a: &Attribute| Some((a.value_index("0")?, a.value_index("1")?));
        for target in self.entries.values().flatten() {
            let &i = slots.get(target.as_str()).ok_or_else(|| {
                Error::SchemaMismatch(format!("lexicon targets `{target}` which is not in the schema"))
            })?;
            if binary(&schema[i]).is_none() {
                return Err(Error::SchemaMismatch(format!(
                    "lexicon target `{target}` is not a 0/1 attribute"
                )));
            }
        }
        let mut values: Vec<Value> = schema
            .iter()
            .map(|a| match &a.kind {
                AttributeKind::Numeric => Value::Numeric(0.0),
                AttributeKind::Nominal(_) => Value::Nominal(binary(a).map_or(0, |(zero, _)| zero)),
            })
            .collect();
        let mut ignored = 0;
        for term in terms {
            match self.lookup(term.as_ref()) {
                Some(features) => {
                    for f in features {
                        let i = slots[f.as_str()];
                        values[i] = Value::Nominal(binary(&schema[i]).expect("checked above").1);
                    }
                }
                None => ignored += 1,
            }
        }
        Ok(TermMapping {
            features: FeatureVector::new(values),
            ignored,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Vec<Attribute> {
        (1..=4).map(|i| Attribute::binary(format!("f{i}"))).collect()
    }

    fn lex() -> TermLexicon {
        TermLexicon::from_json(r#"{"Unstable  Angina": ["f3"], "troponin rise": ["f1", "f2"]}"#).unwrap()
    }

    fn ones(m: &TermMapping) -> Vec<usize> {
        m.features
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == Value::Nominal(1))
            .map(|(i, _)| i)
            .collect()
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_term("  Unstable \t ANGINA "), "unstable angina");
        let once = normalize_term(" A  b ");
        assert_eq!(normalize_term(&once), once);
    }

    #[test]
    fn single_term() {
        let m = lex().map_terms(&["unstable angina"], &schema()).unwrap();
        assert_eq!(ones(&m), vec![2]);
        assert_eq!(m.ignored, 0);
    }

    #[test]
    fn empty_bag_is_all_zero() {
        let m = lex().map_terms::<&str>(&[], &schema()).unwrap();
        assert!(ones(&m).is_empty());
    }

    #[test]
    fn duplicates_and_unknowns() {
        let dup = lex()
            .map_terms(&["Troponin rise", "troponin rise", "fever"], &schema())
            .unwrap();
        let single = lex().map_terms(&["troponin rise"], &schema()).unwrap();
        assert_eq!(dup.features, single.features);
        assert_eq!(dup.ignored, 1);
    }

    #[test]
    fn target_outside_schema() {
        let mut l = lex();
        l.insert("x", ["f9"]);
        assert!(matches!(l.map_terms(&["x"], &schema()), Err(Error::SchemaMismatch(_))));
        let numeric = vec![Attribute::numeric("f3")];
        assert!(TermLexicon::from_json(r#"{"a":["f3"]}"#)
            .unwrap()
            .map_terms(&["a"], &numeric)
            .is_err());
    }
}
