//! Code hierarchy, valid-combination registry and term lexicon.
//!
//! The registry gives "impossible combination of codes" a concrete meaning: a
//! predicted label set is a known error when it is empty, breaks an exclusion
//! group, or was never registered (by default: never seen in training).

mod hierarchy;
mod lexicon;
mod registry;

pub use hierarchy::{CodeHierarchy, CodeNode, Level};
pub use lexicon::{normalize_term, TermLexicon, TermMapping};
pub use registry::{is_valid, load_exclusions, ExclusionGroup, Provenance, ValidCombinationRegistry, Verdict};
