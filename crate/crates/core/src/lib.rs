//! Cascaded C4.5 multi-label classification for ICD-10 diagnosis coding.
//!
//! The crate is organised around the pipeline a coding run follows:
//!
//! * [`dataset`] holds records (feature vectors plus a set of diagnosis codes),
//!   the CSV/ARFF loaders, the cover-all-labels split and a seeded synthetic
//!   corpus generator.
//! * [`ontology`] holds the three-level code hierarchy, the registry of valid
//!   code combinations and the term lexicon.
//! * [`c45`] is the C4.5 tree learner (gain ratio, error-based pruning).
//! * [`multilabel`] wraps trees into binary-relevance and label-powerset
//!   models and builds the two-stage cascade on top of them.
//! * [`eval`] computes the confusion-matrix and probabilistic metrics and
//!   renders them in the familiar WEKA summary layout.
//!
//! ```
//! use chidt::dataset::{generate_synthetic, GeneratorConfig, Profile};
//! use chidt::multilabel::{train_chidt, CascadeConfig};
//! use chidt::ontology::ValidCombinationRegistry;
//!
//! let cfg = GeneratorConfig {
//!     profiles: vec![
//!         Profile::new(["I21.0"], vec![0.9, 0.1, 0.1]),
//!         Profile::new(["I21.0", "I25.1"], vec![0.9, 0.9, 0.1]),
//!         Profile::new(["I20.0"], vec![0.1, 0.1, 0.9]),
//!     ],
//!     n_records: 60,
//!     noise_rate: 0.0,
//!     seed: 7,
//!     feature_names: None,
//! };
//! let (ds, _) = generate_synthetic(&cfg).unwrap();
//! let registry = ValidCombinationRegistry::observed(&ds);
//! let model = train_chidt(&ds, &CascadeConfig::default(), registry, vec![]).unwrap();
//! let outcome = model.predict(&ds.records()[0].features).unwrap();
//! assert!(!outcome.labels.is_empty());
//! ```

pub mod c45;
pub mod dataset;
mod error;
pub mod eval;
pub mod multilabel;
pub mod ontology;

pub use error::{Error, Result};
