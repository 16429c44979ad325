//! Compiles every Rust listing in `book/src` as a doctest, so the guide
//! breaks the build when it drifts from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/data.md")]
pub mod data {}

#[doc = include_str!("../../../book/src/ontology.md")]
pub mod ontology {}

#[doc = include_str!("../../../book/src/c45.md")]
pub mod c45 {}

#[doc = include_str!("../../../book/src/cascade.md")]
pub mod cascade {}

#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
