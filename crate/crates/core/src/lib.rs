//! Core library of the `cryptomut` mutation-analysis framework for
//! crypto-API misuse detectors.
//!
//! The pipeline: a vetted [`taxonomy::Registry`] of misuse cases and an
//! [`api_model::ApiModel`] of target APIs feed the [`mutation`] engine,
//! which instantiates cases as compilable Java mutants; the seeding layer
//! plants them into real projects at scoped locations; the kill analyzer
//! matches detector reports back to the mutation log.

pub mod api_model;
pub mod error;
pub mod kill;
pub mod locations;
pub mod mutation;
pub mod seeder;
pub mod source;
pub mod taxonomy;

pub use error::{Error, Result};
