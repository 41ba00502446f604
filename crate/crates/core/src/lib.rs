//! Neuro-symbolic abstraction of cancer variables from unstructured patient
//! records, with optional retrieval and generation backends in the loop.

pub mod corpus;
pub mod error;
pub mod extraction;
pub mod harness;
pub mod llm;
pub mod ontology;
pub mod preprocess;
pub mod reasoning;
pub mod variables;

pub use error::{Error, Result};
