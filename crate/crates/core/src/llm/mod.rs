//! Retrieval and generation backends and their coupling to the reasoning
//! pipeline: chunking, embedding, top-k retrieval, per-question answer
//! generation, and conversion of answers back into documents or values.

mod answers;
mod chunk;
mod embed;
mod generate;
mod questions;
mod retrieve;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use answers::{answers_to_documents, format_answer, parse_answer, AnswerItem, NO_INFORMATION};
pub use chunk::{chunk_documents, whitespace_tokens, Chunk};
pub use embed::{cosine, Embedder, HttpEmbedder, MockEmbedder, MOCK_DIMENSION};
pub use generate::{
    build_prompt, generate_answer, Anomalies, GenerationRequest, Generator, HttpGenerator, MockGenerator,
    DEFAULT_CONTEXT_BUDGET, PROMPT_TEMPLATE, PROMPT_VERSION,
};
pub use questions::{QuestionBank, QUESTION_COUNT};
pub use retrieve::{retrieve_top_k, Retriever};

pub const DEFAULT_K: usize = 4;
pub const DEFAULT_CHUNK_SIZE: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BackendKind {
    Embedder,
    Generator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub backend_id: String,
    pub kind: BackendKind,
    /// Base URL of an HTTP backend; `None` selects the built-in mock.
    pub endpoint: Option<String>,
    pub chunk_size: usize,
    /// Generators only.
    pub temperature: Option<f64>,
    pub k: usize,
}

impl BackendConfig {
    pub fn mock_embedder() -> Self {
        BackendConfig {
            backend_id: "mock-embedder".into(),
            kind: BackendKind::Embedder,
            endpoint: None,
            chunk_size: DEFAULT_CHUNK_SIZE,
            temperature: None,
            k: DEFAULT_K,
        }
    }

    pub fn mock_generator() -> Self {
        BackendConfig {
            backend_id: "mock-generator".into(),
            kind: BackendKind::Generator,
            endpoint: None,
            chunk_size: DEFAULT_CHUNK_SIZE,
            temperature: Some(0.67),
            k: DEFAULT_K,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config(format!("{}: k must be at least 1", self.backend_id)));
        }
        if self.chunk_size == 0 {
            return Err(Error::Config(format!("{}: chunk size must be at least 1", self.backend_id)));
        }
        match (self.kind, self.temperature) {
            (BackendKind::Embedder, Some(_)) => Err(Error::Config(format!(
                "{}: temperature applies to generators only",
                self.backend_id
            ))),
            (BackendKind::Generator, Some(t)) if !(t >= 0.0) => {
                Err(Error::Config(format!("{}: temperature must be >= 0", self.backend_id)))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedAnswer {
    pub question_index: usize,
    pub answer_text: String,
    pub backend_id: String,
    pub temperature: f64,
}
