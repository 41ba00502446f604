use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MOCK_DIMENSION: usize = 2048;

pub trait Embedder: Send + Sync {
    fn backend_id(&self) -> &str;

    /// One vector per text, all of the backend's fixed dimension.
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>>;
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Hashed term-frequency vectors over lowercased alphanumeric tokens,
/// L2-normalized. Text without tokens embeds to the zero vector.
#[derive(Debug, Clone)]
pub struct MockEmbedder {
    pub dimension: usize,
}

impl Default for MockEmbedder {
    fn default() -> Self {
        MockEmbedder {
            dimension: MOCK_DIMENSION,
        }
    }
}

impl MockEmbedder {
    pub fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dimension];
        let mut touched = Vec::new();
        let lower = text.to_lowercase();
        for tok in lower.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            let i = (fnv1a(tok.as_bytes()) % self.dimension as u64) as usize;
            if v[i] == 0.0 {
                touched.push(i);
            }
            v[i] += 1.0;
        }
        // vectors are sparse; only touched slots need scaling
        let norm = touched.iter().map(|&i| v[i] * v[i]).sum::<f64>().sqrt();
        if norm > 0.0 {
            touched.iter().for_each(|&i| v[i] /= norm);
        }
        v
    }
}

impl Embedder for MockEmbedder {
    fn backend_id(&self) -> &str {
        "mock-embedder"
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

/// `POST {base}/embed` with `{"texts": [...]}`, expecting `{"vectors": [[...]]}`.
pub struct HttpEmbedder {
    backend_id: String,
    url: String,
    agent: ureq::Agent,
}

pub(crate) fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(120)))
        .build()
        .into()
}

pub(crate) fn backend_error(backend_id: &str, e: ureq::Error) -> Error {
    // transport problems and server-side errors may go away on retry
    let retriable = match &e {
        ureq::Error::StatusCode(code) => *code >= 500 || *code == 429,
        ureq::Error::Io(_) | ureq::Error::Timeout(_) | ureq::Error::ConnectionFailed | ureq::Error::HostNotFound => true,
        _ => false,
    };
    Error::Backend {
        backend_id: backend_id.to_string(),
        retriable,
        message: e.to_string(),
    }
}

impl HttpEmbedder {
    pub fn new(base_url: &str) -> Self {
        HttpEmbedder {
            backend_id: format!("http:{base_url}"),
            url: format!("{}/embed", base_url.trim_end_matches('/')),
            agent: agent(),
        }
    }
}

impl Embedder for HttpEmbedder {
    fn backend_id(&self) -> &str {
        &self.backend_id
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let resp: EmbedResponse = self
            .agent
            .post(&self.url)
            .send_json(EmbedRequest { texts })
            .and_then(|mut r| r.body_mut().read_json())
            .map_err(|e| backend_error(&self.backend_id, e))?;
        if resp.vectors.len() != texts.len() {
            return Err(Error::Backend {
                backend_id: self.backend_id.clone(),
                retriable: false,
                message: format!("{} vectors for {} texts", resp.vectors.len(), texts.len()),
            });
        }
        let dim = resp.vectors[0].len();
        if let Some(bad) = resp.vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                backend_id: self.backend_id.clone(),
                expected: dim,
                found: bad.len(),
            });
        }
        Ok(resp.vectors)
    }
}
