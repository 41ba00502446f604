use std::cmp::Ordering;

use super::{cosine, Chunk, Embedder};
use crate::error::Result;

/// Chunks embedded once, queried many times.
pub struct Retriever<'a> {
    chunks: &'a [Chunk],
    vectors: Vec<Vec<f64>>,
}

impl<'a> Retriever<'a> {
    pub fn new(chunks: &'a [Chunk], embedder: &dyn Embedder) -> Result<Self> {
        let texts: Vec<String> = chunks.iter().map(|c| c.text.clone()).collect();
        let vectors = embedder.embed(&texts)?;
        Ok(Retriever { chunks, vectors })
    }

    pub fn from_vectors(chunks: &'a [Chunk], vectors: Vec<Vec<f64>>) -> Self {
        assert_eq!(chunks.len(), vectors.len(), "one vector per chunk");
        Retriever { chunks, vectors }
    }

    /// Indices of the `k` most similar chunks, best first; ties go to the
    /// earlier (doc id, ordinal).
    pub fn top_k_indices(&self, query: &[f64], k: usize) -> Vec<usize> {
        let scores: Vec<f64> = self.vectors.iter().map(|v| cosine(query, v)).collect();
        let order = |&a: &usize, &b: &usize| -> Ordering {
            scores[b].total_cmp(&scores[a]).then_with(|| {
                let (ca, cb) = (&self.chunks[a], &self.chunks[b]);
                (&ca.source_doc_id, ca.ordinal).cmp(&(&cb.source_doc_id, cb.ordinal))
            })
        };
        let mut idx: Vec<usize> = (0..self.chunks.len()).collect();
        if k == 0 {
            return Vec::new();
        }
        if k < idx.len() {
            idx.select_nth_unstable_by(k - 1, order);
            idx.truncate(k);
        }
        idx.sort_by(order);
        idx
    }

    pub fn top_k(&self, query: &[f64], k: usize) -> Vec<&'a Chunk> {
        self.top_k_indices(query, k).into_iter().map(|i| &self.chunks[i]).collect()
    }
}

/// The `k` chunks most similar to `question`, best first.
pub fn retrieve_top_k(question: &str, chunks: &[Chunk], embedder: &dyn Embedder, k: usize) -> Result<Vec<Chunk>> {
    if chunks.is_empty() || k == 0 {
        return Ok(Vec::new());
    }
    let retriever = Retriever::new(chunks, embedder)?;
    let q = embedder.embed(&[question.to_string()])?.remove(0);
    Ok(retriever.top_k(&q, k).into_iter().cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::MockEmbedder;

    fn chunk(doc: &str, ordinal: usize, text: &str) -> Chunk {
        Chunk {
            chunk_id: format!("{doc}#{ordinal}"),
            patient_id: "p".into(),
            source_doc_id: doc.into(),
            ordinal,
            text: text.into(),
            token_count: text.split_whitespace().count(),
        }
    }

    #[test]
    fn fewer_chunks_than_k() {
        let cs = [chunk("d", 0, "anything")];
        let got = retrieve_top_k("question", &cs, &MockEmbedder::default(), 4).unwrap();
        assert_eq!(got, cs);
    }

    #[test]
    fn most_similar_first_and_ties_by_position() {
        let cs = [
            chunk("b", 0, "lung cancer staging"),
            chunk("a", 1, "unrelated words"),
            chunk("a", 0, "unrelated words"),
            chunk("c", 0, "lung cancer"),
        ];
        let got = retrieve_top_k("lung cancer", &cs, &MockEmbedder::default(), 3).unwrap();
        let ids: Vec<_> = got.iter().map(|c| c.chunk_id.as_str()).collect();
        assert_eq!(ids, ["c#0", "b#0", "a#0"]);
    }
}
