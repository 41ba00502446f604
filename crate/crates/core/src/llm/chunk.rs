use serde::{Deserialize, Serialize};

use crate::preprocess::ClinicalDocument;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    /// `<doc_id>#<ordinal>`
    pub chunk_id: String,
    pub patient_id: String,
    pub source_doc_id: String,
    /// Position of the chunk within its document.
    pub ordinal: usize,
    pub text: String,
    pub token_count: usize,
}

/// Byte spans of whitespace-separated tokens.
pub fn whitespace_tokens(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                spans.push((s, i));
            }
        } else {
            start.get_or_insert(i);
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

fn ends_sentence(token: &str) -> bool {
    token.ends_with(['.', '!', '?'])
}

/// Greedy packing of whitespace tokens. When a document does not fit in
/// the remaining budget the cut goes after the last sentence-ending token
/// inside the final tenth of the window, if there is one.
pub fn chunk_documents(docs: &[ClinicalDocument], chunk_size: usize) -> Vec<Chunk> {
    let size = chunk_size.max(1);
    let mut out = Vec::new();
    for doc in docs {
        let tokens = whitespace_tokens(&doc.text);
        let mut i = 0;
        let mut ordinal = 0;
        while i < tokens.len() {
            let mut end = (i + size).min(tokens.len());
            if end < tokens.len() {
                let window_start = i + size - size / 10;
                if let Some(j) = (window_start.max(i + 1)..end)
                    .rev()
                    .find(|&j| ends_sentence(&doc.text[tokens[j - 1].0..tokens[j - 1].1]))
                {
                    end = j;
                }
            }
            out.push(Chunk {
                chunk_id: format!("{}#{ordinal}", doc.doc_id),
                patient_id: doc.patient_id.clone(),
                source_doc_id: doc.doc_id.clone(),
                ordinal,
                text: doc.text[tokens[i].0..tokens[end - 1].1].to_string(),
                token_count: end - i,
            });
            ordinal += 1;
            i = end;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: String) -> ClinicalDocument {
        ClinicalDocument::classified("d", "p", text)
    }

    fn words(n: usize) -> String {
        (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn short_document_is_one_chunk() {
        let cs = chunk_documents(&[doc(words(10))], 3000);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].token_count, 10);
        assert_eq!(cs[0].chunk_id, "d#0");
    }

    #[test]
    fn long_document_splits_in_two() {
        let cs = chunk_documents(&[doc(words(6000))], 3000);
        assert_eq!(cs.len(), 2);
        assert!(cs.iter().all(|c| c.token_count <= 3000));
    }

    #[test]
    fn prefers_sentence_break_near_the_end() {
        // sentence ends at token 95 of a 100-token budget
        let mut text = words(95);
        text.push_str(". ");
        text.push_str(&words(50));
        let cs = chunk_documents(&[doc(text)], 100);
        assert_eq!(cs[0].token_count, 95);
        assert!(cs[0].text.ends_with('.'));
        // a break outside the last tenth is ignored
        let mut text = words(50);
        text.push_str(". ");
        text.push_str(&words(100));
        assert_eq!(chunk_documents(&[doc(text)], 100)[0].token_count, 100);
    }
}
