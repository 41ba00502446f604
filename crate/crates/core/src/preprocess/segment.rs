//! Splits a record into clinical documents.
//!
//! Rule cuts fall before document header lines (`PATHOLOGY REPORT`,
//! `PROGRESS NOTE`, ...), before a `Page 1 of N` line, and at form feeds.
//! An optional scorer adds cuts at paragraph breaks where the embeddings of
//! the neighbouring paragraphs diverge. Fragments shorter than the minimum
//! length are merged into their predecessor (the first one into its
//! successor). Segments are trimmed slices of the input.

use std::sync::OnceLock;

use regex::Regex;

use crate::llm::{cosine, Embedder};

pub const DEFAULT_MIN_SEGMENT_LEN: usize = 200;
pub const DEFAULT_SIMILARITY_THRESHOLD: f64 = 0.35;

#[derive(Debug, Clone)]
pub struct SegmentOptions {
    /// Minimum trimmed length in bytes before a fragment is merged.
    pub min_len: usize,
}

impl Default for SegmentOptions {
    fn default() -> Self {
        SegmentOptions {
            min_len: DEFAULT_MIN_SEGMENT_LEN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub doc_id: String,
    /// Byte range of the trimmed segment in the record text.
    pub start: usize,
    pub end: usize,
    pub text: String,
}

/// Extra cut positions proposed by a model.
pub trait BoundaryScorer: Send + Sync {
    /// Byte offsets where a new document should start.
    fn boundaries(&self, text: &str) -> Vec<usize>;
}

/// Cuts at blank-line paragraph breaks when the cosine similarity of the
/// paragraphs on either side falls below `threshold`.
pub struct EmbeddingBoundaryScorer<'a> {
    pub embedder: &'a dyn Embedder,
    pub threshold: f64,
}

impl<'a> EmbeddingBoundaryScorer<'a> {
    pub fn new(embedder: &'a dyn Embedder) -> Self {
        EmbeddingBoundaryScorer {
            embedder,
            threshold: DEFAULT_SIMILARITY_THRESHOLD,
        }
    }
}

impl BoundaryScorer for EmbeddingBoundaryScorer<'_> {
    fn boundaries(&self, text: &str) -> Vec<usize> {
        static BREAK: OnceLock<Regex> = OnceLock::new();
        let re = BREAK.get_or_init(|| Regex::new(r"\n[ \t]*\n\s*").unwrap());
        // paragraph start offsets
        let mut starts = vec![0];
        starts.extend(re.find_iter(text).map(|m| m.end()).filter(|&e| e < text.len()));
        if starts.len() < 2 {
            return Vec::new();
        }
        let paras: Vec<&str> = starts
            .iter()
            .enumerate()
            .map(|(i, &s)| &text[s..starts.get(i + 1).copied().unwrap_or(text.len())])
            .collect();
        // a failing backend proposes no cuts; the rule cutter still applies
        let Ok(vectors) = self.embedder.embed(&paras.iter().map(|s| s.to_string()).collect::<Vec<_>>()) else {
            return Vec::new();
        };
        (1..paras.len())
            .filter(|&i| cosine(&vectors[i - 1], &vectors[i]) < self.threshold)
            .map(|i| starts[i])
            .collect()
    }
}

fn header_line() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^[A-Z][A-Z &/-]{2,}(?:REPORT|NOTE|RESULTS|FORM|LETTER|SHEET|SUMMARY|NEWSLETTER)$").unwrap()
    })
}

fn first_page_line() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^Page 1 of \d+$").unwrap())
}

/// Rule-based cut offsets, sorted.
fn rule_cuts(text: &str) -> Vec<usize> {
    let mut cuts = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let body = line.trim_end_matches(['\n', '\r']).trim();
        if header_line().is_match(body) || first_page_line().is_match(body) {
            cuts.push(offset);
        }
        offset += line.len();
    }
    for (i, _) in text.match_indices('\u{c}') {
        cuts.push(i + 1);
    }
    cuts
}

fn trimmed_range(text: &str, start: usize, end: usize) -> Option<(usize, usize)> {
    let slice = &text[start..end];
    let lead = slice.len() - slice.trim_start().len();
    let trimmed = slice.trim();
    if trimmed.is_empty() {
        None
    } else {
        Some((start + lead, start + lead + trimmed.len()))
    }
}

pub fn segment_documents(
    source_id: &str,
    text: &str,
    options: &SegmentOptions,
    scorer: Option<&dyn BoundaryScorer>,
) -> Vec<Segment> {
    let mut cuts = rule_cuts(text);
    if let Some(s) = scorer {
        cuts.extend(s.boundaries(text).into_iter().filter(|&c| c <= text.len() && text.is_char_boundary(c)));
    }
    cuts.push(0);
    cuts.push(text.len());
    cuts.sort_unstable();
    cuts.dedup();

    let mut ranges: Vec<(usize, usize)> = cuts
        .windows(2)
        .filter_map(|w| trimmed_range(text, w[0], w[1]))
        .collect();

    // merge short fragments
    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(ranges.len());
    let mut pending_start: Option<usize> = None;
    let mut last_end = 0;
    for (s, e) in ranges.drain(..) {
        last_end = e;
        let s = pending_start.take().unwrap_or(s);
        if e - s < options.min_len {
            match merged.last_mut() {
                Some(prev) => prev.1 = e,
                None => pending_start = Some(s),
            }
        } else {
            merged.push((s, e));
        }
    }
    if let Some(s) = pending_start {
        // everything was short: one document
        merged.push((s, last_end));
    }

    merged
        .into_iter()
        .enumerate()
        .map(|(n, (start, end))| Segment {
            doc_id: format!("{source_id}.s{n}"),
            start,
            end,
            text: text[start..end].to_string(),
        })
        .collect()
}
