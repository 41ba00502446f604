//! De-identification, document segmentation and document classification.
//!
//! A raw record is redacted first, then cut into clinical documents, and
//! each document gets exactly one category.

mod classify;
mod deid;
mod segment;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::PatientRecordSet;

pub use classify::{classify_document, category_scores};
pub use deid::{deidentify, find_phi, Gazetteer, PatternRedactor, PhiKind, PhiSpan, RedactionResult, Redactor};
pub use segment::{
    segment_documents, BoundaryScorer, EmbeddingBoundaryScorer, Segment, SegmentOptions,
    DEFAULT_MIN_SEGMENT_LEN, DEFAULT_SIMILARITY_THRESHOLD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DocumentCategory {
    Pathology,
    Administrative,
    LabResults,
    SoapNote,
    LlmAnswer,
    Other,
}

impl DocumentCategory {
    pub fn name(self) -> &'static str {
        match self {
            DocumentCategory::Pathology => "Pathology",
            DocumentCategory::Administrative => "Administrative",
            DocumentCategory::LabResults => "LabResults",
            DocumentCategory::SoapNote => "SoapNote",
            DocumentCategory::LlmAnswer => "LlmAnswer",
            DocumentCategory::Other => "Other",
        }
    }
}

impl fmt::Display for DocumentCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a document's text came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DocProvenance {
    SourceRecord,
    /// Generated answer to the question with this 1-based index.
    LlmAnswer(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClinicalDocument {
    pub doc_id: String,
    pub patient_id: String,
    pub category: DocumentCategory,
    pub text: String,
    pub provenance: DocProvenance,
}

impl ClinicalDocument {
    /// A source document; the category is computed from the text.
    pub fn classified(doc_id: impl Into<String>, patient_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        ClinicalDocument {
            doc_id: doc_id.into(),
            patient_id: patient_id.into(),
            category: classify_document(&text),
            text,
            provenance: DocProvenance::SourceRecord,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    pub segment: SegmentOptions,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            segment: SegmentOptions::default(),
        }
    }
}

/// Redacts, segments and classifies every record of one patient, in record
/// order.
pub fn preprocess_patient(
    patient: &PatientRecordSet,
    redactor: &dyn Redactor,
    options: &PreprocessOptions,
    scorer: Option<&dyn BoundaryScorer>,
) -> Vec<ClinicalDocument> {
    let mut docs = Vec::new();
    for record in &patient.records {
        let redacted = redactor.redact(&record.text);
        for seg in segment_documents(&record.source_id, &redacted.redacted_text, &options.segment, scorer) {
            docs.push(ClinicalDocument::classified(seg.doc_id, &patient.patient_id, seg.text));
        }
    }
    docs
}
