//! Answer text format shared by the mock generator, the answer documents fed
//! to reasoning and the standalone parser:
//! `value[ on YYYY-MM-DD][ (qualifier)]`, items joined by `; `.

use std::sync::OnceLock;

use chrono::NaiveDate;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::GeneratedAnswer;
use crate::preprocess::{ClinicalDocument, DocProvenance, DocumentCategory};

pub const NO_INFORMATION: &str = "no information found";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerItem {
    pub value: String,
    pub date: Option<NaiveDate>,
    pub qualifier: Option<String>,
}

impl AnswerItem {
    pub fn plain(value: impl Into<String>) -> Self {
        AnswerItem {
            value: value.into(),
            date: None,
            qualifier: None,
        }
    }
}

pub fn format_answer(items: &[AnswerItem]) -> String {
    if items.is_empty() {
        return NO_INFORMATION.to_string();
    }
    items
        .iter()
        .map(|it| {
            let mut s = it.value.clone();
            if let Some(d) = it.date {
                s.push_str(&format!(" on {}", d.format("%Y-%m-%d")));
            }
            if let Some(q) = &it.qualifier {
                s.push_str(&format!(" ({q})"));
            }
            s
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn item_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^(?P<value>.+?)(?:\s+on\s+(?P<date>\d{4}-\d{2}-\d{2}))?(?:\s*\((?P<q>[^()]*)\))?\.?$").unwrap()
    })
}

/// Inverse of [`format_answer`]; tolerant of extra whitespace, a trailing
/// period and newline separators.
pub fn parse_answer(text: &str) -> Vec<AnswerItem> {
    let text = text.trim();
    if text.is_empty() || text.eq_ignore_ascii_case(NO_INFORMATION) {
        return Vec::new();
    }
    text.split([';', '\n'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .filter_map(|s| {
            let c = item_regex().captures(s)?;
            let value = c["value"].trim().to_string();
            if value.is_empty() || value.eq_ignore_ascii_case(NO_INFORMATION) {
                return None;
            }
            Some(AnswerItem {
                value,
                date: c
                    .name("date")
                    .and_then(|d| NaiveDate::parse_from_str(d.as_str(), "%Y-%m-%d").ok()),
                qualifier: c.name("q").map(|q| q.as_str().trim().to_string()).filter(|q| !q.is_empty()),
            })
        })
        .collect()
}

/// One `LlmAnswer` document per answer, in question order.
pub fn answers_to_documents(answers: &[GeneratedAnswer], patient_id: &str) -> Vec<ClinicalDocument> {
    let mut sorted: Vec<&GeneratedAnswer> = answers.iter().collect();
    sorted.sort_by_key(|a| a.question_index);
    sorted
        .into_iter()
        .map(|a| ClinicalDocument {
            doc_id: format!("{patient_id}/answer{:02}", a.question_index),
            patient_id: patient_id.to_string(),
            category: DocumentCategory::LlmAnswer,
            text: a.answer_text.clone(),
            provenance: DocProvenance::LlmAnswer(a.question_index),
        })
        .collect()
}
