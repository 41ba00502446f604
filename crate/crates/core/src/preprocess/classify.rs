//! Keyword-score document classifier.

use std::sync::OnceLock;

use regex::Regex;

use super::DocumentCategory;

/// (category, cue phrase, weight). Order of categories is the tie-break
/// precedence.
const CUES: &[(DocumentCategory, &[(&str, u32)])] = &[
    (
        DocumentCategory::Pathology,
        &[
            ("pathology report", 3),
            ("pathology", 1),
            ("specimen", 2),
            ("histologic", 2),
            ("histology", 2),
            ("margins", 2),
            ("microscopic", 2),
            ("gross description", 2),
            ("final diagnosis", 2),
        ],
    ),
    (
        DocumentCategory::LabResults,
        &[
            ("laboratory results", 3),
            ("lab results", 3),
            ("laboratory", 1),
            ("reference range", 2),
            ("hemoglobin", 1),
            ("platelets", 1),
            ("creatinine", 1),
            ("sodium", 1),
            ("white blood cell", 1),
        ],
    ),
    (
        DocumentCategory::SoapNote,
        &[
            ("progress note", 3),
            ("subjective", 2),
            ("objective", 2),
            ("assessment", 1),
            ("plan", 1),
            ("vital signs", 1),
        ],
    ),
    (
        DocumentCategory::Administrative,
        &[
            ("insurance", 2),
            ("authorization", 2),
            ("billing", 1),
            ("claim", 1),
            ("member id", 2),
            ("policy", 1),
            ("correspondence", 2),
            ("dear", 1),
            ("sincerely", 1),
            ("referral", 1),
        ],
    ),
    (
        DocumentCategory::Other,
        &[("education sheet", 2), ("newsletter", 2), ("awareness", 1), ("wellness", 1)],
    ),
];

fn compiled() -> &'static [(DocumentCategory, Vec<(Regex, u32)>)] {
    static C: OnceLock<Vec<(DocumentCategory, Vec<(Regex, u32)>)>> = OnceLock::new();
    C.get_or_init(|| {
        CUES.iter()
            .map(|(cat, cues)| {
                let res = cues
                    .iter()
                    .map(|(cue, w)| (Regex::new(&format!(r"(?i)\b{}\b", regex::escape(cue))).unwrap(), *w))
                    .collect();
                (*cat, res)
            })
            .collect()
    })
}

/// Weighted cue counts per category, in precedence order.
pub fn category_scores(text: &str) -> Vec<(DocumentCategory, u32)> {
    compiled()
        .iter()
        .map(|(cat, cues)| {
            let score = cues.iter().map(|(re, w)| re.find_iter(text).count() as u32 * w).sum();
            (*cat, score)
        })
        .collect()
}

/// Highest-scoring category; ties go to the earlier category in
/// Pathology > LabResults > SoapNote > Administrative > Other, and a text
/// with no cues at all is `Other`.
pub fn classify_document(text: &str) -> DocumentCategory {
    let mut best = (DocumentCategory::Other, 0);
    for (cat, score) in category_scores(text) {
        if score > best.1 {
            best = (cat, score);
        }
    }
    best.0
}
