//! Sentence templates that carry facts in synthetic records.
//!
//! The synthetic generator renders them and the mock generator backend reads
//! them back, so both sides stay in lockstep.

use std::sync::OnceLock;

use chrono::NaiveDate;
use regex::Regex;

use crate::variables::MedicalVariableKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactSlot {
    NeoplasmDiagnosis,
    NeoplasmMention,
    Morphology,
    TStage,
    NStage,
    MStage,
    StageGroup,
    Medication,
    Surgery,
    DiagnosticProcedure,
    Biomarker,
    Outcome,
    Response,
}

impl FactSlot {
    pub fn variable(self) -> MedicalVariableKind {
        match self {
            FactSlot::NeoplasmDiagnosis | FactSlot::NeoplasmMention => MedicalVariableKind::Neoplasm,
            FactSlot::Morphology => MedicalVariableKind::Morphology,
            FactSlot::TStage => MedicalVariableKind::TStage,
            FactSlot::NStage => MedicalVariableKind::NStage,
            FactSlot::MStage => MedicalVariableKind::MStage,
            FactSlot::StageGroup => MedicalVariableKind::StageGroup,
            FactSlot::Medication => MedicalVariableKind::Medications,
            FactSlot::Surgery => MedicalVariableKind::Surgeries,
            FactSlot::DiagnosticProcedure => MedicalVariableKind::DiagnosticProcedures,
            FactSlot::Biomarker => MedicalVariableKind::TestedBiomarkers,
            FactSlot::Outcome => MedicalVariableKind::Outcome,
            FactSlot::Response => MedicalVariableKind::Response,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FactTemplate {
    pub slot: FactSlot,
    pub text: &'static str,
}

pub const FACT_TEMPLATES: &[FactTemplate] = &[
    FactTemplate {
        slot: FactSlot::NeoplasmDiagnosis,
        text: "Final diagnosis: the patient was diagnosed with {value} on {date}.",
    },
    FactTemplate {
        slot: FactSlot::NeoplasmMention,
        text: "Specimen findings are consistent with {value}.",
    },
    FactTemplate {
        slot: FactSlot::NeoplasmMention,
        text: "Follow-up visit for {value}.",
    },
    FactTemplate {
        slot: FactSlot::Morphology,
        text: "Histologic type: {value}.",
    },
    FactTemplate {
        slot: FactSlot::TStage,
        text: "Pathologic tumor category: {value}.",
    },
    FactTemplate {
        slot: FactSlot::NStage,
        text: "Pathologic nodal category: {value}.",
    },
    FactTemplate {
        slot: FactSlot::MStage,
        text: "Metastasis category: {value}.",
    },
    FactTemplate {
        slot: FactSlot::StageGroup,
        text: "AJCC stage: {value}.",
    },
    FactTemplate {
        slot: FactSlot::Medication,
        text: "The patient started {value} on {date}.",
    },
    FactTemplate {
        slot: FactSlot::Surgery,
        text: "The patient underwent {value} on {date}.",
    },
    FactTemplate {
        slot: FactSlot::DiagnosticProcedure,
        text: "Workup included {value} on {date}.",
    },
    FactTemplate {
        slot: FactSlot::Biomarker,
        text: "{value} testing by {method} was {qualifier}.",
    },
    FactTemplate {
        slot: FactSlot::Outcome,
        text: "Assessment: {value} documented on {date}.",
    },
    FactTemplate {
        slot: FactSlot::Response,
        text: "Restaging result: {value} noted on {date}.",
    },
];

/// Generic leaflet sentence that lists side effects, not patient facts.
pub const SIDE_EFFECTS_TEMPLATE: &str = "Possible side effects include {list}.";

pub fn template_for(slot: FactSlot) -> &'static FactTemplate {
    FACT_TEMPLATES
        .iter()
        .find(|t| t.slot == slot)
        .expect("every slot has a template")
}

pub fn templates_for(slot: FactSlot) -> impl Iterator<Item = &'static FactTemplate> {
    FACT_TEMPLATES.iter().filter(move |t| t.slot == slot)
}

#[derive(Debug, Default, Clone)]
pub struct Fill<'a> {
    pub value: &'a str,
    pub date: Option<NaiveDate>,
    pub method: Option<&'a str>,
    pub qualifier: Option<&'a str>,
}

impl FactTemplate {
    pub fn render(&self, fill: &Fill<'_>) -> String {
        let date = fill.date.map(|d| d.format("%Y-%m-%d").to_string()).unwrap_or_default();
        self.text
            .replace("{value}", fill.value)
            .replace("{date}", &date)
            .replace("{method}", fill.method.unwrap_or_default())
            .replace("{qualifier}", fill.qualifier.unwrap_or_default())
    }
}

pub fn render_side_effects(items: &[&str]) -> String {
    SIDE_EFFECTS_TEMPLATE.replace("{list}", &items.join(", "))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedFact {
    pub slot: FactSlot,
    pub value: String,
    pub date: Option<NaiveDate>,
    pub method: Option<String>,
    pub qualifier: Option<String>,
    /// Byte offset of the match in the scanned text.
    pub offset: usize,
}

struct Compiled {
    slot: FactSlot,
    regex: Regex,
}

/// Builds the reader regex for a template. The closing period is left out
/// and the final placeholder is greedy, so adjacent sentences stay matchable.
fn to_regex(template: &str) -> String {
    let body = template.strip_suffix('.').unwrap_or(template);
    let mut out = String::new();
    if body.starts_with('{') {
        out.push_str(r"(?:^|[.:\n]\s*)");
    }
    let mut rest = body;
    while let Some(start) = rest.find('{') {
        out.push_str(&regex::escape(&rest[..start]));
        let end = rest[start..].find('}').expect("closed placeholder") + start;
        let last = end + 1 == rest.len();
        let lazy = if last { "" } else { "?" };
        let group = match &rest[start + 1..end] {
            "value" => format!(r"(?P<value>[A-Za-z0-9][A-Za-z0-9 /+-]*{lazy})"),
            "date" => r"(?P<date>\d{4}-\d{2}-\d{2})".to_string(),
            "method" => format!(r"(?P<method>[A-Za-z0-9][A-Za-z0-9 -]*{lazy})"),
            "qualifier" => format!(r"(?P<qualifier>[A-Za-z][A-Za-z -]*{lazy})"),
            "list" => format!(r"(?P<list>[^.\n]+{lazy})"),
            other => panic!("unknown placeholder {other}"),
        };
        out.push_str(&group);
        rest = &rest[end + 1..];
    }
    out.push_str(&regex::escape(rest));
    out
}

fn compiled() -> &'static [Compiled] {
    static CELL: OnceLock<Vec<Compiled>> = OnceLock::new();
    CELL.get_or_init(|| {
        FACT_TEMPLATES
            .iter()
            .map(|t| Compiled {
                slot: t.slot,
                regex: Regex::new(&to_regex(t.text)).expect("template regex"),
            })
            .collect()
    })
}

/// Every templated fact in `text`, in order of appearance.
pub fn extract_facts(text: &str) -> Vec<ExtractedFact> {
    let mut facts = Vec::new();
    for c in compiled() {
        for caps in c.regex.captures_iter(text) {
            let Some(value) = caps.name("value") else { continue };
            facts.push(ExtractedFact {
                slot: c.slot,
                value: value.as_str().trim().to_string(),
                date: caps
                    .name("date")
                    .and_then(|d| NaiveDate::parse_from_str(d.as_str(), "%Y-%m-%d").ok()),
                method: caps.name("method").map(|m| m.as_str().trim().to_string()),
                qualifier: caps.name("qualifier").map(|m| m.as_str().trim().to_string()),
                offset: value.start(),
            });
        }
    }
    facts.sort_by_key(|f| f.offset);
    facts
}

/// Items of every side-effect list sentence in `text`.
pub fn extract_side_effect_lists(text: &str) -> Vec<Vec<String>> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(&to_regex(SIDE_EFFECTS_TEMPLATE)).expect("list regex"));
    re.captures_iter(text)
        .filter_map(|c| c.name("list"))
        .map(|m| {
            m.as_str()
                .split(',')
                .map(|s| s.trim().trim_start_matches("and ").trim().to_string())
                .filter(|s| !s.is_empty())
                .collect()
        })
        .collect()
}
