//! Pattern and gazetteer PHI redaction.
//!
//! Person names come from a gazetteer; phone numbers, SSNs, MRNs, e-mail
//! addresses and street addresses come from built-in patterns. Clinical
//! dates are left alone because the diagnosis date is one of the targets.
//! Existing `[REDACTED:KIND]` placeholders are never matched again, which
//! makes redaction idempotent.

use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PhiKind {
    Name,
    Phone,
    Ssn,
    Mrn,
    Email,
    Address,
}

impl PhiKind {
    pub fn tag(self) -> &'static str {
        match self {
            PhiKind::Name => "NAME",
            PhiKind::Phone => "PHONE",
            PhiKind::Ssn => "SSN",
            PhiKind::Mrn => "MRN",
            PhiKind::Email => "EMAIL",
            PhiKind::Address => "ADDRESS",
        }
    }

    pub fn placeholder(self) -> String {
        format!("[REDACTED:{}]", self.tag())
    }
}

impl fmt::Display for PhiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Byte span in the original text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhiSpan {
    pub start: usize,
    pub end: usize,
    pub kind: PhiKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedactionResult {
    pub redacted_text: String,
    /// Sorted, non-overlapping spans; offsets refer to the original text.
    pub phi_spans: Vec<PhiSpan>,
}

/// Person names to redact, matched case-insensitively on word boundaries.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    names: Vec<String>,
    regex: Option<Regex>,
}

impl Gazetteer {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut names: Vec<String> = names
            .into_iter()
            .map(|s| s.as_ref().trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        names.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        names.dedup();
        let regex = if names.is_empty() {
            None
        } else {
            let alts: Vec<String> = names.iter().map(|n| regex::escape(n)).collect();
            Some(Regex::new(&format!(r"(?i)\b(?:{})\b", alts.join("|"))).expect("escaped names"))
        };
        Gazetteer { names, regex }
    }

    /// One name per line; blank lines and `#` comments ignored.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(
            text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')),
        ))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

pub trait Redactor: Send + Sync {
    fn redact(&self, text: &str) -> RedactionResult;
}

/// Gazetteer plus built-in patterns.
#[derive(Debug, Clone, Default)]
pub struct PatternRedactor {
    pub gazetteer: Gazetteer,
}

impl PatternRedactor {
    pub fn new(gazetteer: Gazetteer) -> Self {
        PatternRedactor { gazetteer }
    }
}

impl Redactor for PatternRedactor {
    fn redact(&self, text: &str) -> RedactionResult {
        deidentify(text, &self.gazetteer)
    }
}

struct Patterns {
    placeholder: Regex,
    email: Regex,
    ssn: Regex,
    phone: Regex,
    mrn: Regex,
    address: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| Patterns {
        placeholder: Regex::new(r"\[REDACTED:[A-Z]+\]").unwrap(),
        email: Regex::new(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}").unwrap(),
        ssn: Regex::new(r"\b\d{3}-\d{2}-\d{4}\b").unwrap(),
        // 555-0142, (617) 555-0142, 617-555-0142, +1 617 555 0142
        phone: Regex::new(r"(?:\+1[ -]?)?(?:\(\d{3}\) ?|\b\d{3}[-. ])?\b\d{3}[-. ]\d{4}\b").unwrap(),
        // the number after an MRN label
        mrn: Regex::new(r"(?i)\bMRN\s*[:#]?\s*(\d{5,10})\b").unwrap(),
        address: Regex::new(
            r"\b\d{1,5}\s+(?:[A-Z][a-z]+\s+){1,3}(?:Street|St|Avenue|Ave|Road|Rd|Boulevard|Blvd|Lane|Ln|Drive|Way|Court|Ct)\b\.?",
        )
        .unwrap(),
    })
}

/// All PHI spans in `text` outside existing placeholders, sorted and with
/// overlaps resolved (earliest start, then longest).
pub fn find_phi(text: &str, gazetteer: &Gazetteer) -> Vec<PhiSpan> {
    let p = patterns();
    let protected: Vec<(usize, usize)> = p.placeholder.find_iter(text).map(|m| (m.start(), m.end())).collect();

    let mut raw = Vec::new();
    for (re, kind) in [
        (&p.email, PhiKind::Email),
        (&p.ssn, PhiKind::Ssn),
        (&p.phone, PhiKind::Phone),
        (&p.address, PhiKind::Address),
    ] {
        raw.extend(re.find_iter(text).map(|m| PhiSpan {
            start: m.start(),
            end: m.end(),
            kind,
        }));
    }
    for c in p.mrn.captures_iter(text) {
        let m = c.get(1).expect("group");
        raw.push(PhiSpan {
            start: m.start(),
            end: m.end(),
            kind: PhiKind::Mrn,
        });
    }
    if let Some(re) = &gazetteer.regex {
        raw.extend(re.find_iter(text).map(|m| PhiSpan {
            start: m.start(),
            end: m.end(),
            kind: PhiKind::Name,
        }));
    }

    raw.retain(|s| !protected.iter().any(|&(a, b)| s.start < b && a < s.end));
    raw.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)).then(a.kind.cmp(&b.kind)));
    let mut spans: Vec<PhiSpan> = Vec::with_capacity(raw.len());
    for s in raw {
        if spans.last().is_some_and(|last| s.start < last.end) {
            continue;
        }
        spans.push(s);
    }
    spans
}

fn apply(text: &str, spans: &[PhiSpan]) -> String {
    let mut out = String::with_capacity(text.len());
    let mut at = 0;
    for s in spans {
        out.push_str(&text[at..s.start]);
        out.push_str(&s.kind.placeholder());
        at = s.end;
    }
    out.push_str(&text[at..]);
    out
}

/// Redacts until nothing new matches. A placeholder can open a word
/// boundary the original lacked (`a@mail.org555-0142`), so one pass is not
/// always a fixed point. New matches never touch a placeholder, which lets
/// them map back onto the original text.
pub fn deidentify(text: &str, gazetteer: &Gazetteer) -> RedactionResult {
    let mut phi_spans = find_phi(text, gazetteer);
    loop {
        let redacted_text = apply(text, &phi_spans);
        let extra = find_phi(&redacted_text, gazetteer);
        if extra.is_empty() {
            return RedactionResult {
                redacted_text,
                phi_spans,
            };
        }
        // (redacted offset, original offset) at the start of each untouched stretch
        let mut anchors = vec![(0usize, 0usize)];
        let mut shift: isize = 0;
        for s in &phi_spans {
            shift += s.kind.placeholder().len() as isize - (s.end - s.start) as isize;
            anchors.push(((s.end as isize + shift) as usize, s.end));
        }
        for e in extra {
            let (r0, o0) = anchors.iter().rev().find(|(r, _)| *r <= e.start).copied().unwrap_or((0, 0));
            phi_spans.push(PhiSpan {
                start: o0 + (e.start - r0),
                end: o0 + (e.end - r0),
                kind: e.kind,
            });
        }
        phi_spans.sort();
    }
}
