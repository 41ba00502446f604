//! Date and TNM pattern taggers.

use std::sync::OnceLock;

use chrono::NaiveDate;
use regex::Regex;

use super::{Candidate, EntityMention, EntityType};
use crate::ontology::{OntologyGraph, SemanticAxis};

const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

fn month_number(name: &str) -> Option<u32> {
    let lower = name.to_ascii_lowercase();
    let lower = lower.trim_end_matches('.');
    MONTHS
        .iter()
        .position(|m| *m == lower || (lower.len() >= 3 && m.starts_with(lower)))
        .map(|i| i as u32 + 1)
}

struct DateRegexes {
    iso: Regex,
    us: Regex,
    long: Regex,
}

fn date_regexes() -> &'static DateRegexes {
    static R: OnceLock<DateRegexes> = OnceLock::new();
    R.get_or_init(|| DateRegexes {
        iso: Regex::new(r"\b(\d{4})-(\d{2})-(\d{2})\b").unwrap(),
        us: Regex::new(r"\b(\d{1,2})/(\d{1,2})/(\d{4})\b").unwrap(),
        long: Regex::new(
            r"(?i)\b(January|February|March|April|May|June|July|August|September|October|November|December|Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sept|Sep|Oct|Nov|Dec)\.? (\d{1,2}), (\d{4})\b",
        )
        .unwrap(),
    })
}

fn mention(text: &str, start: usize, end: usize, entity_type: EntityType) -> EntityMention {
    EntityMention {
        mention_id: 0,
        surface: text[start..end].to_string(),
        start,
        end,
        entity_type,
        candidates: Vec::new(),
        date: None,
        stage_value: None,
    }
}

/// ISO, US and long-form dates, normalized to calendar dates. Impossible
/// dates (2019-02-30) are ignored.
pub fn date_mentions(text: &str) -> Vec<EntityMention> {
    let r = date_regexes();
    let mut out = Vec::new();
    let mut push = |start: usize, end: usize, date: Option<NaiveDate>| {
        if let Some(d) = date {
            let mut m = mention(text, start, end, EntityType::Date);
            m.date = Some(d);
            out.push(m);
        }
    };
    let num = |s: &str| s.parse::<u32>().ok();
    for c in r.iso.captures_iter(text) {
        let whole = c.get(0).expect("match");
        let d = c[1]
            .parse::<i32>()
            .ok()
            .and_then(|y| NaiveDate::from_ymd_opt(y, num(&c[2])?, num(&c[3])?));
        push(whole.start(), whole.end(), d);
    }
    for c in r.us.captures_iter(text) {
        let whole = c.get(0).expect("match");
        let d = c[3]
            .parse::<i32>()
            .ok()
            .and_then(|y| NaiveDate::from_ymd_opt(y, num(&c[1])?, num(&c[2])?));
        push(whole.start(), whole.end(), d);
    }
    for c in r.long.captures_iter(text) {
        let whole = c.get(0).expect("match");
        let d = c[3]
            .parse::<i32>()
            .ok()
            .and_then(|y| NaiveDate::from_ymd_opt(y, month_number(&c[1])?, num(&c[2])?));
        push(whole.start(), whole.end(), d);
    }
    out
}

fn tnm_regex() -> &'static Regex {
    static R: OnceLock<Regex> = OnceLock::new();
    R.get_or_init(|| {
        Regex::new(r"\b(?:[cpyra]{1,2})?(T(?:is|X|[0-4][a-d]?)|N(?:X|[0-3][a-c]?)|M(?:X|[01][a-d]?))\b").unwrap()
    })
}

/// Splits a TNM token such as `pT2a` into its axis and bare code (`T2a`).
pub fn parse_tnm_code(token: &str) -> Option<(SemanticAxis, String)> {
    let c = tnm_regex().captures(token)?;
    if c.get(0)?.as_str() != token {
        return None;
    }
    let code = c[1].to_string();
    let axis = match code.as_bytes()[0] {
        b'T' => SemanticAxis::TStage,
        b'N' => SemanticAxis::NStage,
        _ => SemanticAxis::MStage,
    };
    Some((axis, code))
}

/// Stage-axis mentions for TNM tokens. The concept is the one named by the
/// code; an unknown subcategory (`T2d`) falls back to its parent code.
pub fn tnm_mentions(text: &str, onto: &OntologyGraph) -> Vec<EntityMention> {
    let mut out = Vec::new();
    for c in tnm_regex().captures_iter(text) {
        let whole = c.get(0).expect("match");
        let code = &c[1];
        let axis = match code.as_bytes()[0] {
            b'T' => SemanticAxis::TStage,
            b'N' => SemanticAxis::NStage,
            _ => SemanticAxis::MStage,
        };
        let concept = onto.lookup(code, axis).or_else(|| {
            let trimmed = code.trim_end_matches(|ch: char| ch.is_ascii_lowercase());
            (trimmed.len() < code.len()).then(|| onto.lookup(trimmed, axis)).flatten()
        });
        let Some(concept) = concept else { continue };
        let mut m = mention(text, whole.start(), whole.end(), EntityType::Concept(axis));
        m.candidates.push(Candidate {
            concept_id: concept.concept_id.clone(),
            score: m.surface.chars().count() as f64,
        });
        m.stage_value = Some(code.to_string());
        out.push(m);
    }
    out
}
