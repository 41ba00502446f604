//! Cue-rule relation classifier.
//!
//! Every ordered pair of mentions (left before right in the text) that sits
//! in one sentence or within [`WINDOW_CHARS`] characters is checked against
//! the rule table. A rule fires when both endpoint types match and its cue
//! regex matches the text between the mentions, with any mention in between
//! replaced by a placeholder such as `<Medication>`. The edge runs from the
//! left mention to the right one and carries the best firing weight.
//!
//! Rule file lines: `relation_kind|left_axis|right_axis|cue_pattern|weight`,
//! where an axis is a semantic axis name, `Date`, or `*`.

use std::path::Path;
use std::str::FromStr;

use regex::Regex;

use super::{EntityMention, EntityType, RelationEdge, RelationKind};
use crate::error::{Error, Result};
use crate::ontology::SemanticAxis;

pub const WINDOW_CHARS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisPattern {
    Any,
    Date,
    Axis(SemanticAxis),
}

impl AxisPattern {
    fn matches(self, t: EntityType) -> bool {
        match (self, t) {
            (AxisPattern::Any, _) => true,
            (AxisPattern::Date, EntityType::Date) => true,
            (AxisPattern::Axis(a), EntityType::Concept(b)) => a == b,
            _ => false,
        }
    }
}

impl FromStr for AxisPattern {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "*" => Ok(AxisPattern::Any),
            d if d.eq_ignore_ascii_case("date") => Ok(AxisPattern::Date),
            other => other.parse().map(AxisPattern::Axis),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RelationRule {
    pub kind: RelationKind,
    pub left: AxisPattern,
    pub right: AxisPattern,
    pub cue: Regex,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct RelationRules {
    pub rules: Vec<RelationRule>,
}

const DEFAULT_RULES: &str = r"# kind|left|right|cue|weight
HasDate|*|Date|^[^<>.;!?\n]{0,40}$|0.9
HasDate|Date|*|^\s*[,:]?\s*$|0.6
HasInterpretation|Biomarker|Other|^\s*(?:testing by <Other>\s*)?(?:was|is|:)\s*$|0.9
HasInterpretation|Biomarker|Other|^\s*\(\s*$|0.8
HasMethod|Biomarker|Other|^\s*testing by\s*$|0.9
HasStage|Neoplasm|StageGroup|^[\s,(]*(?:AJCC\s*)?$|0.8
HasStage|Neoplasm|TStage|^[\s,(]*$|0.7
HasStage|Neoplasm|NStage|^[\s,(]*$|0.7
HasStage|Neoplasm|MStage|^[\s,(]*$|0.7
HasMorphology|Neoplasm|Morphology|^\s*(?:,|\(|with|of)?\s*$|0.7
HasMorphology|Morphology|Neoplasm|^\s*(?:of the|of)\s*$|0.7
TreatedWith|Neoplasm|Medication|(?i)\b(?:started|received|treated with|given)\b|0.7
TreatedWith|Neoplasm|Surgery|(?i)\b(?:underwent|treated with|resected by)\b|0.7
ResultedIn|Medication|Response|(?i)\b(?:resulted in|led to|with)\b|0.6
ResultedIn|Surgery|Outcome|(?i)\b(?:resulted in|led to|followed by)\b|0.6
ResultedIn|Medication|Outcome|(?i)\b(?:resulted in|led to)\b|0.6
";

impl RelationRules {
    pub fn defaults() -> Self {
        Self::parse(DEFAULT_RULES, "built-in rules").expect("default rules parse")
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            // the cue may itself contain `|`, so split the fixed fields from both ends
            let parts: Vec<&str> = line.splitn(4, '|').collect();
            let (cue, weight) = parts
                .get(3)
                .and_then(|rest| rest.rsplit_once('|'))
                .ok_or_else(|| Error::parse(source, n + 1, "expected kind|left|right|cue|weight"))?;
            let bad = |m: String| Error::parse(source, n + 1, m);
            let kind: RelationKind = parts[0].parse().map_err(bad)?;
            let left: AxisPattern = parts[1].parse().map_err(bad)?;
            let right: AxisPattern = parts[2].parse().map_err(bad)?;
            let cue = Regex::new(cue).map_err(|e| bad(format!("bad cue pattern: {e}")))?;
            let weight: f64 = weight
                .trim()
                .parse()
                .map_err(|e| bad(format!("bad weight `{}`: {e}", weight.trim())))?;
            if !(0.0..=1.0).contains(&weight) {
                return Err(bad(format!("weight {weight} outside [0, 1]")));
            }
            rules.push(RelationRule {
                kind,
                left,
                right,
                cue,
                weight,
            });
        }
        Ok(RelationRules { rules })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }
}

impl Default for RelationRules {
    fn default() -> Self {
        Self::defaults()
    }
}

/// Sentence index for every byte offset boundary: sentences end at `.`,
/// `!`, `?` or a newline.
fn sentence_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset]
        .iter()
        .filter(|&&b| matches!(b, b'.' | b'!' | b'?' | b'\n'))
        .count()
}

fn masked_between(mentions: &[EntityMention], i: usize, j: usize, text: &str) -> String {
    let (from, to) = (mentions[i].end, mentions[j].start);
    let mut out = String::with_capacity(to.saturating_sub(from));
    let mut at = from;
    for m in &mentions[i + 1..j] {
        out.push_str(&text[at..m.start]);
        out.push_str(&m.entity_type.placeholder());
        at = m.end;
    }
    out.push_str(&text[at..to]);
    out
}

/// Mentions must be sorted by start and non-overlapping (as taggers return
/// them).
pub fn classify_relations(mentions: &[EntityMention], text: &str, rules: &RelationRules) -> Vec<RelationEdge> {
    let sentences: Vec<usize> = mentions.iter().map(|m| sentence_of(text, m.start)).collect();
    let mut edges = Vec::new();
    for i in 0..mentions.len() {
        for j in i + 1..mentions.len() {
            let gap = text[mentions[i].end..mentions[j].start].chars().count();
            if gap > WINDOW_CHARS && sentences[i] != sentences[j] {
                // later mentions are farther away and in later sentences
                break;
            }
            let between = masked_between(mentions, i, j, text);
            for kind in RelationKind::ALL {
                let best = rules
                    .rules
                    .iter()
                    .filter(|r| {
                        r.kind == kind
                            && r.left.matches(mentions[i].entity_type)
                            && r.right.matches(mentions[j].entity_type)
                            && r.cue.is_match(&between)
                    })
                    .map(|r| r.weight)
                    .fold(None, |acc: Option<f64>, w| Some(acc.map_or(w, |a| a.max(w))));
                if let Some(score) = best {
                    edges.push(RelationEdge {
                        from: mentions[i].mention_id,
                        to: mentions[j].mention_id,
                        kind,
                        score,
                    });
                }
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::{LexiconTagger, Tagger};
    use crate::ontology::OntologyGraph;

    fn edges(text: &str) -> (Vec<EntityMention>, Vec<RelationEdge>) {
        let onto = OntologyGraph::bundled();
        let ms = LexiconTagger::new(&onto).tag(text);
        let es = classify_relations(&ms, text, &RelationRules::defaults());
        (ms, es)
    }

    #[test]
    fn surgery_date_adjacency() {
        let (ms, es) = edges("lobectomy performed on 2020-01-15");
        assert_eq!(es.len(), 1);
        assert_eq!(es[0].kind, RelationKind::HasDate);
        assert_eq!(ms[es[0].from].surface, "lobectomy");
        assert!(ms[es[0].to].date.is_some());
    }

    #[test]
    fn far_apart_sentences_have_no_edge() {
        let filler = "filler words here. ".repeat(110);
        let (_, es) = edges(&format!("lobectomy. {filler} 2020-01-15"));
        assert!(es.is_empty());
    }

    #[test]
    fn biomarker_method_and_interpretation() {
        let (ms, es) = edges("EGFR testing by PCR was positive.");
        let kinds: Vec<_> = es.iter().map(|e| (ms[e.from].surface.as_str(), ms[e.to].surface.as_str(), e.kind)).collect();
        assert!(kinds.contains(&("EGFR", "PCR", RelationKind::HasMethod)));
        assert!(kinds.contains(&("EGFR", "positive", RelationKind::HasInterpretation)));
        assert_eq!(kinds.len(), 2);
    }

    #[test]
    fn intervening_mention_blocks_date() {
        let (ms, es) = edges("carboplatin on 2020-01-02; pemetrexed on 2020-02-03");
        let dated: Vec<_> = es.iter().map(|e| (ms[e.from].surface.as_str(), ms[e.to].surface.as_str())).collect();
        assert_eq!(dated, [("carboplatin", "2020-01-02"), ("pemetrexed", "2020-02-03")]);
    }

    #[test]
    fn rule_file_format() {
        let r = RelationRules::parse("HasDate|Surgery|Date|^ on (a|b)$|0.5\n", "t").unwrap();
        assert_eq!(r.rules.len(), 1);
        assert!(r.rules[0].cue.is_match(" on b"));
        assert!(RelationRules::parse("HasDate|Nowhere|Date|x|0.5\n", "t").is_err());
        assert!(RelationRules::parse("HasDate|*|Date|x|1.5\n", "t").is_err());
    }
}
