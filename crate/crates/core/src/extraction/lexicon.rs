//! Longest-match lexicon tagging over ontology names.

use std::collections::HashMap;

use super::patterns::{date_mentions, tnm_mentions};
use super::{resolve_overlaps, Candidate, EntityMention, EntityType, Tagger};
use crate::ontology::{normalize_name, ConceptId, OntologyGraph, SemanticAxis};

/// Byte spans of maximal ASCII-alphanumeric runs (non-ASCII letters count
/// as alphanumeric too).
fn token_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        if ch.is_alphanumeric() {
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            spans.push((s, i));
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

fn token_count(s: &str) -> usize {
    token_spans(s).len()
}

#[derive(Debug, Clone)]
struct Entry {
    concept_id: ConceptId,
    axis: SemanticAxis,
    depth: usize,
}

fn build_mention(text: &str, start: usize, end: usize, entries: &[Entry]) -> EntityMention {
    let surface = &text[start..end];
    let score = surface.chars().count() as f64;
    let mut ordered: Vec<&Entry> = entries.iter().collect();
    // deeper concepts first, so the entity type follows the most specific reading
    ordered.sort_by(|a, b| b.depth.cmp(&a.depth).then_with(|| a.concept_id.cmp(&b.concept_id)));
    EntityMention {
        mention_id: 0,
        surface: surface.to_string(),
        start,
        end,
        entity_type: EntityType::Concept(ordered[0].axis),
        candidates: ordered
            .iter()
            .map(|e| Candidate {
                concept_id: e.concept_id.clone(),
                score,
            })
            .collect(),
        date: None,
        stage_value: None,
    }
}

/// Case-insensitive longest match of preferred names and synonyms on token
/// boundaries, plus date and TNM patterns. Stage axes are left to the TNM
/// patterns so bare codes like `T2` inside prose are not double-counted.
pub struct LexiconTagger {
    entries: HashMap<String, Vec<Entry>>,
    max_tokens: usize,
    ontology: OntologyGraph,
}

impl LexiconTagger {
    pub fn new(ontology: &OntologyGraph) -> Self {
        Self::build(ontology, true)
    }

    fn build(ontology: &OntologyGraph, synonyms: bool) -> Self {
        let mut entries: HashMap<String, Vec<Entry>> = HashMap::new();
        let mut max_tokens = 1;
        for c in ontology.concepts() {
            if c.axis.is_tnm() {
                continue;
            }
            let names: Vec<&str> = if synonyms {
                c.names().collect()
            } else {
                vec![c.preferred_name.as_str()]
            };
            for name in names {
                let key = normalize_name(name);
                if key.is_empty() {
                    continue;
                }
                max_tokens = max_tokens.max(token_count(&key));
                let slot = entries.entry(key).or_default();
                if !slot.iter().any(|e| e.concept_id == c.concept_id) {
                    slot.push(Entry {
                        concept_id: c.concept_id.clone(),
                        axis: c.axis,
                        depth: ontology.depth(&c.concept_id).unwrap_or(0),
                    });
                }
            }
        }
        LexiconTagger {
            entries,
            max_tokens,
            ontology: ontology.clone(),
        }
    }

    fn lexicon_matches(&self, text: &str) -> Vec<EntityMention> {
        let tokens = token_spans(text);
        let mut found = Vec::new();
        for i in 0..tokens.len() {
            let start = tokens[i].0;
            // longest first; overlap resolution still sees every hit
            for j in (i..tokens.len().min(i + self.max_tokens)).rev() {
                let end = tokens[j].1;
                if let Some(entries) = self.entries.get(&normalize_name(&text[start..end])) {
                    found.push(build_mention(text, start, end, entries));
                    break;
                }
            }
        }
        found
    }
}

impl Tagger for LexiconTagger {
    fn tag(&self, text: &str) -> Vec<EntityMention> {
        let mut found = self.lexicon_matches(text);
        found.extend(tnm_mentions(text, &self.ontology));
        found.extend(date_mentions(text));
        resolve_overlaps(found)
    }
}

/// Deliberately plain tagger: preferred names only, found by substring search
/// on the ASCII-lowercased text. Used to check that the pipeline does not
/// depend on the lexicon tagger's internals.
pub struct PreferredNameTagger {
    names: Vec<(String, Vec<Entry>)>,
    ontology: OntologyGraph,
}

impl PreferredNameTagger {
    pub fn new(ontology: &OntologyGraph) -> Self {
        let lex = LexiconTagger::build(ontology, false);
        let mut names: Vec<(String, Vec<Entry>)> = lex.entries.into_iter().collect();
        names.sort_by(|a, b| a.0.cmp(&b.0));
        PreferredNameTagger {
            names,
            ontology: ontology.clone(),
        }
    }
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b >= 0x80
}

impl Tagger for PreferredNameTagger {
    fn tag(&self, text: &str) -> Vec<EntityMention> {
        let lower = text.to_ascii_lowercase();
        let bytes = lower.as_bytes();
        let mut found = Vec::new();
        for (name, entries) in &self.names {
            let mut from = 0;
            while let Some(pos) = lower[from..].find(name.as_str()) {
                let start = from + pos;
                let end = start + name.len();
                let left_ok = start == 0 || !is_word_byte(bytes[start - 1]);
                let right_ok = end == bytes.len() || !is_word_byte(bytes[end]);
                if left_ok && right_ok {
                    found.push(build_mention(text, start, end, entries));
                }
                from = start + 1;
                while !lower.is_char_boundary(from) {
                    from += 1;
                }
            }
        }
        found.extend(tnm_mentions(text, &self.ontology));
        found.extend(date_mentions(text));
        resolve_overlaps(found)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::Concept;

    fn toy() -> OntologyGraph {
        OntologyGraph::from_concepts(vec![
            Concept::new("cancer", SemanticAxis::Neoplasm, "cancer"),
            Concept::new("lung_cancer", SemanticAxis::Neoplasm, "lung cancer").with_parent("cancer"),
            Concept::new("lung", SemanticAxis::BodySite, "lung"),
        ])
        .unwrap()
    }

    #[test]
    fn longest_match_wins() {
        let ms = LexiconTagger::new(&toy()).tag("Known LUNG   Cancer patient");
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].surface, "LUNG   Cancer");
        assert_eq!(ms[0].candidates[0].concept_id, "lung_cancer");
    }

    #[test]
    fn token_boundaries_respected() {
        let ms = LexiconTagger::new(&toy()).tag("lungs and cancers, but lung.");
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].surface, "lung");
    }

    #[test]
    fn synonyms_and_punctuated_names() {
        let onto = OntologyGraph::bundled();
        let ms = LexiconTagger::new(&onto).tag("Started 5-FU; PD-L1 high; non-small cell lung cancer.");
        let ids: Vec<_> = ms.iter().map(|m| m.candidates[0].concept_id.as_str()).collect();
        assert_eq!(ids, ["fluorouracil", "pdl1", "high", "nsclc"]);
    }

    #[test]
    fn both_taggers_agree_on_preferred_names() {
        let onto = OntologyGraph::bundled();
        let text = "The patient started carboplatin on 2020-01-02. pT2a pN1 cM0. Histologic type: adenocarcinoma.";
        let a = LexiconTagger::new(&onto).tag(text);
        let b = PreferredNameTagger::new(&onto).tag(text);
        assert_eq!(a, b);
    }
}
