//! Entity tagging and relation classification into per-document tag graphs.
//!
//! The tagger is a trait so a learned sequence tagger can replace the
//! lexicon tagger without touching grounding or consolidation.

mod lexicon;
mod patterns;
mod relations;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::ontology::{ConceptId, OntologyGraph, SemanticAxis};
use crate::preprocess::ClinicalDocument;

pub use lexicon::{LexiconTagger, PreferredNameTagger};
pub use patterns::{date_mentions, parse_tnm_code, tnm_mentions};
pub use relations::{classify_relations, AxisPattern, RelationRule, RelationRules, WINDOW_CHARS};

pub type MentionId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityType {
    Concept(SemanticAxis),
    Date,
}

impl EntityType {
    /// Placeholder written over intervening mentions when relation cues are
    /// matched, e.g. `<Medication>` or `<Date>`.
    pub fn placeholder(self) -> String {
        match self {
            EntityType::Concept(axis) => format!("<{axis}>"),
            EntityType::Date => "<Date>".to_string(),
        }
    }

    pub fn axis(self) -> Option<SemanticAxis> {
        match self {
            EntityType::Concept(a) => Some(a),
            EntityType::Date => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub concept_id: ConceptId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityMention {
    pub mention_id: MentionId,
    pub surface: String,
    /// Byte offsets into the document text.
    pub start: usize,
    pub end: usize,
    pub entity_type: EntityType,
    /// Sorted by score descending, then concept id.
    pub candidates: Vec<Candidate>,
    /// Parsed date for `Date` mentions.
    pub date: Option<NaiveDate>,
    /// Raw TNM code (`T2a`, `N1`) for stage mentions.
    pub stage_value: Option<String>,
}

impl EntityMention {
    pub fn overlaps(&self, other: &EntityMention) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationKind {
    HasDate,
    HasStage,
    HasMorphology,
    HasInterpretation,
    HasMethod,
    TreatedWith,
    ResultedIn,
}

impl RelationKind {
    pub const ALL: [RelationKind; 7] = [
        RelationKind::HasDate,
        RelationKind::HasStage,
        RelationKind::HasMorphology,
        RelationKind::HasInterpretation,
        RelationKind::HasMethod,
        RelationKind::TreatedWith,
        RelationKind::ResultedIn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::HasDate => "HasDate",
            RelationKind::HasStage => "HasStage",
            RelationKind::HasMorphology => "HasMorphology",
            RelationKind::HasInterpretation => "HasInterpretation",
            RelationKind::HasMethod => "HasMethod",
            RelationKind::TreatedWith => "TreatedWith",
            RelationKind::ResultedIn => "ResultedIn",
        }
    }
}

impl std::str::FromStr for RelationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown relation kind `{}`", s.trim()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationEdge {
    pub from: MentionId,
    pub to: MentionId,
    pub kind: RelationKind,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagGraph {
    pub doc_id: String,
    pub mentions: Vec<EntityMention>,
    pub edges: Vec<RelationEdge>,
}

impl TagGraph {
    pub fn mention(&self, id: MentionId) -> Option<&EntityMention> {
        self.mentions.iter().find(|m| m.mention_id == id)
    }
}

/// Anything that turns text into non-overlapping mentions, sorted by start,
/// with `mention_id` equal to the position in the returned list.
pub trait Tagger: Send + Sync {
    fn tag(&self, text: &str) -> Vec<EntityMention>;
}

/// Keeps the longest of overlapping mentions (earliest start on ties), sorts
/// by start and renumbers.
pub fn resolve_overlaps(mut found: Vec<EntityMention>) -> Vec<EntityMention> {
    found.sort_by(|a, b| {
        (b.end - b.start)
            .cmp(&(a.end - a.start))
            .then(a.start.cmp(&b.start))
    });
    let mut kept: Vec<EntityMention> = Vec::with_capacity(found.len());
    for m in found {
        if !kept.iter().any(|k| k.overlaps(&m)) {
            kept.push(m);
        }
    }
    kept.sort_by_key(|m| m.start);
    for (i, m) in kept.iter_mut().enumerate() {
        m.mention_id = i;
    }
    kept
}

/// Tags entities with `tagger` and classifies relations with `rules`.
pub struct Extractor {
    pub tagger: Box<dyn Tagger>,
    pub rules: RelationRules,
}

impl Extractor {
    pub fn new(tagger: Box<dyn Tagger>, rules: RelationRules) -> Self {
        Extractor { tagger, rules }
    }

    /// Lexicon tagger over `ontology` with the default cue rules.
    pub fn lexicon(ontology: &OntologyGraph) -> Self {
        Extractor::new(Box::new(LexiconTagger::new(ontology)), RelationRules::defaults())
    }

    pub fn build_tag_graph(&self, doc: &ClinicalDocument) -> TagGraph {
        let mentions = self.tagger.tag(&doc.text);
        let edges = classify_relations(&mentions, &doc.text, &self.rules);
        TagGraph {
            doc_id: doc.doc_id.clone(),
            mentions,
            edges,
        }
    }
}

/// One-shot helper using the lexicon tagger and default rules.
pub fn build_tag_graph(doc: &ClinicalDocument, ontology: &OntologyGraph) -> TagGraph {
    Extractor::lexicon(ontology).build_tag_graph(doc)
}
