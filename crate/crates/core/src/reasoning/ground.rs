//! Tag graph → object graph.

use std::collections::{BTreeSet, HashMap};

use super::{Attributes, MedicalObject, ObjectGraph, ObjectLink, Provenance, ProvenanceKind};
use crate::extraction::{EntityMention, EntityType, MentionId, RelationEdge, RelationKind, TagGraph};
use crate::ontology::{ConceptId, OntologyGraph};

/// Picks the winning candidate of a mention: most pooled votes, then the
/// deeper concept, then the smaller id.
fn vote<'a>(m: &'a EntityMention, votes: &HashMap<&str, f64>, onto: &OntologyGraph) -> Option<(&'a str, f64)> {
    let mut best: Option<(&str, f64, usize)> = None;
    let mut mass = 0.0;
    for c in m.candidates.iter().filter(|c| onto.contains(&c.concept_id)) {
        let v = votes.get(c.concept_id.as_str()).copied().unwrap_or(0.0);
        mass += v;
        let depth = onto.depth(&c.concept_id).unwrap_or(0);
        let better = match best {
            None => true,
            Some((id, bv, bd)) => {
                v > bv || (v == bv && (depth > bd || (depth == bd && c.concept_id.as_str() < id)))
            }
        };
        if better {
            best = Some((c.concept_id.as_str(), v, depth));
        }
    }
    best.map(|(id, v, _)| (id, if mass > 0.0 { v / mass } else { 1.0 }))
}

fn gap(a: &EntityMention, b: &EntityMention) -> usize {
    if a.end <= b.start {
        b.start - a.end
    } else {
        a.start.saturating_sub(b.end)
    }
}

/// Best edge of `kind` touching `m` whose other end satisfies `pick`:
/// highest score, then nearest, then earliest other end.
fn best_partner<'a>(
    tg: &'a TagGraph,
    m: &EntityMention,
    kind: RelationKind,
    pick: impl Fn(&EntityMention) -> bool,
) -> Option<&'a EntityMention> {
    let mut best: Option<(&RelationEdge, &EntityMention)> = None;
    for e in tg.edges.iter().filter(|e| e.kind == kind) {
        let other = if e.from == m.mention_id {
            e.to
        } else if e.to == m.mention_id {
            e.from
        } else {
            continue;
        };
        let Some(o) = tg.mention(other) else { continue };
        if !pick(o) {
            continue;
        }
        let better = match best {
            None => true,
            Some((be, bo)) => {
                e.score > be.score
                    || (e.score == be.score && (gap(m, o), o.start) < (gap(m, bo), bo.start))
            }
        };
        if better {
            best = Some((e, o));
        }
    }
    best.map(|(_, o)| o)
}

/// Turns every concept mention into an object. Candidate votes are pooled
/// over the whole document, so a vague mention is pulled toward the reading
/// its neighbours support. Mentions that ground to the same concept with the
/// same attributes share one object. Dates and interpretations attach as
/// attributes; other relations become links.
pub fn ground_tag_graph(tg: &TagGraph, onto: &OntologyGraph, kind: ProvenanceKind) -> ObjectGraph {
    let mut votes: HashMap<&str, f64> = HashMap::new();
    for m in &tg.mentions {
        for c in &m.candidates {
            *votes.entry(c.concept_id.as_str()).or_default() += c.score;
        }
    }

    let grounded: HashMap<MentionId, (&str, f64)> = tg
        .mentions
        .iter()
        .filter(|m| matches!(m.entity_type, EntityType::Concept(_)))
        .filter_map(|m| vote(m, &votes, onto).map(|g| (m.mention_id, g)))
        .collect();

    let mut objects: Vec<MedicalObject> = Vec::new();
    let mut index: HashMap<(ConceptId, Attributes), usize> = HashMap::new();
    let mut object_of: HashMap<MentionId, usize> = HashMap::new();

    for m in &tg.mentions {
        let Some(&(concept, share)) = grounded.get(&m.mention_id) else { continue };
        let Ok(c) = onto.get(concept) else { continue };
        let date = best_partner(tg, m, RelationKind::HasDate, |o| o.entity_type == EntityType::Date)
            .and_then(|o| o.date);
        let qualifier = best_partner(tg, m, RelationKind::HasInterpretation, |o| grounded.contains_key(&o.mention_id))
            .and_then(|o| onto.concept(grounded[&o.mention_id].0))
            .map(|q| q.preferred_name.clone());
        let attributes = Attributes {
            date,
            qualifier,
            stage_value: m.stage_value.clone(),
        };
        let provenance = Provenance {
            doc_id: tg.doc_id.clone(),
            mention_id: m.mention_id,
            kind,
        };
        let key = (c.concept_id.clone(), attributes.clone());
        let slot = *index.entry(key).or_insert_with(|| {
            objects.push(MedicalObject {
                object_id: format!("{}/o{}", tg.doc_id, objects.len()),
                concept: c.concept_id.clone(),
                axis: c.axis,
                attributes,
                provenance: Vec::new(),
                confidence: share,
            });
            objects.len() - 1
        });
        let obj = &mut objects[slot];
        obj.provenance.push(provenance);
        obj.confidence = obj.confidence.max(share);
        object_of.insert(m.mention_id, slot);
    }

    let links: BTreeSet<ObjectLink> = tg
        .edges
        .iter()
        .filter(|e| e.kind != RelationKind::HasDate)
        .filter_map(|e| {
            let (a, b) = (object_of.get(&e.from)?, object_of.get(&e.to)?);
            (a != b).then(|| ObjectLink {
                from: objects[*a].object_id.clone(),
                to: objects[*b].object_id.clone(),
                kind: e.kind,
            })
        })
        .collect();

    ObjectGraph {
        doc_id: tg.doc_id.clone(),
        objects,
        links: links.into_iter().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::Candidate;
    use crate::ontology::{Concept, SemanticAxis};
    use crate::preprocess::DocumentCategory;

    fn onto() -> OntologyGraph {
        OntologyGraph::from_concepts(vec![
            Concept::new("cancer", SemanticAxis::Neoplasm, "cancer"),
            Concept::new("lung_cancer", SemanticAxis::Neoplasm, "lung cancer").with_parent("cancer"),
            Concept::new("breast_cancer", SemanticAxis::Neoplasm, "breast cancer").with_parent("cancer"),
        ])
        .unwrap()
    }

    fn mention(id: usize, cands: &[(&str, f64)]) -> EntityMention {
        EntityMention {
            mention_id: id,
            surface: "x".into(),
            start: id * 10,
            end: id * 10 + 1,
            entity_type: EntityType::Concept(SemanticAxis::Neoplasm),
            candidates: cands
                .iter()
                .map(|(c, s)| Candidate {
                    concept_id: c.to_string(),
                    score: *s,
                })
                .collect(),
            date: None,
            stage_value: None,
        }
    }

    fn ground(mentions: Vec<EntityMention>) -> ObjectGraph {
        let tg = TagGraph {
            doc_id: "d".into(),
            mentions,
            edges: Vec::new(),
        };
        ground_tag_graph(&tg, &onto(), ProvenanceKind::source_record(DocumentCategory::Other))
    }

    #[test]
    fn single_candidate() {
        let g = ground(vec![mention(0, &[("lung_cancer", 11.0)])]);
        assert_eq!(g.objects.len(), 1);
        assert_eq!(g.objects[0].concept, "lung_cancer");
    }

    #[test]
    fn equal_votes_prefer_specific() {
        let g = ground(vec![mention(0, &[("cancer", 1.0), ("lung_cancer", 1.0)])]);
        assert_eq!(g.objects[0].concept, "lung_cancer");
    }

    #[test]
    fn vote_mass_pulls_ambiguous_mention() {
        // 3 x lung_cancer at 1.0 plus one ambiguous mention: lung_cancer 3+0.5, breast 0.9
        let mut ms: Vec<_> = (0..3).map(|i| mention(i, &[("lung_cancer", 1.0)])).collect();
        ms.push(mention(3, &[("breast_cancer", 0.9), ("lung_cancer", 0.5)]));
        let g = ground(ms);
        assert_eq!(g.objects.len(), 1);
        assert_eq!(g.objects[0].concept, "lung_cancer");
        assert_eq!(g.objects[0].provenance.len(), 4);
    }
}
