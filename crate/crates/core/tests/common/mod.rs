//! Generators and independent oracles shared by the randomized suites.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;

use medrec_core::extraction::RelationKind;
use medrec_core::llm::Chunk;
use medrec_core::ontology::{Concept, OntologyGraph, SemanticAxis};
use medrec_core::preprocess::{DocProvenance, DocumentCategory};
use medrec_core::reasoning::{Attributes, MedicalObject, ObjectGraph, ObjectLink, PatientGraph, Provenance, ProvenanceKind};

// ---------------------------------------------------------------- ontologies

/// Concept list plus its parent map, kept apart from the graph so oracles
/// never consult the code under test.
pub struct RandomOntology {
    pub graph: OntologyGraph,
    pub parents: HashMap<String, Vec<String>>,
    pub by_axis: BTreeMap<SemanticAxis, Vec<String>>,
}

/// One single-valued and one multi-valued axis. Every concept after the
/// first picks one parent (`tree`) or one or two parents among earlier
/// concepts of its axis; a few stay extra roots.
pub fn random_ontology<R: Rng>(rng: &mut R, tree: bool) -> RandomOntology {
    let mut concepts = Vec::new();
    let mut parents = HashMap::new();
    let mut by_axis = BTreeMap::new();
    for (axis, prefix) in [(SemanticAxis::Neoplasm, "neo"), (SemanticAxis::Medication, "med")] {
        let n = rng.gen_range(1..=10);
        let mut ids: Vec<String> = Vec::new();
        for j in 0..n {
            let id = format!("{prefix}{j}");
            let mut c = Concept::new(&id, axis, &format!("{prefix} term {j}"));
            let mut ps: Vec<String> = Vec::new();
            if j > 0 && rng.gen_bool(0.85) {
                let max = if tree { 1 } else { 2.min(j) };
                for _ in 0..rng.gen_range(1..=max) {
                    let p = ids[rng.gen_range(0..j)].clone();
                    if !ps.contains(&p) {
                        ps.push(p);
                    }
                }
            }
            for p in &ps {
                c = c.with_parent(p);
            }
            parents.insert(id.clone(), ps);
            ids.push(id);
            concepts.push(c);
        }
        by_axis.insert(axis, ids);
    }
    RandomOntology {
        graph: OntologyGraph::from_concepts(concepts).expect("random ontology is a DAG"),
        parents,
        by_axis,
    }
}

/// Reflexive-transitive reachability by breadth-first search over parents.
pub fn reaches(parents: &HashMap<String, Vec<String>>, from: &str, to: &str) -> bool {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([from.to_string()]);
    while let Some(c) = queue.pop_front() {
        if c == to {
            return true;
        }
        if seen.insert(c.clone()) {
            queue.extend(parents.get(&c).into_iter().flatten().cloned());
        }
    }
    false
}

pub fn oracle_compatible(o: &RandomOntology, a: &str, b: &str) -> bool {
    let axis_of = |id: &str| o.by_axis.iter().find(|(_, ids)| ids.iter().any(|x| x == id)).map(|(a, _)| *a);
    axis_of(a) == axis_of(b) && (reaches(&o.parents, a, b) || reaches(&o.parents, b, a))
}

// ------------------------------------------------------------- object graphs

const DATES: [Option<(i32, u32, u32)>; 4] = [None, None, Some((2020, 1, 1)), Some((2021, 6, 30))];

/// Random per-document object graphs. Every provenance entry is unique
/// across the whole set, so cluster membership can be recovered from the
/// output by provenance alone.
pub fn random_object_graphs<R: Rng>(rng: &mut R, onto: &RandomOntology) -> Vec<ObjectGraph> {
    let n_docs = rng.gen_range(1..=4);
    let mut mention = 0;
    let mut graphs = Vec::new();
    for d in 0..n_docs {
        let doc_id = format!("p/r{d}.s0");
        let mut objects = Vec::new();
        for n in 0..rng.gen_range(0..=6) {
            let axis = if rng.gen_bool(0.6) {
                SemanticAxis::Neoplasm
            } else {
                SemanticAxis::Medication
            };
            let ids = &onto.by_axis[&axis];
            let concept = ids[rng.gen_range(0..ids.len())].clone();
            let date = DATES[rng.gen_range(0..DATES.len())].map(|(y, m, d)| NaiveDate::from_ymd_opt(y, m, d).unwrap());
            let provenance = (0..rng.gen_range(1..=3))
                .map(|_| {
                    mention += 1;
                    let kind = if rng.gen_bool(0.25) {
                        ProvenanceKind {
                            category: DocumentCategory::LlmAnswer,
                            source: DocProvenance::LlmAnswer(rng.gen_range(1..=31)),
                        }
                    } else {
                        ProvenanceKind::source_record(
                            *[DocumentCategory::Pathology, DocumentCategory::SoapNote, DocumentCategory::Other]
                                .choose(rng)
                                .unwrap(),
                        )
                    };
                    Provenance {
                        doc_id: doc_id.clone(),
                        mention_id: mention,
                        kind,
                    }
                })
                .collect();
            objects.push(MedicalObject {
                object_id: format!("{doc_id}/o{n}"),
                concept,
                axis,
                attributes: Attributes {
                    date,
                    qualifier: None,
                    stage_value: None,
                },
                provenance,
                confidence: 1.0,
            });
        }
        let mut links = Vec::new();
        if objects.len() > 1 {
            for _ in 0..rng.gen_range(0..3) {
                let a = rng.gen_range(0..objects.len());
                let b = rng.gen_range(0..objects.len());
                if a != b {
                    links.push(ObjectLink {
                        from: objects[a].object_id.clone(),
                        to: objects[b].object_id.clone(),
                        kind: RelationKind::TreatedWith,
                    });
                }
            }
        }
        graphs.push(ObjectGraph { doc_id, objects, links });
    }
    graphs
}

/// Patient graph with object ids abstracted away: objects become sorted
/// content tuples, links point at those tuples.
pub type Canonical = (
    Vec<(SemanticAxis, String, Attributes, Vec<Provenance>, u64)>,
    BTreeSet<(usize, usize, RelationKind)>,
);

pub fn canonical(pg: &PatientGraph) -> Canonical {
    let key = |o: &MedicalObject| {
        let mut prov = o.provenance.clone();
        prov.sort();
        (o.axis, o.concept.clone(), o.attributes.clone(), prov, o.confidence.to_bits())
    };
    let mut objects: Vec<_> = pg.objects.iter().map(key).collect();
    objects.sort();
    let pos = |id: &str| {
        let o = pg.objects.iter().find(|o| o.object_id == id).expect("link endpoint resolves");
        objects.binary_search(&key(o)).unwrap()
    };
    let links = pg.links.iter().map(|l| (pos(&l.from), pos(&l.to), l.kind)).collect();
    (objects, links)
}

/// Post-hoc checks on a consolidated graph against its inputs; returns the
/// first violation found.
pub fn check_clusters(inputs: &[ObjectGraph], pg: &PatientGraph, o: &RandomOntology) -> Result<(), String> {
    let key = |p: &Provenance| (p.doc_id.clone(), p.mention_id);
    let all: Vec<&MedicalObject> = inputs.iter().flat_map(|g| &g.objects).collect();
    let mut assigned = vec![0usize; all.len()];
    for out in &pg.objects {
        if !(out.confidence > 0.0 && out.confidence < 1.0) {
            return Err(format!("confidence {} of {} outside (0, 1)", out.confidence, out.object_id));
        }
        let prov: BTreeSet<_> = out.provenance.iter().map(key).collect();
        let members: Vec<usize> = (0..all.len())
            .filter(|&i| all[i].provenance.iter().all(|p| prov.contains(&key(p))))
            .collect();
        let covered: BTreeSet<_> = members.iter().flat_map(|&i| all[i].provenance.iter().map(key)).collect();
        if covered != prov {
            return Err(format!("{} carries provenance of no member", out.object_id));
        }
        for &i in &members {
            assigned[i] += 1;
            let m = all[i];
            if m.axis != out.axis {
                return Err(format!("{} mixes axes", out.object_id));
            }
            if !reaches(&o.parents, &out.concept, &m.concept) {
                return Err(format!("{}: {} is not a subtype of member {}", out.object_id, out.concept, m.concept));
            }
            for &j in &members {
                if !oracle_compatible(o, &m.concept, &all[j].concept) {
                    return Err(format!("{}: members {} and {} incompatible", out.object_id, m.concept, all[j].concept));
                }
            }
        }
    }
    match assigned.iter().position(|&n| n != 1) {
        Some(i) => Err(format!("input {} lands in {} clusters", all[i].object_id, assigned[i])),
        None => Ok(()),
    }
}

// ------------------------------------------------------------------ retrieval

const WORDS: [&str; 24] = [
    "tumor", "lung", "breast", "biopsy", "stage", "carboplatin", "patient", "the", "of", "and", "node", "scan",
    "margin", "positive", "negative", "EGFR", "grade", "resection", "follow", "up", "dose", "cycle", "pain", "report",
];

pub fn random_sentence<R: Rng>(rng: &mut R, max_words: usize) -> String {
    let n = rng.gen_range(0..=max_words);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// Up to `max` chunks over a handful of documents; short texts from a small
/// vocabulary make exact score ties common.
pub fn random_chunks<R: Rng>(rng: &mut R, max: usize) -> Vec<Chunk> {
    let n = rng.gen_range(1..=max);
    let n_docs = rng.gen_range(1..=8);
    let mut ordinals = vec![0usize; n_docs];
    let mut chunks: Vec<Chunk> = (0..n)
        .map(|_| {
            let d = rng.gen_range(0..n_docs);
            let ordinal = ordinals[d];
            ordinals[d] += 1;
            let text = random_sentence(rng, 6);
            Chunk {
                chunk_id: format!("p/d{d}#{ordinal}"),
                patient_id: "p".into(),
                source_doc_id: format!("p/d{d}"),
                ordinal,
                token_count: text.split_whitespace().count(),
                text,
            }
        })
        .collect();
    chunks.shuffle(rng);
    chunks
}

pub fn oracle_cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

/// Full sort of every chunk by (score desc, doc id, ordinal), cut at `k`.
/// Returns ids and scores.
pub fn brute_force_top_k(query: &[f64], chunks: &[Chunk], vectors: &[Vec<f64>], k: usize) -> Vec<(String, f64)> {
    let mut scored: Vec<(f64, &Chunk)> = chunks.iter().zip(vectors).map(|(c, v)| (oracle_cosine(query, v), c)).collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| a.1.source_doc_id.cmp(&b.1.source_doc_id))
            .then_with(|| a.1.ordinal.cmp(&b.1.ordinal))
    });
    scored.into_iter().take(k).map(|(s, c)| (c.chunk_id.clone(), s)).collect()
}

/// Retrieved ids agree with the oracle, or differ only where the two
/// cosine computations round differently on a near tie.
pub fn agrees_with_oracle(got: &[Chunk], oracle: &[(String, f64)], query: &[f64], vectors: &HashMap<String, Vec<f64>>) -> bool {
    if got.len() != oracle.len() {
        return false;
    }
    got.iter().zip(oracle).all(|(c, (id, score))| {
        c.chunk_id == *id || (oracle_cosine(query, &vectors[&c.chunk_id]) - score).abs() < 1e-12
    })
}
