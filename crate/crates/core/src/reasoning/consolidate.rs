//! Object graphs → patient graph.

use std::collections::{BTreeSet, HashMap};

use super::{Attributes, MedicalObject, ObjectGraph, ObjectLink, PatientGraph, Provenance};
use crate::ontology::{OntologyGraph, SemanticAxis};
use crate::variables::MedicalVariableKind;

/// Laplace-smoothed support ratio; always strictly inside (0, 1).
pub fn confidence(s: f64, k: f64) -> f64 {
    (s + 1.0) / (s + k + 2.0)
}

/// Axes whose variable legitimately holds several values at once. Sibling
/// values there are not counter-evidence for each other.
pub fn is_multi_valued_axis(axis: SemanticAxis) -> bool {
    MedicalVariableKind::for_axis(axis).is_some_and(|v| !v.is_single_valued())
}

fn compatible(onto: &OntologyGraph, a: &str, b: &str) -> bool {
    onto.compatible(a, b).unwrap_or(a == b)
}

struct Cluster<'a> {
    members: Vec<&'a MedicalObject>,
}

impl Cluster<'_> {
    fn accepts(&self, o: &MedicalObject, onto: &OntologyGraph) -> bool {
        self.members
            .iter()
            .all(|m| compatible(onto, &m.concept, &o.concept) && m.attributes.consistent_with(&o.attributes))
    }
}

fn merge_attributes(members: &[&MedicalObject]) -> Attributes {
    // members are attribute-consistent, so the first present value is the value
    Attributes {
        date: members.iter().find_map(|m| m.attributes.date),
        qualifier: members.iter().find_map(|m| m.attributes.qualifier.clone()),
        stage_value: members.iter().find_map(|m| m.attributes.stage_value.clone()),
    }
}

/// Greedy clustering per axis. Objects are visited by (provenance count
/// desc, doc id, object id) and join the first cluster where they are
/// compatible and attribute-consistent with every member. Each cluster
/// emits one object carrying the most specific member concept and the union
/// of provenance; its confidence weighs its support `s` against the support
/// `k` of incompatible clusters on the same single-valued axis.
pub fn consolidate_patient(patient_id: &str, graphs: &[ObjectGraph], onto: &OntologyGraph) -> PatientGraph {
    let mut items: Vec<(&str, &MedicalObject)> = graphs
        .iter()
        .flat_map(|g| g.objects.iter().map(move |o| (g.doc_id.as_str(), o)))
        .collect();
    items.sort_by(|(da, a), (db, b)| {
        b.provenance
            .len()
            .cmp(&a.provenance.len())
            .then_with(|| da.cmp(db))
            .then_with(|| a.object_id.cmp(&b.object_id))
            .then_with(|| a.concept.cmp(&b.concept))
            .then_with(|| a.attributes.cmp(&b.attributes))
    });

    let mut objects = Vec::new();
    let mut cluster_of: HashMap<&str, String> = HashMap::new();

    for axis in SemanticAxis::ALL {
        let mut clusters: Vec<Cluster> = Vec::new();
        for &(_, o) in items.iter().filter(|(_, o)| o.axis == axis) {
            match clusters.iter_mut().find(|c| c.accepts(o, onto)) {
                Some(c) => c.members.push(o),
                None => clusters.push(Cluster { members: vec![o] }),
            }
        }

        let mut emitted: Vec<MedicalObject> = Vec::with_capacity(clusters.len());
        for (n, c) in clusters.iter().enumerate() {
            let concept = c.members[1..].iter().fold(c.members[0].concept.as_str(), |acc, m| {
                onto.most_specific(acc, &m.concept).unwrap_or(acc)
            });
            let provenance: BTreeSet<Provenance> =
                c.members.iter().flat_map(|m| m.provenance.iter().cloned()).collect();
            let object_id = format!("{patient_id}/{axis}/{n}");
            for m in &c.members {
                cluster_of.insert(m.object_id.as_str(), object_id.clone());
            }
            emitted.push(MedicalObject {
                object_id,
                concept: concept.to_string(),
                axis,
                attributes: merge_attributes(&c.members),
                provenance: provenance.into_iter().collect(),
                confidence: 0.0,
            });
        }

        let supports: Vec<f64> = emitted.iter().map(MedicalObject::support).collect();
        for i in 0..emitted.len() {
            let k: f64 = if is_multi_valued_axis(axis) {
                0.0
            } else {
                (0..emitted.len())
                    .filter(|&j| j != i && !compatible(onto, &emitted[i].concept, &emitted[j].concept))
                    .map(|j| supports[j])
                    .sum()
            };
            emitted[i].confidence = confidence(supports[i], k);
        }
        objects.extend(emitted);
    }

    let links: BTreeSet<ObjectLink> = graphs
        .iter()
        .flat_map(|g| &g.links)
        .filter_map(|l| {
            let from = cluster_of.get(l.from.as_str())?;
            let to = cluster_of.get(l.to.as_str())?;
            (from != to).then(|| ObjectLink {
                from: from.clone(),
                to: to.clone(),
                kind: l.kind,
            })
        })
        .collect();

    PatientGraph {
        patient_id: patient_id.to_string(),
        objects,
        links: links.into_iter().collect(),
    }
}
