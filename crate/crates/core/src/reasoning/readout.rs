//! Patient graph → variable values.

use std::cmp::Ordering;

use super::{MedicalObject, PatientGraph, ReadoutValue, VariableReadout};
use crate::ontology::{OntologyGraph, SemanticAxis};
use crate::preprocess::DocumentCategory;
use crate::variables::{MedicalVariableKind, ValueRef};

fn value(o: &MedicalObject, date: bool) -> ReadoutValue {
    ReadoutValue {
        value: ValueRef::Concept(o.concept.clone()),
        date: if date { o.attributes.date } else { None },
        qualifier: o.attributes.qualifier.clone(),
        confidence: o.confidence,
    }
}

/// Higher confidence, then deeper concept, then more support, then smaller id.
fn rank(a: &MedicalObject, b: &MedicalObject, onto: &OntologyGraph) -> Ordering {
    let depth = |o: &MedicalObject| onto.depth(&o.concept).unwrap_or(0);
    b.confidence
        .total_cmp(&a.confidence)
        .then_with(|| depth(b).cmp(&depth(a)))
        .then_with(|| b.support().total_cmp(&a.support()))
        .then_with(|| a.concept.cmp(&b.concept))
}

fn best<'a>(pg: &'a PatientGraph, axis: SemanticAxis, onto: &OntologyGraph) -> Option<&'a MedicalObject> {
    pg.on_axis(axis).min_by(|a, b| rank(a, b, onto))
}

/// Single-valued variables take the top-ranked cluster of their axis.
/// Multi-valued variables take every cluster at or above `tau`; medications,
/// surgeries, biomarkers and procedures are reported once per concept,
/// outcomes and responses once per (concept, date). The diagnosis date is
/// the earliest date on a cluster compatible with the chosen neoplasm that
/// has pathology-report evidence, falling back to the earliest neoplasm date.
pub fn extract_variables(pg: &PatientGraph, onto: &OntologyGraph, tau: f64) -> VariableReadout {
    let mut out = VariableReadout::default();
    for var in MedicalVariableKind::ALL {
        if var == MedicalVariableKind::CancerDiagnosisDate {
            continue;
        }
        let axis = var.axis();
        if var.is_single_valued() {
            if let Some(o) = best(pg, axis, onto) {
                out.push(var, value(o, false));
            }
            continue;
        }
        let dated = matches!(var, MedicalVariableKind::Outcome | MedicalVariableKind::Response);
        let mut kept: Vec<&MedicalObject> = pg.on_axis(axis).filter(|o| o.confidence >= tau).collect();
        kept.sort_by(|a, b| rank(a, b, onto));
        let mut values: Vec<ReadoutValue> = Vec::new();
        for o in kept {
            let v = value(o, dated);
            if !values.iter().any(|x| x.value == v.value && x.date == v.date) {
                values.push(v);
            }
        }
        for v in values {
            out.push(var, v);
        }
    }

    if let Some(neo) = best(pg, SemanticAxis::Neoplasm, onto) {
        let related: Vec<&MedicalObject> = pg
            .on_axis(SemanticAxis::Neoplasm)
            .filter(|o| onto.compatible(&o.concept, &neo.concept).unwrap_or(false))
            .collect();
        let pathology = related
            .iter()
            .filter(|o| o.provenance.iter().any(|p| p.kind.category == DocumentCategory::Pathology))
            .filter_map(|o| o.attributes.date)
            .min();
        let date = pathology
            .or_else(|| related.iter().filter_map(|o| o.attributes.date).min())
            .or_else(|| pg.on_axis(SemanticAxis::Neoplasm).filter_map(|o| o.attributes.date).min());
        if let Some(date) = date {
            out.push(
                MedicalVariableKind::CancerDiagnosisDate,
                ReadoutValue {
                    value: ValueRef::Concept(neo.concept.clone()),
                    date: Some(date),
                    qualifier: None,
                    confidence: neo.confidence,
                },
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::Concept;
    use crate::reasoning::{Attributes, Provenance, ProvenanceKind};
    use chrono::NaiveDate;

    fn onto() -> OntologyGraph {
        OntologyGraph::from_concepts(vec![
            Concept::new("lung_cancer", SemanticAxis::Neoplasm, "lung cancer"),
            Concept::new("med_a", SemanticAxis::Medication, "med a"),
            Concept::new("med_b", SemanticAxis::Medication, "med b"),
        ])
        .unwrap()
    }

    fn obj(concept: &str, axis: SemanticAxis, confidence: f64, category: DocumentCategory) -> MedicalObject {
        MedicalObject {
            object_id: concept.into(),
            concept: concept.into(),
            axis,
            attributes: Attributes::default(),
            provenance: vec![Provenance {
                doc_id: "d".into(),
                mention_id: 0,
                kind: ProvenanceKind::source_record(category),
            }],
            confidence,
        }
    }

    #[test]
    fn empty_graph_reads_nothing() {
        let r = extract_variables(&PatientGraph::empty("p"), &onto(), 0.5);
        assert_eq!(r.values.len(), 13);
        assert!(r.is_empty());
    }

    #[test]
    fn pathology_date_becomes_diagnosis_date() {
        let mut o = obj("lung_cancer", SemanticAxis::Neoplasm, 2.0 / 3.0, DocumentCategory::Pathology);
        o.attributes.date = NaiveDate::from_ymd_opt(2019, 3, 4);
        let pg = PatientGraph {
            patient_id: "p".into(),
            objects: vec![o],
            links: Vec::new(),
        };
        let r = extract_variables(&pg, &onto(), 0.5);
        assert_eq!(r.get(MedicalVariableKind::Neoplasm)[0].value, ValueRef::Concept("lung_cancer".into()));
        assert_eq!(r.get(MedicalVariableKind::Neoplasm)[0].date, None);
        assert_eq!(r.get(MedicalVariableKind::CancerDiagnosisDate)[0].date, NaiveDate::from_ymd_opt(2019, 3, 4));
    }

    #[test]
    fn threshold_gates_medications() {
        let pg = PatientGraph {
            patient_id: "p".into(),
            objects: vec![
                obj("med_a", SemanticAxis::Medication, 0.8, DocumentCategory::SoapNote),
                obj("med_b", SemanticAxis::Medication, 0.3, DocumentCategory::SoapNote),
            ],
            links: Vec::new(),
        };
        let meds = extract_variables(&pg, &onto(), 0.5);
        let meds = meds.get(MedicalVariableKind::Medications);
        assert_eq!(meds.len(), 1);
        assert_eq!(meds[0].value, ValueRef::Concept("med_a".into()));
    }
}
