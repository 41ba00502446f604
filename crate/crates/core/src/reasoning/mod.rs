//! Symbolic reasoning: ground tag graphs into object graphs, consolidate a
//! patient's object graphs, and read out the thirteen variables.

mod consolidate;
mod ground;
mod readout;

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::extraction::{MentionId, RelationKind};
use crate::ontology::{ConceptId, SemanticAxis};
use crate::preprocess::{DocProvenance, DocumentCategory};
use crate::variables::{MedicalVariableKind, ValueRef};

pub use consolidate::{confidence, consolidate_patient, is_multi_valued_axis};
pub use ground::ground_tag_graph;
pub use readout::extract_variables;

/// Default readout threshold for multi-valued variables.
pub const DEFAULT_TAU: f64 = 0.5;

/// Support contributed by one mention found in a generated answer, relative
/// to a mention in a source record.
pub const LLM_ANSWER_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProvenanceKind {
    pub category: DocumentCategory,
    pub source: DocProvenance,
}

impl ProvenanceKind {
    pub fn source_record(category: DocumentCategory) -> Self {
        ProvenanceKind {
            category,
            source: DocProvenance::SourceRecord,
        }
    }

    pub fn weight(self) -> f64 {
        match self.source {
            DocProvenance::SourceRecord => 1.0,
            DocProvenance::LlmAnswer(_) => LLM_ANSWER_WEIGHT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub doc_id: String,
    pub mention_id: MentionId,
    pub kind: ProvenanceKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Attributes {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    /// Interpretation of a biomarker result, e.g. `positive`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualifier: Option<String>,
    /// Raw TNM code as written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage_value: Option<String>,
}

impl Attributes {
    /// Dates equal when both present, stage values equal when both present.
    pub fn consistent_with(&self, other: &Attributes) -> bool {
        fn agree<T: PartialEq>(a: &Option<T>, b: &Option<T>) -> bool {
            match (a, b) {
                (Some(x), Some(y)) => x == y,
                _ => true,
            }
        }
        agree(&self.date, &other.date) && agree(&self.stage_value, &other.stage_value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedicalObject {
    pub object_id: String,
    pub concept: ConceptId,
    pub axis: SemanticAxis,
    pub attributes: Attributes,
    pub provenance: Vec<Provenance>,
    pub confidence: f64,
}

impl MedicalObject {
    /// Weighted provenance count.
    pub fn support(&self) -> f64 {
        self.provenance.iter().map(|p| p.kind.weight()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectLink {
    pub from: String,
    pub to: String,
    pub kind: RelationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectGraph {
    pub doc_id: String,
    pub objects: Vec<MedicalObject>,
    pub links: Vec<ObjectLink>,
}

impl ObjectGraph {
    pub fn object(&self, id: &str) -> Option<&MedicalObject> {
        self.objects.iter().find(|o| o.object_id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientGraph {
    pub patient_id: String,
    pub objects: Vec<MedicalObject>,
    pub links: Vec<ObjectLink>,
}

impl PatientGraph {
    pub fn empty(patient_id: impl Into<String>) -> Self {
        PatientGraph {
            patient_id: patient_id.into(),
            objects: Vec::new(),
            links: Vec::new(),
        }
    }

    pub fn on_axis(&self, axis: SemanticAxis) -> impl Iterator<Item = &MedicalObject> {
        self.objects.iter().filter(move |o| o.axis == axis)
    }

    /// The consolidated graph viewed as a single document's object graph.
    pub fn as_object_graph(&self) -> ObjectGraph {
        ObjectGraph {
            doc_id: self.patient_id.clone(),
            objects: self.objects.clone(),
            links: self.links.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutValue {
    pub value: ValueRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualifier: Option<String>,
    pub confidence: f64,
}

/// Every variable maps to a (possibly empty) value list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableReadout {
    pub values: BTreeMap<MedicalVariableKind, Vec<ReadoutValue>>,
}

impl Default for VariableReadout {
    fn default() -> Self {
        VariableReadout {
            values: MedicalVariableKind::ALL.into_iter().map(|v| (v, Vec::new())).collect(),
        }
    }
}

impl VariableReadout {
    pub fn get(&self, variable: MedicalVariableKind) -> &[ReadoutValue] {
        self.values.get(&variable).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn push(&mut self, variable: MedicalVariableKind, value: ReadoutValue) {
        self.values.entry(variable).or_default().push(value);
    }

    pub fn is_empty(&self) -> bool {
        self.values.values().all(Vec::is_empty)
    }
}
