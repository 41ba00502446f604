//! The thirteen cancer-related variables the engine abstracts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ontology::{ConceptId, SemanticAxis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MedicalVariableKind {
    Neoplasm,
    Morphology,
    TStage,
    NStage,
    MStage,
    StageGroup,
    Medications,
    Outcome,
    Response,
    TestedBiomarkers,
    Surgeries,
    DiagnosticProcedures,
    CancerDiagnosisDate,
}

impl MedicalVariableKind {
    /// All variables in canonical report order.
    pub const ALL: [MedicalVariableKind; 13] = [
        MedicalVariableKind::Neoplasm,
        MedicalVariableKind::Morphology,
        MedicalVariableKind::TStage,
        MedicalVariableKind::NStage,
        MedicalVariableKind::MStage,
        MedicalVariableKind::StageGroup,
        MedicalVariableKind::Medications,
        MedicalVariableKind::Outcome,
        MedicalVariableKind::Response,
        MedicalVariableKind::TestedBiomarkers,
        MedicalVariableKind::Surgeries,
        MedicalVariableKind::DiagnosticProcedures,
        MedicalVariableKind::CancerDiagnosisDate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MedicalVariableKind::Neoplasm => "Neoplasm",
            MedicalVariableKind::Morphology => "Morphology",
            MedicalVariableKind::TStage => "T-Stage",
            MedicalVariableKind::NStage => "N-Stage",
            MedicalVariableKind::MStage => "M-Stage",
            MedicalVariableKind::StageGroup => "Stage Group",
            MedicalVariableKind::Medications => "Medications",
            MedicalVariableKind::Outcome => "Outcome",
            MedicalVariableKind::Response => "Response",
            MedicalVariableKind::TestedBiomarkers => "Tested Biomarkers",
            MedicalVariableKind::Surgeries => "Surgeries",
            MedicalVariableKind::DiagnosticProcedures => "Diagnostic Procedures",
            MedicalVariableKind::CancerDiagnosisDate => "Cancer Diagnosis Date",
        }
    }

    /// Ontology axis the variable reads from.
    pub fn axis(self) -> SemanticAxis {
        match self {
            MedicalVariableKind::Neoplasm | MedicalVariableKind::CancerDiagnosisDate => {
                SemanticAxis::Neoplasm
            }
            MedicalVariableKind::Morphology => SemanticAxis::Morphology,
            MedicalVariableKind::TStage => SemanticAxis::TStage,
            MedicalVariableKind::NStage => SemanticAxis::NStage,
            MedicalVariableKind::MStage => SemanticAxis::MStage,
            MedicalVariableKind::StageGroup => SemanticAxis::StageGroup,
            MedicalVariableKind::Medications => SemanticAxis::Medication,
            MedicalVariableKind::Outcome => SemanticAxis::Outcome,
            MedicalVariableKind::Response => SemanticAxis::Response,
            MedicalVariableKind::TestedBiomarkers => SemanticAxis::Biomarker,
            MedicalVariableKind::Surgeries => SemanticAxis::Surgery,
            MedicalVariableKind::DiagnosticProcedures => SemanticAxis::DiagnosticProcedure,
        }
    }

    /// Variables read out as a single best value.
    pub fn is_single_valued(self) -> bool {
        matches!(
            self,
            MedicalVariableKind::Neoplasm
                | MedicalVariableKind::Morphology
                | MedicalVariableKind::TStage
                | MedicalVariableKind::NStage
                | MedicalVariableKind::MStage
                | MedicalVariableKind::StageGroup
                | MedicalVariableKind::CancerDiagnosisDate
        )
    }

    pub fn for_axis(axis: SemanticAxis) -> Option<MedicalVariableKind> {
        Self::ALL
            .into_iter()
            .find(|v| v.axis() == axis && *v != MedicalVariableKind::CancerDiagnosisDate)
    }
}

/// A variable value: an ontology concept or a free literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ValueRef {
    Concept(ConceptId),
    Literal(String),
}

impl ValueRef {
    pub fn concept_id(&self) -> Option<&str> {
        match self {
            ValueRef::Concept(id) => Some(id),
            ValueRef::Literal(_) => None,
        }
    }
}

impl fmt::Display for ValueRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueRef::Concept(id) => write!(f, "concept:{id}"),
            ValueRef::Literal(s) => write!(f, "lit:{s}"),
        }
    }
}

impl FromStr for ValueRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(id) = s.strip_prefix("concept:") {
            if id.is_empty() {
                return Err("empty concept reference".into());
            }
            Ok(ValueRef::Concept(id.to_string()))
        } else if let Some(lit) = s.strip_prefix("lit:") {
            Ok(ValueRef::Literal(lit.to_string()))
        } else {
            Err(format!("value `{s}` must start with `concept:` or `lit:`"))
        }
    }
}

impl fmt::Display for MedicalVariableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MedicalVariableKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim();
        if wanted.eq_ignore_ascii_case("Neoplasm Stage Group") {
            return Ok(MedicalVariableKind::StageGroup);
        }
        Self::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(wanted))
            .ok_or_else(|| format!("unknown medical variable `{wanted}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for v in MedicalVariableKind::ALL {
            assert_eq!(v.name().parse::<MedicalVariableKind>().unwrap(), v);
        }
        assert_eq!(
            "neoplasm stage group".parse::<MedicalVariableKind>().unwrap(),
            MedicalVariableKind::StageGroup
        );
        assert!("Tumour Size".parse::<MedicalVariableKind>().is_err());
    }

    #[test]
    fn axis_lookup_skips_diagnosis_date() {
        assert_eq!(
            MedicalVariableKind::for_axis(SemanticAxis::Neoplasm),
            Some(MedicalVariableKind::Neoplasm)
        );
        assert_eq!(MedicalVariableKind::for_axis(SemanticAxis::BodySite), None);
    }
}
