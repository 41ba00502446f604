//! Gold-standard annotations, one value per line:
//! `patient_id<TAB>variable_name<TAB>value<TAB>date<TAB>qualifier`, where
//! `value` is `concept:<id>` or `lit:<text>` and the last two columns are
//! optional. A patient's lines must be contiguous.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::OntologyGraph;
use crate::variables::{MedicalVariableKind, ValueRef};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GoldValue {
    pub value: ValueRef,
    pub date: Option<NaiveDate>,
    pub qualifier: Option<String>,
}

impl GoldValue {
    pub fn concept(id: &str) -> Self {
        GoldValue {
            value: ValueRef::Concept(id.to_string()),
            date: None,
            qualifier: None,
        }
    }

    pub fn dated(id: &str, date: NaiveDate) -> Self {
        GoldValue {
            date: Some(date),
            ..GoldValue::concept(id)
        }
    }
}

/// Per-variable value sets for one patient. Missing keys are empty sets.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GoldEntry {
    pub values: BTreeMap<MedicalVariableKind, Vec<GoldValue>>,
}

impl GoldEntry {
    pub fn get(&self, variable: MedicalVariableKind) -> &[GoldValue] {
        self.values.get(&variable).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Adds a value unless an identical one is already present.
    pub fn insert(&mut self, variable: MedicalVariableKind, value: GoldValue) {
        let slot = self.values.entry(variable).or_default();
        if !slot.contains(&value) {
            slot.push(value);
        }
    }

    pub fn populated(&self) -> usize {
        self.values.values().filter(|v| !v.is_empty()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GoldStandard {
    pub patients: BTreeMap<String, GoldEntry>,
}

impl GoldStandard {
    pub fn entry(&self, patient_id: &str) -> Option<&GoldEntry> {
        self.patients.get(patient_id)
    }

    pub fn len(&self) -> usize {
        self.patients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patients.is_empty()
    }

    /// Serializes in the line format accepted by [`parse_gold_standard`].
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (pid, entry) in &self.patients {
            for (var, values) in &entry.values {
                for v in values {
                    let date = v.date.map(|d| d.format("%Y-%m-%d").to_string()).unwrap_or_default();
                    let qual = v.qualifier.clone().unwrap_or_default();
                    let mut line = format!("{pid}\t{}\t{}", var.name(), v.value);
                    if !date.is_empty() || !qual.is_empty() {
                        let _ = write!(line, "\t{date}");
                    }
                    if !qual.is_empty() {
                        let _ = write!(line, "\t{qual}");
                    }
                    out.push_str(&line);
                    out.push('\n');
                }
            }
        }
        out
    }
}

pub fn load_gold_standard(path: impl AsRef<Path>, ontology: &OntologyGraph) -> Result<GoldStandard> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gold_standard(&text, &path.display().to_string(), ontology)
}

pub fn parse_gold_standard(text: &str, source: &str, ontology: &OntologyGraph) -> Result<GoldStandard> {
    let mut gold = GoldStandard::default();
    let mut current: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() < 3 || cols.len() > 5 {
            return Err(Error::parse(
                source,
                line_no,
                format!("expected 3 to 5 tab-separated columns, found {}", cols.len()),
            ));
        }
        let pid = cols[0].trim();
        if pid.is_empty() {
            return Err(Error::parse(source, line_no, "empty patient id"));
        }
        if current.as_deref() != Some(pid) {
            if gold.patients.contains_key(pid) {
                return Err(Error::parse(
                    source,
                    line_no,
                    format!("duplicate entry for patient `{pid}`"),
                ));
            }
            gold.patients.insert(pid.to_string(), GoldEntry::default());
            current = Some(pid.to_string());
        }
        let variable: MedicalVariableKind =
            cols[1].parse().map_err(|e: String| Error::parse(source, line_no, e))?;
        let value: ValueRef = cols[2].parse().map_err(|e: String| Error::parse(source, line_no, e))?;
        if let ValueRef::Concept(id) = &value {
            if !ontology.contains(id) {
                return Err(Error::parse(
                    source,
                    line_no,
                    format!("unknown concept `{id}`"),
                ));
            }
        }
        let date = match cols.get(3).map(|s| s.trim()).filter(|s| !s.is_empty()) {
            Some(d) => Some(NaiveDate::parse_from_str(d, "%Y-%m-%d").map_err(|e| {
                Error::parse(source, line_no, format!("bad date `{d}`: {e}"))
            })?),
            None => None,
        };
        let qualifier = cols
            .get(4)
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        gold.patients
            .get_mut(pid)
            .expect("inserted above")
            .insert(variable, GoldValue { value, date, qualifier });
    }
    Ok(gold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::parse_ontology;

    fn onto() -> OntologyGraph {
        parse_ontology(
            "cancer|Neoplasm|cancer||\nlung_cancer|Neoplasm|lung cancer|cancer|\negfr|Biomarker|EGFR||\n",
            "t",
        )
        .unwrap()
    }

    #[test]
    fn single_patient_entry() {
        let g = parse_gold_standard("p1\tNeoplasm\tconcept:lung_cancer\n", "g", &onto()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(
            g.entry("p1").unwrap().get(MedicalVariableKind::Neoplasm),
            &[GoldValue::concept("lung_cancer")]
        );
    }

    #[test]
    fn unknown_concept_names_concept_and_line() {
        let err = parse_gold_standard(
            "p1\tNeoplasm\tconcept:lung_cancer\np1\tNeoplasm\tconcept:kidney_cancer\n",
            "g",
            &onto(),
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("kidney_cancer"), "{msg}");
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn unknown_variable_and_duplicate_patient_rejected() {
        assert!(parse_gold_standard("p1\tTumour Size\tlit:3cm\n", "g", &onto()).is_err());
        let err = parse_gold_standard(
            "p1\tNeoplasm\tconcept:cancer\np2\tNeoplasm\tconcept:cancer\np1\tOutcome\tlit:x\n",
            "g",
            &onto(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn thirteen_variables_populated() {
        let mut text = String::new();
        for v in MedicalVariableKind::ALL {
            text.push_str(&format!("p1\t{}\tlit:x\t2020-01-02\tq\n", v.name()));
        }
        let g = parse_gold_standard(&text, "g", &onto()).unwrap();
        let e = g.entry("p1").unwrap();
        assert_eq!(e.populated(), 13);
        let cdd = &e.get(MedicalVariableKind::CancerDiagnosisDate)[0];
        assert_eq!(cdd.date, NaiveDate::from_ymd_opt(2020, 1, 2));
        assert_eq!(cdd.qualifier.as_deref(), Some("q"));
    }

    #[test]
    fn tsv_round_trip() {
        let text = "p1\tNeoplasm\tconcept:lung_cancer\t2019-03-04\np1\tTested Biomarkers\tconcept:egfr\t\tpositive\np2\tOutcome\tlit:remission\n";
        let g = parse_gold_standard(text, "g", &onto()).unwrap();
        let again = parse_gold_standard(&g.to_tsv(), "g", &onto()).unwrap();
        assert_eq!(g, again);
    }
}
