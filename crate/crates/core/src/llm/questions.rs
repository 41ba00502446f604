use std::path::Path;

use crate::error::{Error, Result};
use crate::variables::MedicalVariableKind;

pub const QUESTION_COUNT: usize = 31;

const BUNDLED: &str = include_str!("../../data/questions.txt");

/// The fixed question list, one question per line, addressed 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionBank {
    questions: Vec<String>,
}

fn targets(index: usize) -> &'static [MedicalVariableKind] {
    use MedicalVariableKind::*;
    match index {
        1 => &[Neoplasm, Morphology],
        2 => &[Neoplasm],
        3 => &[Morphology],
        4 | 6 => &[TStage, NStage, MStage],
        5 => &[StageGroup],
        7 => &[CancerDiagnosisDate],
        8 => &[MStage],
        9 => &[Outcome],
        10..=12 => &[Medications],
        13..=15 => &[Surgeries],
        16 | 17 => &[Outcome],
        18..=20 => &[Response],
        21..=27 => &[TestedBiomarkers],
        28 | 30 | 31 => &[DiagnosticProcedures],
        29 => &[Surgeries, DiagnosticProcedures],
        _ => &[],
    }
}

impl QuestionBank {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED, "bundled questions").expect("bundled question bank is valid")
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let questions: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect();
        if questions.len() != QUESTION_COUNT {
            return Err(Error::Config(format!(
                "{source}: expected {QUESTION_COUNT} questions, found {}",
                questions.len()
            )));
        }
        Ok(QuestionBank { questions })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    /// Question text for a 1-based index.
    pub fn question(&self, index: usize) -> Option<&str> {
        index.checked_sub(1).and_then(|i| self.questions.get(i)).map(String::as_str)
    }

    /// `(index, text)` pairs in order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &str)> {
        self.questions.iter().enumerate().map(|(i, q)| (i + 1, q.as_str()))
    }

    /// Variables a question targets.
    pub fn targets(&self, index: usize) -> &'static [MedicalVariableKind] {
        targets(index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_bank() {
        let qb = QuestionBank::bundled();
        assert_eq!(qb.len(), 31);
        assert_eq!(qb.question(1), Some("Summarize the patient."));
        assert_eq!(qb.question(2), Some("What cancer does the patient have?"));
        assert!(qb.question(20).unwrap().contains("patient\u{2019}s response"));
        assert_eq!(qb.question(0), None);
        assert_eq!(qb.question(32), None);
    }

    #[test]
    fn every_variable_is_targeted() {
        let qb = QuestionBank::bundled();
        for v in MedicalVariableKind::ALL {
            assert!(qb.iter().any(|(i, _)| qb.targets(i).contains(&v)), "{v} untargeted");
        }
        assert!(qb.iter().all(|(i, _)| !qb.targets(i).is_empty()));
    }

    #[test]
    fn wrong_count_rejected() {
        assert!(QuestionBank::parse("one\ntwo\n", "t").is_err());
    }
}
