//! Patient record sets, gold annotations and the synthetic corpus generator.
//!
//! On disk a corpus is `<root>/<patient_id>/<doc_id>.txt`. An optional
//! `<root>/cohorts.tsv` (`patient_id<TAB>cohort`) records each patient's
//! cancer cohort; patients missing from it are `Other`.

mod gold;
mod synthetic;
pub mod templates;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gold::{load_gold_standard, parse_gold_standard, GoldEntry, GoldStandard, GoldValue};
pub use synthetic::{
    generate_synthetic_corpus, SyntheticConfig, SyntheticCorpus, SyntheticDocument, SyntheticPatient,
    SyntheticRecord,
};

pub const COHORTS_FILE: &str = "cohorts.tsv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CancerCohort {
    Colorectal,
    Breast,
    Lung,
    Other,
}

impl fmt::Display for CancerCohort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CancerCohort::Colorectal => "Colorectal",
            CancerCohort::Breast => "Breast",
            CancerCohort::Lung => "Lung",
            CancerCohort::Other => "Other",
        };
        f.write_str(s)
    }
}

impl FromStr for CancerCohort {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "colorectal" => Ok(CancerCohort::Colorectal),
            "breast" => Ok(CancerCohort::Breast),
            "lung" => Ok(CancerCohort::Lung),
            "other" => Ok(CancerCohort::Other),
            other => Err(format!("unknown cohort `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocumentText {
    pub source_id: String,
    pub text: String,
    pub byte_length: usize,
}

impl RawDocumentText {
    pub fn new(source_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        RawDocumentText {
            source_id: source_id.into(),
            byte_length: text.len(),
            text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatientRecordSet {
    pub patient_id: String,
    pub records: Vec<RawDocumentText>,
    pub cancer_cohort: CancerCohort,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoadWarning {
    EmptyFile { patient_id: String, path: PathBuf },
    NoRecords { patient_id: String },
}

impl fmt::Display for LoadWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadWarning::EmptyFile { patient_id, path } => {
                write!(f, "patient {patient_id}: skipped empty file {}", path.display())
            }
            LoadWarning::NoRecords { patient_id } => {
                write!(f, "patient {patient_id}: no non-empty records, patient skipped")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadedCorpus {
    pub patients: Vec<PatientRecordSet>,
    pub warnings: Vec<LoadWarning>,
}

impl LoadedCorpus {
    pub fn patient(&self, id: &str) -> Option<&PatientRecordSet> {
        self.patients.iter().find(|p| p.patient_id == id)
    }

    pub fn mean_records(&self) -> f64 {
        if self.patients.is_empty() {
            return 0.0;
        }
        let total: usize = self.patients.iter().map(|p| p.records.len()).sum();
        total as f64 / self.patients.len() as f64
    }
}

/// Loads every patient directory under `root`, records in file-name order.
pub fn load_patient_corpus(root: impl AsRef<Path>) -> Result<LoadedCorpus> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::MissingCorpus(root.to_path_buf()));
    }
    let cohorts = read_cohorts(root)?;

    let mut patient_dirs = Vec::new();
    for entry in std::fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let path = entry.path();
        if path.is_dir() {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                patient_dirs.push((name.to_string(), path));
            }
        }
    }
    patient_dirs.sort();

    let mut corpus = LoadedCorpus::default();
    for (patient_id, dir) in patient_dirs {
        let mut files = Vec::new();
        for entry in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let path = entry.map_err(|e| Error::io(&dir, e))?.path();
            if path.is_file() && path.extension().is_some_and(|x| x == "txt") {
                files.push(path);
            }
        }
        files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));

        let mut records = Vec::with_capacity(files.len());
        let mut seen = HashSet::new();
        for path in files {
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let text = String::from_utf8(bytes).map_err(|e| {
                Error::io(
                    &path,
                    std::io::Error::new(std::io::ErrorKind::InvalidData, e.utf8_error()),
                )
            })?;
            if text.trim().is_empty() {
                corpus.warnings.push(LoadWarning::EmptyFile {
                    patient_id: patient_id.clone(),
                    path,
                });
                continue;
            }
            let source_id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            if seen.insert(source_id.clone()) {
                records.push(RawDocumentText::new(source_id, text));
            }
        }
        if records.is_empty() {
            corpus.warnings.push(LoadWarning::NoRecords { patient_id });
            continue;
        }
        let cancer_cohort = cohorts.get(&patient_id).copied().unwrap_or(CancerCohort::Other);
        corpus.patients.push(PatientRecordSet {
            patient_id,
            records,
            cancer_cohort,
        });
    }
    Ok(corpus)
}

fn read_cohorts(root: &Path) -> Result<BTreeMap<String, CancerCohort>> {
    let path = root.join(COHORTS_FILE);
    let mut out = BTreeMap::new();
    if !path.is_file() {
        return Ok(out);
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, cohort) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(&path, n + 1, "expected `patient_id<TAB>cohort`"))?;
        let cohort = cohort.parse().map_err(|e: String| Error::parse(&path, n + 1, e))?;
        out.insert(id.trim().to_string(), cohort);
    }
    Ok(out)
}
