//! Machine-readable report and the setups × variables text table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::{macro_average, VariableMetrics};
use super::pipeline::{PatientRun, RetrievalStats};
use super::{RunConfig, SetupKind};
use crate::error::{Error, Result};
use crate::variables::MedicalVariableKind;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";
pub const TABLE_FILE: &str = "table.txt";
pub const PREDICTIONS_FILE: &str = "predictions.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientFailure {
    pub patient_id: String,
    pub error: String,
}

/// Chunk accounting over all patients of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalSummary {
    pub chunk_size: usize,
    pub k: usize,
    pub patients: usize,
    pub total_chunks: usize,
    pub max_chunk_tokens: usize,
    pub max_questions: usize,
    pub max_per_question: usize,
    pub max_before_dedup: usize,
    pub max_after_dedup: usize,
}

impl RetrievalSummary {
    pub fn new(chunk_size: usize, k: usize) -> Self {
        RetrievalSummary {
            chunk_size,
            k,
            patients: 0,
            total_chunks: 0,
            max_chunk_tokens: 0,
            max_questions: 0,
            max_per_question: 0,
            max_before_dedup: 0,
            max_after_dedup: 0,
        }
    }

    pub fn absorb(&mut self, s: &RetrievalStats) {
        self.patients += 1;
        self.total_chunks += s.chunks;
        self.max_chunk_tokens = self.max_chunk_tokens.max(s.max_chunk_tokens);
        self.max_questions = self.max_questions.max(s.questions);
        self.max_per_question = self.max_per_question.max(s.max_per_question);
        self.max_before_dedup = self.max_before_dedup.max(s.retrieved_before_dedup);
        self.max_after_dedup = self.max_after_dedup.max(s.retrieved_after_dedup);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupReport {
    pub setup: SetupKind,
    pub config: RunConfig,
    pub patients: usize,
    pub rows: Vec<VariableMetrics>,
    pub macro_f1: f64,
    pub failures: Vec<PatientFailure>,
    pub retrieval: Option<RetrievalSummary>,
}

/// Wall-clock details, kept apart from the metrics so reruns compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub setups: Vec<SetupReport>,
    pub metadata: RunMetadata,
}

impl EvalReport {
    pub fn setup(&self, kind: SetupKind) -> Option<&SetupReport> {
        self.setups.iter().find(|s| s.setup == kind)
    }

    /// Appends the setups of `other`; metadata of `self` is kept apart from
    /// the finish time.
    pub fn merge(&mut self, other: EvalReport) {
        self.setups.extend(other.setups);
        self.metadata.finished_at = other.metadata.finished_at;
    }

    /// Everything except timestamps and the worker count, serialized.
    pub fn metrics_payload(&self) -> Result<String> {
        let mut setups = self.setups.clone();
        for s in &mut setups {
            s.config.workers = None;
        }
        Ok(serde_json::to_string_pretty(&setups)?)
    }

    /// Checks the stored aggregates against the rows.
    pub fn validate(&self) -> Result<()> {
        for s in &self.setups {
            if s.rows.len() != MedicalVariableKind::ALL.len() {
                return Err(Error::RowCount(s.rows.len()));
            }
            let m = macro_average(&s.rows)?;
            if (m - s.macro_f1).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "{}: stored macro F1 {} differs from recomputed {m}",
                    s.setup, s.macro_f1
                )));
            }
        }
        Ok(())
    }
}

pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "F1-score (%) per medical variable");
    let mut header = format!("{:<24}", "Setup");
    for v in MedicalVariableKind::ALL {
        let _ = write!(header, " {:>9}", abbreviation(v));
    }
    let _ = write!(header, " {:>9}", "Macro");
    let _ = writeln!(out, "{header}");
    let _ = writeln!(out, "{}", "-".repeat(header.len()));
    for s in &report.setups {
        let _ = write!(out, "{:<24}", s.setup.name());
        for r in &s.rows {
            let _ = write!(out, " {:>9.2}", r.f1 * 100.0);
        }
        let _ = writeln!(out, " {:>9.2}", s.macro_f1 * 100.0);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Columns: {}", MedicalVariableKind::ALL.map(|v| format!("{} = {}", abbreviation(v), v.name())).join(", "));
    out
}

fn abbreviation(v: MedicalVariableKind) -> &'static str {
    match v {
        MedicalVariableKind::Neoplasm => "Neo",
        MedicalVariableKind::Morphology => "Morph",
        MedicalVariableKind::TStage => "T",
        MedicalVariableKind::NStage => "N",
        MedicalVariableKind::MStage => "M",
        MedicalVariableKind::StageGroup => "StageGrp",
        MedicalVariableKind::Medications => "Meds",
        MedicalVariableKind::Outcome => "Outcome",
        MedicalVariableKind::Response => "Response",
        MedicalVariableKind::TestedBiomarkers => "Biomark",
        MedicalVariableKind::Surgeries => "Surgery",
        MedicalVariableKind::DiagnosticProcedures => "DiagProc",
        MedicalVariableKind::CancerDiagnosisDate => "DxDate",
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `report.json` and `table.txt` into `dir`, creating it if needed.
pub fn emit_report(report: &EvalReport, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json_path = dir.join(REPORT_FILE);
    let table_path = dir.join(TABLE_FILE);
    write_file(&json_path, &(serde_json::to_string_pretty(report)? + "\n"))?;
    write_file(&table_path, &render_table(report))?;
    Ok((json_path, table_path))
}

/// Writes per-patient readouts to `predictions.json`.
pub fn emit_predictions(predictions: &[PatientRun], dir: impl AsRef<Path>) -> Result<PathBuf> {
    #[derive(Serialize)]
    struct Row<'a> {
        patient_id: &'a str,
        readout: &'a crate::reasoning::VariableReadout,
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rows: Vec<Row> = predictions
        .iter()
        .map(|p| Row {
            patient_id: &p.patient_id,
            readout: &p.readout,
        })
        .collect();
    rows.sort_by(|a, b| a.patient_id.cmp(b.patient_id));
    let path = dir.join(PREDICTIONS_FILE);
    write_file(&path, &(serde_json::to_string_pretty(&rows)? + "\n"))?;
    Ok(path)
}

pub fn load_report(path: impl AsRef<Path>) -> Result<EvalReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
