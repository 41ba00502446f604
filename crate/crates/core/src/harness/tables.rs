//! Published score tables and the consistency checks run against them: F1
//! recomputed from precision and recall, and macro averages of F1 rows.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{f1_score, macro_mean};
use super::SetupKind;
use crate::error::{Error, Result};
use crate::variables::MedicalVariableKind;

const BUNDLED: &str = include_str!("../../data/published_scores.tsv");

/// Rounding slack when recomputing a two-decimal F1 cell.
pub const F1_TOLERANCE: f64 = 0.05;
/// Slack on a macro average of thirteen F1 cells.
pub const MACRO_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableKind {
    F1,
    Precision,
    Recall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub table: TableKind,
    pub setup: SetupKind,
    pub model: String,
    /// Percentages in canonical variable order.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedMacro {
    pub setup: SetupKind,
    pub model: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedTables {
    pub rows: Vec<TableRow>,
    pub macros: Vec<PublishedMacro>,
}

/// The precision and recall tables abbreviate two model names.
fn canonical_model(name: &str) -> String {
    match name.trim() {
        "Falcon-7b" => "Falcon-7b-Instruct".to_string(),
        "PaLM" => "PaLM2".to_string(),
        other => other.to_string(),
    }
}

impl PublishedTables {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED, "bundled tables").expect("bundled tables parse")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut macros = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: String| Error::parse(source, n + 1, m);
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() < 4 {
                return Err(bad("too few columns".into()));
            }
            let setup: SetupKind = cells[1].parse().map_err(bad)?;
            let model = canonical_model(cells[2]);
            let nums: Vec<f64> = cells[3..]
                .iter()
                .map(|c| c.trim().parse::<f64>().map_err(|e| bad(format!("bad number `{c}`: {e}"))))
                .collect::<Result<_>>()?;
            let table = match cells[0] {
                "MACRO" => {
                    if nums.len() != 1 {
                        return Err(bad("macro line takes one value".into()));
                    }
                    macros.push(PublishedMacro {
                        setup,
                        model,
                        value: nums[0],
                    });
                    continue;
                }
                "F1" => TableKind::F1,
                "P" => TableKind::Precision,
                "R" => TableKind::Recall,
                other => return Err(bad(format!("unknown table `{other}`"))),
            };
            if nums.len() != MedicalVariableKind::ALL.len() {
                return Err(bad(format!("expected 13 values, found {}", nums.len())));
            }
            rows.push(TableRow {
                table,
                setup,
                model,
                values: nums,
            });
        }
        Ok(PublishedTables { rows, macros })
    }

    pub fn row(&self, table: TableKind, setup: SetupKind, model: &str) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.table == table && r.setup == setup && r.model == model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCheck {
    pub setup: SetupKind,
    pub model: String,
    pub variable: MedicalVariableKind,
    pub precision: f64,
    pub recall: f64,
    pub computed_f1: f64,
    pub reported_f1: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroCheck {
    pub setup: SetupKind,
    pub model: String,
    pub computed: f64,
    pub reported: f64,
    pub pass: bool,
}

/// Every F1 cell that has both a precision and a recall counterpart.
pub fn check_f1_cells(tables: &PublishedTables, tolerance: f64) -> Vec<CellCheck> {
    let mut out = Vec::new();
    for f1 in tables.rows.iter().filter(|r| r.table == TableKind::F1) {
        let (Some(p), Some(r)) = (
            tables.row(TableKind::Precision, f1.setup, &f1.model),
            tables.row(TableKind::Recall, f1.setup, &f1.model),
        ) else {
            continue;
        };
        for (i, variable) in MedicalVariableKind::ALL.into_iter().enumerate() {
            let computed = f1_score(p.values[i], r.values[i]);
            out.push(CellCheck {
                setup: f1.setup,
                model: f1.model.clone(),
                variable,
                precision: p.values[i],
                recall: r.values[i],
                computed_f1: computed,
                reported_f1: f1.values[i],
                pass: (computed - f1.values[i]).abs() <= tolerance,
            });
        }
    }
    out
}

/// Published macro averages against the mean of the matching F1 row.
pub fn check_macros(tables: &PublishedTables, tolerance: f64) -> Result<Vec<MacroCheck>> {
    let mut out = Vec::new();
    for m in &tables.macros {
        let row = tables
            .row(TableKind::F1, m.setup, &m.model)
            .ok_or_else(|| Error::Config(format!("no F1 row for {} / {}", m.setup, m.model)))?;
        let computed = macro_mean(&row.values)?;
        out.push(MacroCheck {
            setup: m.setup,
            model: m.model.clone(),
            computed,
            reported: m.value,
            pass: (computed - m.value).abs() <= tolerance,
        });
    }
    Ok(out)
}
