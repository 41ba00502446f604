//! Matching predictions to gold, and precision / recall / F1.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{GoldEntry, GoldValue};
use crate::error::{Error, Result};
use crate::ontology::OntologyGraph;
use crate::reasoning::{ReadoutValue, VariableReadout};
use crate::variables::{MedicalVariableKind, ValueRef};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    pub fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(mut self, rhs: Counts) -> Counts {
        Counts::add(&mut self, rhs);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariableMetrics {
    pub variable: MedicalVariableKind,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Harmonic mean, 0 when both inputs are 0. Works on fractions or
/// percentages alike.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    ratio(2.0 * precision * recall, precision + recall)
}

pub fn compute_metrics(variable: MedicalVariableKind, c: Counts) -> VariableMetrics {
    let precision = ratio(c.tp as f64, (c.tp + c.fp) as f64);
    let recall = ratio(c.tp as f64, (c.tp + c.fn_) as f64);
    VariableMetrics {
        variable,
        tp: c.tp,
        fp: c.fp,
        fn_: c.fn_,
        precision,
        recall,
        f1: f1_score(precision, recall),
    }
}

/// Unweighted mean of exactly 13 per-variable F1 values.
pub fn macro_average(rows: &[VariableMetrics]) -> Result<f64> {
    macro_mean(&rows.iter().map(|r| r.f1).collect::<Vec<_>>())
}

pub fn macro_mean(values: &[f64]) -> Result<f64> {
    if values.len() != MedicalVariableKind::ALL.len() {
        return Err(Error::RowCount(values.len()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

fn value_matches(pred: &ValueRef, gold: &ValueRef, onto: &OntologyGraph) -> bool {
    let concept_credit = |p: &str, g: &str| p == g || onto.is_subtype_of(p, g).unwrap_or(false);
    match (pred, gold) {
        (ValueRef::Concept(p), ValueRef::Concept(g)) => concept_credit(p, g),
        (ValueRef::Literal(p), ValueRef::Literal(g)) => p.trim().eq_ignore_ascii_case(g.trim()),
        (ValueRef::Literal(p), ValueRef::Concept(g)) => onto
            .lookup_all(p)
            .iter()
            .any(|c| concept_credit(&c.concept_id, g)),
        (ValueRef::Concept(p), ValueRef::Literal(g)) => onto
            .concept(p)
            .is_some_and(|c| c.names().any(|n| n.trim().eq_ignore_ascii_case(g.trim()))),
    }
}

/// Whether one predicted value earns credit for one gold value. The gold
/// date, when present, must be hit exactly; qualifiers are not compared.
pub fn value_credit(pred: &ReadoutValue, gold: &GoldValue, onto: &OntologyGraph) -> bool {
    value_matches(&pred.value, &gold.value, onto) && gold.date.is_none_or(|d| pred.date == Some(d))
}

/// One-to-one greedy matching, most confident prediction first.
pub fn match_values(pred: &[ReadoutValue], gold: &[GoldValue], onto: &OntologyGraph) -> Counts {
    let mut order: Vec<usize> = (0..pred.len()).collect();
    order.sort_by(|&a, &b| pred[b].confidence.total_cmp(&pred[a].confidence));
    let mut used = vec![false; gold.len()];
    let mut tp = 0;
    for i in order {
        if let Some(j) = (0..gold.len()).find(|&j| !used[j] && value_credit(&pred[i], &gold[j], onto)) {
            used[j] = true;
            tp += 1;
        }
    }
    Counts {
        tp,
        fp: pred.len() - tp,
        fn_: gold.len() - tp,
    }
}

pub fn match_predictions(
    pred: &VariableReadout,
    gold: &GoldEntry,
    onto: &OntologyGraph,
) -> BTreeMap<MedicalVariableKind, Counts> {
    MedicalVariableKind::ALL
        .into_iter()
        .map(|v| (v, match_values(pred.get(v), gold.get(v), onto)))
        .collect()
}
