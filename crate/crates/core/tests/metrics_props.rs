use std::path::Path;

use chrono::NaiveDate;
use proptest::prelude::*;

use medrec_core::corpus::GoldValue;
use medrec_core::harness::tables::{check_macros, PublishedTables, TableKind};
use medrec_core::harness::{compute_metrics, f1_score, macro_average, match_values, Counts, SetupKind};
use medrec_core::ontology::OntologyGraph;
use medrec_core::reasoning::ReadoutValue;
use medrec_core::variables::{MedicalVariableKind, ValueRef};

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[test]
fn published_precision_recall_pairs_give_published_f1() {
    // Neoplasm and Medications of the symbolic baseline
    assert!((f1_score(91.50, 94.33) - 92.89).abs() < 0.005);
    assert!((f1_score(36.73, 72.56) - 48.77).abs() < 0.005);
}

#[test]
fn zero_over_zero_is_zero() {
    let m = compute_metrics(MedicalVariableKind::NStage, Counts::default());
    assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    let m = compute_metrics(MedicalVariableKind::NStage, Counts { tp: 0, fp: 3, fn_: 0 });
    assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
}

#[test]
fn macro_of_generation_rows_matches_published_averages() {
    let t = PublishedTables::bundled();
    for (model, published) in [("GPT3.5", 55.80), ("PaLM2", 53.66), ("Dolly2-12b", 32.03), ("Falcon-7b-Instruct", 18.31)] {
        let row = t.row(TableKind::F1, SetupKind::GenNlpReasoning, model).unwrap();
        let mean = row.values.iter().sum::<f64>() / 13.0;
        assert!((mean - published).abs() <= 0.01, "{model}: {mean}");
    }
    assert!(check_macros(&t, 0.01).unwrap().iter().all(|c| c.pass));
}

fn canonical_model(m: &str) -> &str {
    match m {
        "Falcon-7b" => "Falcon-7b-Instruct",
        "PaLM" => "PaLM2",
        other => other,
    }
}

/// Rows of tables 2, 4 and 5 read straight out of the source text.
fn source_rows(text: &str) -> Vec<(TableKind, SetupKind, String, Vec<f64>)> {
    let mut out = Vec::new();
    let mut pending: Vec<(SetupKind, String, Vec<f64>)> = Vec::new();
    let mut setup = None;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("Table ") {
            let kind = match rest.split(':').next() {
                Some("2") => Some(TableKind::F1),
                Some("4") => Some(TableKind::Precision),
                Some("5") => Some(TableKind::Recall),
                _ => None,
            };
            if let Some(kind) = kind {
                out.extend(pending.drain(..).map(|(s, m, v)| (kind, s, m, v)));
            }
            pending.clear();
            setup = None;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).filter(|f| !f.is_empty()).collect();
        match fields.as_slice() {
            [name] => setup = name.parse::<SetupKind>().ok().or(setup),
            [model, values @ ..] if values.len() == 13 => {
                if let (Some(s), Ok(v)) = (setup, values.iter().map(|x| x.parse::<f64>()).collect::<Result<Vec<_>, _>>()) {
                    pending.push((s, canonical_model(model).to_string(), v));
                }
            }
            _ => {}
        }
    }
    out
}

#[test]
fn bundled_tables_match_the_source_text() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../paper.md");
    let Ok(text) = std::fs::read_to_string(path) else { return };
    let rows = source_rows(&text);
    let t = PublishedTables::bundled();
    assert_eq!(rows.len(), t.rows.len());
    for (kind, setup, model, values) in rows {
        let row = t.row(kind, setup, &model).unwrap_or_else(|| panic!("missing {kind:?} {setup} {model}"));
        assert_eq!(row.values, values, "{kind:?} {setup} {model}");
    }
}

fn readout(value: &str, date: Option<NaiveDate>, confidence: f64) -> ReadoutValue {
    ReadoutValue {
        value: ValueRef::Concept(value.into()),
        date,
        qualifier: None,
        confidence,
    }
}

#[test]
fn matching_credits_subtypes_and_exact_dates_once() {
    let onto = OntologyGraph::bundled();
    let d = NaiveDate::from_ymd_opt(2020, 1, 2).unwrap();
    // a subtype earns credit for its parent, a parent does not for its child
    let c = match_values(&[readout("nsclc", None, 0.9)], &[GoldValue::concept("lung_cancer")], &onto);
    assert_eq!((c.tp, c.fp, c.fn_), (1, 0, 0));
    let c = match_values(&[readout("lung_cancer", None, 0.9)], &[GoldValue::concept("nsclc")], &onto);
    assert_eq!((c.tp, c.fp, c.fn_), (0, 1, 1));
    // a dated gold value needs that exact date
    let c = match_values(&[readout("lobectomy", None, 0.9)], &[GoldValue::dated("lobectomy", d)], &onto);
    assert_eq!((c.tp, c.fp, c.fn_), (0, 1, 1));
    // one gold value absorbs one prediction only
    let c = match_values(
        &[readout("lung_cancer", None, 0.9), readout("lung_cancer", None, 0.6)],
        &[GoldValue::concept("lung_cancer")],
        &onto,
    );
    assert_eq!((c.tp, c.fp, c.fn_), (1, 1, 0));
}

proptest! {
    #[test]
    fn f1_identities(tp in 0usize..200, fp in 0usize..200, fn_ in 0usize..200) {
        let m = compute_metrics(MedicalVariableKind::Surgeries, Counts { tp, fp, fn_ });
        prop_assert!((m.f1 - harmonic(m.precision, m.recall)).abs() < 1e-12);
        if m.precision > 0.0 && m.recall > 0.0 {
            prop_assert!(m.precision.min(m.recall) <= m.f1 + 1e-12 && m.f1 <= m.precision.max(m.recall) + 1e-12);
        }
        prop_assert_eq!(m.f1 == 0.0, tp == 0);
        prop_assert!((0.0..=1.0).contains(&m.f1));
    }

    #[test]
    fn macro_is_plain_mean(counts in prop::collection::vec((0usize..50, 0usize..50, 0usize..50), 13)) {
        let rows: Vec<_> = MedicalVariableKind::ALL
            .into_iter()
            .zip(&counts)
            .map(|(v, &(tp, fp, fn_))| compute_metrics(v, Counts { tp, fp, fn_ }))
            .collect();
        let mean = rows.iter().map(|r| r.f1).sum::<f64>() / 13.0;
        prop_assert!((macro_average(&rows).unwrap() - mean).abs() < 1e-12);
        prop_assert!(macro_average(&rows[..12]).is_err());
    }
}
