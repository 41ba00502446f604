//! Per-patient wiring of the five setups.

use std::collections::HashSet;
use std::time::SystemTime;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, macro_average, match_predictions, Counts};
use super::report::{EvalReport, PatientFailure, RetrievalSummary, RunMetadata, SetupReport};
use super::standalone::answers_to_readout;
use super::{RunConfig, SetupKind};
use crate::corpus::{load_gold_standard, load_patient_corpus, GoldEntry, GoldStandard, LoadedCorpus, PatientRecordSet};
use crate::error::{Error, Result};
use crate::extraction::Extractor;
use crate::llm::{
    answers_to_documents, chunk_documents, generate_answer, BackendConfig, Chunk, Embedder, GeneratedAnswer,
    Generator, HttpEmbedder, HttpGenerator, MockEmbedder, MockGenerator, QuestionBank, Retriever,
};
use crate::ontology::{load_ontology, OntologyGraph};
use crate::preprocess::{
    preprocess_patient, BoundaryScorer, ClinicalDocument, DocProvenance, EmbeddingBoundaryScorer, Gazetteer,
    PatternRedactor, PreprocessOptions, SegmentOptions,
};
use crate::reasoning::{
    consolidate_patient, extract_variables, ground_tag_graph, PatientGraph, ProvenanceKind, VariableReadout,
};
use crate::variables::MedicalVariableKind;

pub struct Backends {
    pub embedder: Option<Box<dyn Embedder>>,
    pub generator: Option<Box<dyn Generator>>,
}

impl Backends {
    /// Mock backends for configs without an endpoint, HTTP otherwise.
    pub fn from_config(cfg: &RunConfig) -> Self {
        let embedder = cfg.embedder.as_ref().map(|b: &BackendConfig| -> Box<dyn Embedder> {
            match &b.endpoint {
                Some(url) => Box::new(HttpEmbedder::new(url)),
                None => Box::new(MockEmbedder::default()),
            }
        });
        let generator = cfg.generator.as_ref().map(|b: &BackendConfig| -> Box<dyn Generator> {
            match &b.endpoint {
                Some(url) => Box::new(HttpGenerator::new(url)),
                None => Box::new(MockGenerator::new(cfg.seed, cfg.anomalies)),
            }
        });
        Backends { embedder, generator }
    }
}

/// Everything a run needs besides the corpus and gold.
pub struct RunContext {
    pub config: RunConfig,
    pub ontology: OntologyGraph,
    pub questions: QuestionBank,
    pub extractor: Extractor,
    pub redactor: PatternRedactor,
    pub backends: Backends,
}

impl RunContext {
    pub fn new(config: RunConfig, ontology: OntologyGraph, questions: QuestionBank, gazetteer: Gazetteer) -> Result<Self> {
        config.validate()?;
        let backends = Backends::from_config(&config);
        Ok(RunContext {
            extractor: Extractor::lexicon(&ontology),
            redactor: PatternRedactor::new(gazetteer),
            ontology,
            questions,
            backends,
            config,
        })
    }

    /// Loads the ontology, question bank and gazetteer named by `config`.
    pub fn from_config(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let ontology = match &config.ontology {
            Some(p) => load_ontology(p)?,
            None => OntologyGraph::bundled(),
        };
        let questions = match &config.questions {
            Some(p) => QuestionBank::load(p)?,
            None => QuestionBank::bundled(),
        };
        let gazetteer = match &config.gazetteer {
            Some(p) => Gazetteer::load(p)?,
            None => Gazetteer::new(Vec::<String>::new()),
        };
        Self::new(config, ontology, questions, gazetteer)
    }

    fn embedder(&self) -> Result<&dyn Embedder> {
        self.backends
            .embedder
            .as_deref()
            .ok_or_else(|| Error::Config(format!("setup {} requires an embedder", self.config.setup)))
    }

    fn generator(&self) -> Result<&dyn Generator> {
        self.backends
            .generator
            .as_deref()
            .ok_or_else(|| Error::Config(format!("setup {} requires a generator", self.config.setup)))
    }

    fn temperature(&self) -> f64 {
        self.config.generator.as_ref().and_then(|g| g.temperature).unwrap_or(0.0)
    }
}

/// Chunk accounting for one patient.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalStats {
    pub chunks: usize,
    pub max_chunk_tokens: usize,
    pub questions: usize,
    pub max_per_question: usize,
    pub retrieved_before_dedup: usize,
    pub retrieved_after_dedup: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRun {
    pub patient_id: String,
    pub readout: VariableReadout,
    /// Absent for the standalone setup, which bypasses reasoning.
    pub graph: Option<PatientGraph>,
    pub answers: Vec<GeneratedAnswer>,
    pub retrieval: Option<RetrievalStats>,
}

fn reason(patient_id: &str, docs: &[ClinicalDocument], ctx: &RunContext) -> (PatientGraph, VariableReadout) {
    let graphs: Vec<_> = docs
        .iter()
        .map(|d| {
            let tg = ctx.extractor.build_tag_graph(d);
            let kind = ProvenanceKind {
                category: d.category,
                source: d.provenance,
            };
            ground_tag_graph(&tg, &ctx.ontology, kind)
        })
        .collect();
    let pg = consolidate_patient(patient_id, &graphs, &ctx.ontology);
    let readout = extract_variables(&pg, &ctx.ontology, ctx.config.tau);
    (pg, readout)
}

struct Retrieved {
    chunks: Vec<Chunk>,
    per_question: Vec<Vec<usize>>,
}

fn retrieve(docs: &[ClinicalDocument], ctx: &RunContext) -> Result<Retrieved> {
    let chunks = chunk_documents(docs, ctx.config.chunk_size);
    if chunks.is_empty() {
        return Ok(Retrieved {
            chunks,
            per_question: vec![Vec::new(); ctx.questions.len()],
        });
    }
    let embedder = ctx.embedder()?;
    let retriever = Retriever::new(&chunks, embedder)?;
    let qtexts: Vec<String> = ctx.questions.iter().map(|(_, q)| q.to_string()).collect();
    let qvecs = embedder.embed(&qtexts)?;
    let per_question = qvecs.iter().map(|q| retriever.top_k_indices(q, ctx.config.k)).collect();
    Ok(Retrieved { chunks, per_question })
}

fn chunk_documents_for_reasoning(r: &Retrieved, docs: &[ClinicalDocument]) -> Vec<ClinicalDocument> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for &i in r.per_question.iter().flatten() {
        let c = &r.chunks[i];
        if !seen.insert(c.chunk_id.as_str()) {
            continue;
        }
        let category = docs
            .iter()
            .find(|d| d.doc_id == c.source_doc_id)
            .map(|d| d.category)
            .unwrap_or(crate::preprocess::DocumentCategory::Other);
        out.push(ClinicalDocument {
            doc_id: c.chunk_id.clone(),
            patient_id: c.patient_id.clone(),
            category,
            text: c.text.clone(),
            provenance: DocProvenance::SourceRecord,
        });
    }
    out
}

fn generate(r: &Retrieved, ctx: &RunContext) -> Result<Vec<GeneratedAnswer>> {
    let generator = ctx.generator()?;
    ctx.questions
        .iter()
        .zip(&r.per_question)
        .map(|((qi, q), idx)| {
            let context: Vec<Chunk> = idx.iter().map(|&i| r.chunks[i].clone()).collect();
            generate_answer(qi, q, &context, generator, ctx.temperature(), ctx.config.context_budget)
        })
        .collect()
}

fn stats(r: &Retrieved, after_dedup: usize) -> RetrievalStats {
    RetrievalStats {
        chunks: r.chunks.len(),
        max_chunk_tokens: r.chunks.iter().map(|c| c.token_count).max().unwrap_or(0),
        questions: r.per_question.len(),
        max_per_question: r.per_question.iter().map(Vec::len).max().unwrap_or(0),
        retrieved_before_dedup: r.per_question.iter().map(Vec::len).sum(),
        retrieved_after_dedup: after_dedup,
    }
}

/// Runs the configured setup for one patient.
pub fn run_patient(patient: &PatientRecordSet, ctx: &RunContext) -> Result<PatientRun> {
    let options = PreprocessOptions {
        segment: SegmentOptions {
            min_len: ctx.config.segment_min_len,
        },
    };
    let scorer = match (ctx.config.embedding_segmenter, ctx.backends.embedder.as_deref()) {
        (true, Some(e)) => Some(EmbeddingBoundaryScorer::new(e)),
        _ => None,
    };
    let docs = preprocess_patient(
        patient,
        &ctx.redactor,
        &options,
        scorer.as_ref().map(|s| s as &dyn BoundaryScorer),
    );
    let pid = patient.patient_id.as_str();

    let setup = ctx.config.setup;
    if setup == SetupKind::NlpReasoning {
        let (pg, readout) = reason(pid, &docs, ctx);
        return Ok(PatientRun {
            patient_id: pid.to_string(),
            readout,
            graph: Some(pg),
            answers: Vec::new(),
            retrieval: None,
        });
    }

    let retrieved = retrieve(&docs, ctx)?;
    let chunk_docs = chunk_documents_for_reasoning(&retrieved, &docs);
    let retrieval = Some(stats(&retrieved, chunk_docs.len()));
    let answers = if setup.needs_generator() {
        generate(&retrieved, ctx)?
    } else {
        Vec::new()
    };

    let (graph, readout) = match setup {
        SetupKind::StandaloneLlm => (None, answers_to_readout(&answers, &ctx.questions, &ctx.ontology)),
        _ => {
            let mut input = Vec::new();
            if matches!(setup, SetupKind::RetNlpReasoning | SetupKind::RetGenNlpReasoning) {
                input.extend(chunk_docs);
            }
            if setup.needs_generator() {
                input.extend(answers_to_documents(&answers, pid));
            }
            let (pg, readout) = reason(pid, &input, ctx);
            (Some(pg), readout)
        }
    };
    Ok(PatientRun {
        patient_id: pid.to_string(),
        readout,
        graph,
        answers,
        retrieval,
    })
}

pub struct RunOutput {
    pub predictions: Vec<PatientRun>,
    pub report: EvalReport,
}

fn now() -> String {
    let secs = SystemTime::now()
        .duration_since(SystemTime::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    chrono::DateTime::from_timestamp(secs as i64, 0)
        .map(|t| t.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_default()
}

/// Runs every patient (in parallel), scores against gold and builds the
/// single-setup report. A failing patient is reported and left out of the
/// metrics; the others continue.
pub fn evaluate(corpus: &LoadedCorpus, gold: &GoldStandard, ctx: &RunContext) -> Result<RunOutput> {
    let started_at = now();
    let work = || -> Vec<(String, Result<PatientRun>)> {
        corpus
            .patients
            .par_iter()
            .map(|p| (p.patient_id.clone(), run_patient(p, ctx)))
            .collect()
    };
    let results = match ctx.config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let empty = GoldEntry::default();
    let mut totals: Vec<Counts> = vec![Counts::default(); MedicalVariableKind::ALL.len()];
    let mut predictions = Vec::new();
    let mut failures = Vec::new();
    let mut retrieval: Option<RetrievalSummary> = None;
    for (patient_id, r) in results {
        match r {
            Ok(run) => {
                let entry = gold.entry(&run.patient_id).unwrap_or(&empty);
                let counts = match_predictions(&run.readout, entry, &ctx.ontology);
                for (i, v) in MedicalVariableKind::ALL.into_iter().enumerate() {
                    totals[i].add(counts[&v]);
                }
                if let Some(s) = &run.retrieval {
                    retrieval
                        .get_or_insert_with(|| RetrievalSummary::new(ctx.config.chunk_size, ctx.config.k))
                        .absorb(s);
                }
                predictions.push(run);
            }
            Err(e) => failures.push(PatientFailure {
                patient_id,
                error: e.to_string(),
            }),
        }
    }

    let rows: Vec<_> = MedicalVariableKind::ALL
        .into_iter()
        .zip(&totals)
        .map(|(v, c)| compute_metrics(v, *c))
        .collect();
    let macro_f1 = macro_average(&rows)?;
    let report = EvalReport {
        schema_version: super::report::REPORT_SCHEMA_VERSION,
        setups: vec![SetupReport {
            setup: ctx.config.setup,
            config: ctx.config.clone(),
            patients: predictions.len(),
            rows,
            macro_f1,
            failures,
            retrieval,
        }],
        metadata: RunMetadata {
            seed: ctx.config.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at,
            finished_at: now(),
        },
    };
    Ok(RunOutput { predictions, report })
}

/// Loads everything named by `cfg`, runs it, and writes the report when an
/// output directory is configured.
pub fn run_setup(cfg: RunConfig) -> Result<RunOutput> {
    let ctx = RunContext::from_config(cfg)?;
    let corpus = load_patient_corpus(&ctx.config.corpus)?;
    let gold = load_gold_standard(&ctx.config.gold, &ctx.ontology)?;
    let out = evaluate(&corpus, &gold, &ctx)?;
    if let Some(dir) = &ctx.config.out {
        super::report::emit_report(&out.report, dir)?;
        super::report::emit_predictions(&out.predictions, dir)?;
    }
    Ok(out)
}
