//! End-to-end runs of the five setups, scoring against gold, and reports.

mod metrics;
mod pipeline;
mod report;
mod standalone;
pub mod tables;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::llm::{Anomalies, BackendConfig, BackendKind, DEFAULT_CHUNK_SIZE, DEFAULT_CONTEXT_BUDGET, DEFAULT_K};
use crate::preprocess::DEFAULT_MIN_SEGMENT_LEN;
use crate::reasoning::DEFAULT_TAU;

pub use metrics::{
    compute_metrics, f1_score, macro_average, macro_mean, match_predictions, match_values, value_credit, Counts,
    VariableMetrics,
};
pub use pipeline::{evaluate, run_patient, run_setup, Backends, PatientRun, RetrievalStats, RunContext, RunOutput};
pub use report::{
    emit_predictions, emit_report, load_report, render_table, EvalReport, PatientFailure, RetrievalSummary,
    RunMetadata, SetupReport, PREDICTIONS_FILE, REPORT_FILE, REPORT_SCHEMA_VERSION, TABLE_FILE,
};
pub use standalone::answers_to_readout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SetupKind {
    NlpReasoning,
    RetNlpReasoning,
    GenNlpReasoning,
    RetGenNlpReasoning,
    StandaloneLlm,
}

impl SetupKind {
    pub const ALL: [SetupKind; 5] = [
        SetupKind::NlpReasoning,
        SetupKind::RetNlpReasoning,
        SetupKind::GenNlpReasoning,
        SetupKind::RetGenNlpReasoning,
        SetupKind::StandaloneLlm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SetupKind::NlpReasoning => "NLP_REASONING",
            SetupKind::RetNlpReasoning => "RET_NLP_REASONING",
            SetupKind::GenNlpReasoning => "GEN_NLP_REASONING",
            SetupKind::RetGenNlpReasoning => "RET_GEN_NLP_REASONING",
            SetupKind::StandaloneLlm => "STANDALONE_LLM",
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            SetupKind::NlpReasoning => "nlp",
            SetupKind::RetNlpReasoning => "ret",
            SetupKind::GenNlpReasoning => "gen",
            SetupKind::RetGenNlpReasoning => "retgen",
            SetupKind::StandaloneLlm => "standalone",
        }
    }

    pub fn needs_embedder(self) -> bool {
        self != SetupKind::NlpReasoning
    }

    pub fn needs_generator(self) -> bool {
        matches!(
            self,
            SetupKind::GenNlpReasoning | SetupKind::RetGenNlpReasoning | SetupKind::StandaloneLlm
        )
    }
}

impl fmt::Display for SetupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SetupKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        SetupKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s) || k.short_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown setup `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub setup: SetupKind,
    pub embedder: Option<BackendConfig>,
    pub generator: Option<BackendConfig>,
    pub chunk_size: usize,
    pub k: usize,
    pub tau: f64,
    pub corpus: PathBuf,
    /// Bundled ontology when absent.
    pub ontology: Option<PathBuf>,
    pub gold: PathBuf,
    /// Bundled question bank when absent.
    pub questions: Option<PathBuf>,
    /// Extra names for de-identification, one per line.
    pub gazetteer: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub anomalies: Anomalies,
    /// Prompt budget in whitespace tokens.
    pub context_budget: usize,
    /// Add embedding-based cuts to the rule segmenter (needs an embedder).
    pub embedding_segmenter: bool,
    pub segment_min_len: usize,
    /// Worker threads for patients; the rayon default when absent.
    pub workers: Option<usize>,
}

impl RunConfig {
    /// Defaults for `setup`, with mock backends wherever the setup needs one.
    pub fn new(setup: SetupKind, corpus: impl Into<PathBuf>, gold: impl Into<PathBuf>) -> Self {
        RunConfig {
            setup,
            embedder: setup.needs_embedder().then(BackendConfig::mock_embedder),
            generator: setup.needs_generator().then(BackendConfig::mock_generator),
            chunk_size: DEFAULT_CHUNK_SIZE,
            k: DEFAULT_K,
            tau: DEFAULT_TAU,
            corpus: corpus.into(),
            ontology: None,
            gold: gold.into(),
            questions: None,
            gazetteer: None,
            out: None,
            seed: 0,
            anomalies: Anomalies::none(),
            context_budget: DEFAULT_CONTEXT_BUDGET,
            embedding_segmenter: false,
            segment_min_len: DEFAULT_MIN_SEGMENT_LEN,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let need = |what: &str| Error::Config(format!("setup {} requires {what}", self.setup));
        if self.setup.needs_embedder() && self.embedder.is_none() {
            return Err(need("an embedder"));
        }
        if self.setup.needs_generator() && self.generator.is_none() {
            return Err(need("a generator"));
        }
        if self.embedding_segmenter && self.embedder.is_none() {
            return Err(Error::Config("the embedding segmenter requires an embedder".into()));
        }
        for (b, kind) in [(&self.embedder, BackendKind::Embedder), (&self.generator, BackendKind::Generator)] {
            if let Some(b) = b {
                if b.kind != kind {
                    return Err(Error::Config(format!("{} is not an {kind:?} backend", b.backend_id)));
                }
                b.validate()?;
            }
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::Config("chunk size must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Config(format!("tau {} outside [0, 1]", self.tau)));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setup_names_round_trip() {
        for s in SetupKind::ALL {
            assert_eq!(s.name().parse::<SetupKind>().unwrap(), s);
            assert_eq!(s.short_name().parse::<SetupKind>().unwrap(), s);
        }
        assert!("hybrid".parse::<SetupKind>().is_err());
    }

    #[test]
    fn backend_requirements() {
        for s in SetupKind::ALL {
            assert!(RunConfig::new(s, "c", "g").validate().is_ok());
        }
        let mut c = RunConfig::new(SetupKind::RetNlpReasoning, "c", "g");
        c.embedder = None;
        assert!(c.validate().is_err());
        let mut c = RunConfig::new(SetupKind::StandaloneLlm, "c", "g");
        c.generator = None;
        assert!(c.validate().is_err());
        let c = RunConfig::new(SetupKind::NlpReasoning, "c", "g");
        assert!(c.embedder.is_none() && c.generator.is_none());
    }
}
