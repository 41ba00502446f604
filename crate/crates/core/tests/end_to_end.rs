use medrec_core::corpus::{LoadedCorpus, SyntheticConfig, SyntheticCorpus};
use medrec_core::extraction::{Extractor, PreferredNameTagger, RelationRules};
use medrec_core::harness::{
    emit_report, evaluate, load_report, run_setup, RunConfig, RunContext, RunOutput, SetupKind,
};
use medrec_core::llm::{Anomalies, BackendConfig, QuestionBank};
use medrec_core::ontology::OntologyGraph;
use medrec_core::preprocess::Gazetteer;
use medrec_core::variables::MedicalVariableKind;

fn context(cfg: RunConfig) -> RunContext {
    RunContext::new(
        cfg,
        OntologyGraph::bundled(),
        QuestionBank::bundled(),
        Gazetteer::new(SyntheticCorpus::gazetteer()),
    )
    .unwrap()
}

fn loaded(corpus: &SyntheticCorpus) -> LoadedCorpus {
    LoadedCorpus {
        patients: corpus.to_record_sets(),
        warnings: Vec::new(),
    }
}

fn run_with(corpus: &SyntheticCorpus, cfg: RunConfig) -> RunOutput {
    evaluate(&loaded(corpus), &corpus.gold, &context(cfg)).unwrap()
}

fn run(corpus: &SyntheticCorpus, setup: SetupKind, anomalies: Anomalies) -> RunOutput {
    let mut cfg = RunConfig::new(setup, "unused", "unused");
    cfg.anomalies = anomalies;
    cfg.seed = corpus.config.seed;
    run_with(corpus, cfg)
}

fn corpus(noisy: bool) -> SyntheticCorpus {
    let cfg = if noisy {
        SyntheticConfig::noisy(7, 10)
    } else {
        SyntheticConfig::noise_free(7, 10)
    };
    SyntheticCorpus::generate(&cfg, &OntologyGraph::bundled()).unwrap()
}

#[test]
fn noise_free_corpus_is_recovered_exactly() {
    let out = run(&corpus(false), SetupKind::NlpReasoning, Anomalies::none());
    let s = &out.report.setups[0];
    assert_eq!(s.patients, 10);
    assert!(s.failures.is_empty());
    for r in &s.rows {
        assert_eq!(r.f1, 1.0, "{}: tp={} fp={} fn={}", r.variable, r.tp, r.fp, r.fn_);
    }
}

#[test]
fn distractors_do_not_derail_the_baseline() {
    let out = run(&corpus(true), SetupKind::NlpReasoning, Anomalies::none());
    for r in &out.report.setups[0].rows {
        assert!(r.f1 >= 0.9, "{}: {}", r.variable, r.f1);
    }
}

#[test]
fn second_tagger_plugs_in_unchanged() {
    let c = corpus(false);
    let mut ctx = context(RunConfig::new(SetupKind::NlpReasoning, "unused", "unused"));
    ctx.extractor = Extractor::new(Box::new(PreferredNameTagger::new(&ctx.ontology)), RelationRules::defaults());
    let out = evaluate(&loaded(&c), &c.gold, &ctx).unwrap();
    let s = &out.report.setups[0];
    assert!(s.failures.is_empty());
    assert_eq!(s.rows.len(), 13);
    out.report.validate().unwrap();
    // the generator writes preferred names, so nothing is lost
    assert_eq!(s.macro_f1, 1.0);
}

#[test]
fn worker_count_does_not_change_results() {
    let c = corpus(true);
    let payload = |workers| {
        let mut cfg = RunConfig::new(SetupKind::RetGenNlpReasoning, "unused", "unused");
        cfg.anomalies = Anomalies::all();
        cfg.workers = Some(workers);
        run_with(&c, cfg).report.metrics_payload().unwrap()
    };
    assert_eq!(payload(1), payload(4));
}

#[test]
fn retrieving_everything_reproduces_the_baseline() {
    let c = corpus(false);
    let base = run(&c, SetupKind::NlpReasoning, Anomalies::none());
    let mut cfg = RunConfig::new(SetupKind::RetNlpReasoning, "unused", "unused");
    cfg.k = 10_000;
    let ret = run_with(&c, cfg);
    for (a, b) in base.predictions.iter().zip(&ret.predictions) {
        assert_eq!(a.patient_id, b.patient_id);
        assert_eq!(a.readout, b.readout, "{}", a.patient_id);
    }
    assert_eq!(base.report.setups[0].rows, ret.report.setups[0].rows);
}

#[test]
fn anomalies_hurt_the_answer_only_setups_most() {
    let c = corpus(true);
    let macro_of = |setup, anomalies| run(&c, setup, anomalies).report.setups[0].macro_f1;
    let nlp = macro_of(SetupKind::NlpReasoning, Anomalies::none());
    let standalone = macro_of(SetupKind::StandaloneLlm, Anomalies::all());
    let gen = macro_of(SetupKind::GenNlpReasoning, Anomalies::all());
    assert!(standalone < nlp, "{standalone} vs {nlp}");
    assert!(gen > standalone, "{gen} vs {standalone}");
    assert!(macro_of(SetupKind::StandaloneLlm, Anomalies::none()) > standalone);
}

#[test]
fn unreachable_generator_fails_patients_not_the_run() {
    let c = corpus(false);
    let mut cfg = RunConfig::new(SetupKind::GenNlpReasoning, "unused", "unused");
    let mut g = BackendConfig::mock_generator();
    g.endpoint = Some("http://127.0.0.1:9".into());
    cfg.generator = Some(g);
    let out = run_with(&c, cfg);
    let s = &out.report.setups[0];
    assert_eq!(s.failures.len(), 10);
    assert_eq!(s.patients, 0);
    assert_eq!(s.rows.len(), 13);
    assert_eq!(s.macro_f1, 0.0);
}

#[test]
fn missing_backend_is_a_config_error() {
    let mut cfg = RunConfig::new(SetupKind::GenNlpReasoning, "unused", "unused");
    cfg.embedder = None;
    assert!(cfg.validate().is_err());
    let mut cfg = RunConfig::new(SetupKind::NlpReasoning, "unused", "unused");
    assert!(cfg.validate().is_ok());
    cfg.embedding_segmenter = true;
    assert!(cfg.validate().is_err());
}

#[test]
fn corpus_on_disk_runs_and_reports() {
    let onto = OntologyGraph::bundled();
    let c = SyntheticCorpus::generate(&SyntheticConfig::noise_free(3, 4), &onto).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let root = c.write(dir.path(), &onto).unwrap();
    let mut cfg = RunConfig::new(SetupKind::NlpReasoning, root, dir.path().join("gold.tsv"));
    cfg.gazetteer = Some(dir.path().join("gazetteer.txt"));
    cfg.out = Some(dir.path().join("out"));
    let out = run_setup(cfg).unwrap();
    assert_eq!(out.report.setups[0].macro_f1, 1.0);
    assert!(dir.path().join("out/predictions.json").is_file());
    assert!(dir.path().join("out/table.txt").is_file());

    let back = load_report(dir.path().join("out/report.json")).unwrap();
    back.validate().unwrap();
    assert_eq!(back.metrics_payload().unwrap(), out.report.metrics_payload().unwrap());

    // writing the loaded report again gives the same bytes
    let again = tempfile::tempdir().unwrap();
    let (json, _) = emit_report(&back, again.path()).unwrap();
    assert_eq!(
        std::fs::read_to_string(json).unwrap(),
        std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()
    );
}

#[test]
fn generation_is_byte_deterministic() {
    let onto = OntologyGraph::bundled();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        SyntheticCorpus::generate(&SyntheticConfig::noisy(11, 3), &onto)
            .unwrap()
            .write(d.path(), &onto)
            .unwrap();
    }
    let read = |d: &tempfile::TempDir| std::fs::read_to_string(d.path().join("gold.tsv")).unwrap();
    assert_eq!(read(&a), read(&b));
    let ca = medrec_core::corpus::load_patient_corpus(a.path().join("corpus")).unwrap();
    let cb = medrec_core::corpus::load_patient_corpus(b.path().join("corpus")).unwrap();
    assert_eq!(ca.patients, cb.patients);
}

#[test]
fn every_variable_has_gold_in_the_synthetic_corpus() {
    let c = corpus(false);
    for v in MedicalVariableKind::ALL {
        assert!(c.gold.patients.values().any(|e| !e.get(v).is_empty()), "{v}");
    }
}
