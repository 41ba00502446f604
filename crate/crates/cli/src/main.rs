use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use medrec_core::corpus::{generate_synthetic_corpus, SyntheticConfig};
use medrec_core::harness::tables::{check_f1_cells, check_macros, PublishedTables, F1_TOLERANCE, MACRO_TOLERANCE};
use medrec_core::harness::{emit_predictions, emit_report, render_table, run_setup, RunConfig, SetupKind};
use medrec_core::llm::{Anomalies, BackendConfig, DEFAULT_CHUNK_SIZE, DEFAULT_CONTEXT_BUDGET, DEFAULT_K};
use medrec_core::ontology::{load_ontology, OntologyGraph};
use medrec_core::preprocess::DEFAULT_MIN_SEGMENT_LEN;
use medrec_core::reasoning::DEFAULT_TAU;

#[derive(Parser)]
#[command(name = "medrec", version, about = "Abstract cancer variables from patient records and score them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more setups over a corpus and score them against gold.
    Run(RunArgs),
    /// Write a synthetic corpus with gold annotations.
    GenCorpus {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        patients: usize,
        #[arg(long)]
        out: PathBuf,
        /// Leave out newsletters and side-effect leaflets.
        #[arg(long)]
        noise_free: bool,
        /// Ontology the corpus must be expressible in (bundled by default).
        #[arg(long)]
        ontology: Option<PathBuf>,
    },
    /// Recompute published F1 cells from precision/recall and the published
    /// macro averages from F1 rows.
    VerifyTables {
        /// Tab-separated table transcription (bundled by default).
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Exit non-zero when any check misses its tolerance.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// nlp, ret, gen, retgen, standalone (comma-separated or repeated), or all.
    #[arg(long, value_delimiter = ',', required = true)]
    setup: Vec<String>,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    ontology: Option<PathBuf>,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    questions: Option<PathBuf>,
    /// `mock` or `http:URL`.
    #[arg(long, default_value = "mock")]
    embedder: String,
    /// `mock` or `http:URL`.
    #[arg(long, default_value = "mock")]
    generator: String,
    #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
    chunk_size: usize,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    #[arg(long, default_value_t = 0.67)]
    temperature: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mock generator failure modes: inconsistent, hallucinate, confuse_generic, all.
    #[arg(long, default_value = "none")]
    anomalies: String,
    /// Names to redact, one per line.
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    /// Also cut records where neighbouring paragraph embeddings diverge.
    #[arg(long)]
    embedding_segmenter: bool,
    #[arg(long, default_value_t = DEFAULT_MIN_SEGMENT_LEN)]
    segment_min_len: usize,
    #[arg(long, default_value_t = DEFAULT_CONTEXT_BUDGET)]
    context_budget: usize,
    #[arg(long)]
    workers: Option<usize>,
}

fn backend(spec: &str, mut base: BackendConfig) -> Result<BackendConfig> {
    match spec.trim() {
        "mock" => Ok(base),
        s => match s.strip_prefix("http:") {
            Some(rest) => {
                // accept both `http:host:port` and `http:http://host:port`
                let url = if rest.starts_with("http://") || rest.starts_with("https://") {
                    rest.to_string()
                } else {
                    format!("http:{rest}")
                };
                base.backend_id = format!("http:{url}");
                base.endpoint = Some(url);
                Ok(base)
            }
            None => bail!("backend must be `mock` or `http:URL`, got `{s}`"),
        },
    }
}

fn setups(names: &[String]) -> Result<Vec<SetupKind>> {
    let mut out = Vec::new();
    for n in names {
        if n.trim().eq_ignore_ascii_case("all") {
            out.extend(SetupKind::ALL);
        } else {
            out.push(n.parse::<SetupKind>().map_err(anyhow::Error::msg)?);
        }
    }
    out.dedup();
    Ok(out)
}

fn run(args: RunArgs) -> Result<()> {
    let anomalies = Anomalies::parse(&args.anomalies)?;
    let mut report = None;
    for setup in setups(&args.setup)? {
        let mut cfg = RunConfig::new(setup, &args.corpus, &args.gold);
        let mut emb = BackendConfig::mock_embedder();
        emb.chunk_size = args.chunk_size;
        emb.k = args.k;
        let mut gen = BackendConfig::mock_generator();
        gen.chunk_size = args.chunk_size;
        gen.k = args.k;
        gen.temperature = Some(args.temperature);
        cfg.embedder = (setup.needs_embedder() || args.embedding_segmenter)
            .then(|| backend(&args.embedder, emb))
            .transpose()?;
        cfg.generator = setup.needs_generator().then(|| backend(&args.generator, gen)).transpose()?;
        cfg.chunk_size = args.chunk_size;
        cfg.k = args.k;
        cfg.tau = args.tau;
        cfg.ontology = args.ontology.clone();
        cfg.questions = args.questions.clone();
        cfg.gazetteer = args.gazetteer.clone();
        cfg.seed = args.seed;
        cfg.anomalies = anomalies;
        cfg.context_budget = args.context_budget;
        cfg.embedding_segmenter = args.embedding_segmenter;
        cfg.segment_min_len = args.segment_min_len;
        cfg.workers = args.workers;

        let out = run_setup(cfg).with_context(|| format!("setup {setup}"))?;
        for s in &out.report.setups {
            for f in &s.failures {
                eprintln!("warning: {}: patient {} failed: {}", s.setup, f.patient_id, f.error);
            }
        }
        if let Some(dir) = &args.out {
            emit_predictions(&out.predictions, dir.join(setup.short_name()))?;
        }
        match &mut report {
            None => report = Some(out.report),
            Some(r) => r.merge(out.report),
        }
    }
    let report = report.context("no setup selected")?;
    if let Some(dir) = &args.out {
        let (json, table) = emit_report(&report, dir)?;
        eprintln!("wrote {} and {}", json.display(), table.display());
    }
    print!("{}", render_table(&report));
    Ok(())
}

fn gen_corpus(seed: u64, patients: usize, out: PathBuf, noise_free: bool, ontology: Option<PathBuf>) -> Result<()> {
    let onto = match ontology {
        Some(p) => load_ontology(&p)?,
        None => OntologyGraph::bundled(),
    };
    let cfg = if noise_free {
        SyntheticConfig::noise_free(seed, patients)
    } else {
        SyntheticConfig::noisy(seed, patients)
    };
    let (root, gold) = generate_synthetic_corpus(&cfg, &onto, &out)?;
    println!(
        "wrote {} patients to {} (gold: {}, {} annotated patients)",
        patients,
        root.display(),
        out.join("gold.tsv").display(),
        gold.len()
    );
    Ok(())
}

fn verify_tables(tables: Option<PathBuf>, strict: bool) -> Result<bool> {
    let t = match tables {
        Some(p) => PublishedTables::load(&p)?,
        None => PublishedTables::bundled(),
    };
    let cells = check_f1_cells(&t, F1_TOLERANCE);
    let mut ok = true;
    for c in cells.iter().filter(|c| !c.pass) {
        ok = false;
        println!(
            "MISS {} / {} / {}: P={:.2} R={:.2} -> F1={:.3}, reported {:.2}",
            c.setup,
            c.model,
            c.variable,
            c.precision,
            c.recall,
            c.computed_f1,
            c.reported_f1
        );
    }
    let passed = cells.iter().filter(|c| c.pass).count();
    println!("F1 cells within ±{F1_TOLERANCE}: {passed}/{}", cells.len());
    for m in check_macros(&t, MACRO_TOLERANCE)? {
        ok &= m.pass;
        println!(
            "{} macro {} / {}: computed {:.3}, reported {:.2}",
            if m.pass { "ok  " } else { "MISS" },
            m.setup,
            m.model,
            m.computed,
            m.reported
        );
    }
    Ok(ok || !strict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args).map(|_| true),
        Command::GenCorpus {
            seed,
            patients,
            out,
            noise_free,
            ontology,
        } => gen_corpus(seed, patients, out, noise_free, ontology).map(|_| true),
        Command::VerifyTables { tables, strict } => verify_tables(tables, strict),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
