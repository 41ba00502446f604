//! Deterministic synthetic patient corpus.
//!
//! Each patient gets one pathology report carrying the diagnosis, histology,
//! TNM categories, stage group and biomarker results, one progress note per
//! treatment/outcome fact, and filler documents (lab results, insurance
//! forms, letters, education sheets). The noisy variant adds newsletters that
//! name unrelated cancers and leaflets listing drug side effects.
//!
//! Record counts per patient are drawn uniformly from [5, 75] and then
//! rebalanced so the corpus averages 34 records per patient.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::templates::{render_side_effects, template_for, FactSlot, Fill};
use super::{CancerCohort, GoldEntry, GoldStandard, GoldValue, PatientRecordSet, RawDocumentText, COHORTS_FILE};
use crate::error::{Error, Result};
use crate::ontology::OntologyGraph;
use crate::preprocess::DocumentCategory;
use crate::variables::MedicalVariableKind as Var;

pub const MIN_RECORDS: usize = 5;
pub const MAX_RECORDS: usize = 75;
pub const TARGET_MEAN_RECORDS: f64 = 34.0;

const COHORT_SHARES: [(CancerCohort, f64); 3] = [
    (CancerCohort::Colorectal, 0.42),
    (CancerCohort::Breast, 0.28),
    (CancerCohort::Lung, 0.30),
];

const FIRST_NAMES: &[&str] = &[
    "Alice", "Bernard", "Carmen", "Dmitri", "Elena", "Farid", "Greta", "Hector", "Ingrid", "Jonas",
    "Keiko", "Lionel", "Marisol", "Nadia", "Oskar", "Priya", "Quentin", "Rosalind", "Stefan",
    "Tamsin", "Ulrich", "Valeria", "Wendell", "Ximena", "Yusuf", "Zora",
];

const LAST_NAMES: &[&str] = &[
    "Abernathy", "Bellweather", "Castellano", "Dunmore", "Eberhardt", "Fairweather", "Galloway",
    "Hollister", "Iverson", "Jablonski", "Kowalczyk", "Lindqvist", "Montoya", "Nakamura",
    "Oyelaran", "Pemberton", "Quigley", "Rasmussen", "Szymanski", "Thackeray", "Underhill",
    "Vasquez", "Whitcombe", "Yamaguchi", "Zielinski",
];

const STREETS: &[&str] = &["Maple Street", "Harbor Avenue", "Orchard Road", "Linden Lane", "Cedar Drive"];

const SIDE_EFFECTS: &[&str] = &[
    "nausea",
    "fatigue",
    "hair thinning",
    "mouth sores",
    "diarrhea",
    "skin rash",
    "tingling in the fingers",
    "loss of appetite",
];

/// Cancers that newsletters advertise; incompatible with every cohort.
const NEWSLETTER_CANCERS: &[&str] = &["prostate_cancer", "pancreatic_cancer", "ovarian_cancer", "gastric_cancer"];

struct CohortPools {
    neoplasm: &'static [(&'static str, &'static [&'static str])],
    medications: &'static [&'static str],
    surgeries: &'static [&'static str],
    procedures: &'static [&'static str],
    biomarkers: &'static [&'static str],
    site: &'static str,
}

fn pools(cohort: CancerCohort) -> CohortPools {
    match cohort {
        CancerCohort::Lung => CohortPools {
            neoplasm: &[
                (
                    "nsclc",
                    &["adenocarcinoma", "squamous_cell_carcinoma", "large_cell_carcinoma"],
                ),
                ("sclc", &["small_cell_carcinoma"]),
            ],
            medications: &[
                "carboplatin",
                "cisplatin",
                "pemetrexed",
                "paclitaxel",
                "docetaxel",
                "osimertinib",
                "erlotinib",
                "alectinib",
                "pembrolizumab",
                "nivolumab",
                "durvalumab",
                "gemcitabine",
            ],
            surgeries: &["lobectomy", "wedge_resection", "pneumonectomy", "segmentectomy"],
            procedures: &["ct_chest", "pet_scan", "bronchoscopy", "brain_mri", "core_needle_biopsy"],
            biomarkers: &["egfr", "alk", "ros1", "pdl1", "kras"],
            site: "lung",
        },
        CancerCohort::Breast => CohortPools {
            neoplasm: &[
                (
                    "breast_cancer",
                    &["invasive_ductal_carcinoma", "invasive_lobular_carcinoma", "dcis"],
                ),
                ("tnbc", &["invasive_ductal_carcinoma"]),
            ],
            medications: &[
                "doxorubicin",
                "cyclophosphamide",
                "paclitaxel",
                "docetaxel",
                "tamoxifen",
                "letrozole",
                "anastrozole",
                "trastuzumab",
                "capecitabine",
                "pembrolizumab",
            ],
            surgeries: &["modified_radical_mastectomy", "lumpectomy", "sentinel_node_biopsy"],
            procedures: &["mammogram", "breast_mri", "breast_ultrasound", "core_needle_biopsy", "bone_scan"],
            biomarkers: &["estrogen_receptor", "progesterone_receptor", "her2", "ki67", "brca1"],
            site: "breast",
        },
        CancerCohort::Colorectal | CancerCohort::Other => CohortPools {
            neoplasm: &[
                (
                    "colon_cancer",
                    &["adenocarcinoma", "mucinous_adenocarcinoma", "signet_ring_carcinoma"],
                ),
                ("rectal_cancer", &["adenocarcinoma", "mucinous_adenocarcinoma"]),
            ],
            medications: &[
                "fluorouracil",
                "leucovorin",
                "oxaliplatin",
                "irinotecan",
                "capecitabine",
                "bevacizumab",
                "cetuximab",
            ],
            surgeries: &[
                "right_hemicolectomy",
                "left_hemicolectomy",
                "sigmoidectomy",
                "low_anterior_resection",
                "abdominoperineal_resection",
            ],
            procedures: &["colonoscopy", "ct_abdomen", "pet_scan", "core_needle_biopsy"],
            biomarkers: &["kras", "nras", "braf", "msi", "mmr", "cea"],
            site: "colon",
        },
    }
}

const T_LEAVES: &[&str] = &["t1a", "t1b", "t1c", "t2a", "t2b", "t3", "t4a", "t4b"];
const N_LEAVES: &[&str] = &["n0", "n1a", "n1b", "n2a", "n2b", "n3"];
const M_LEAVES: &[&str] = &["m0", "m1a", "m1b", "m1c"];
const STAGE_LEAVES: &[&str] = &[
    "stage_ia", "stage_ib", "stage_iia", "stage_iib", "stage_iiia", "stage_iiib", "stage_iiic", "stage_iva",
    "stage_ivb",
];
const OUTCOMES: &[&str] = &[
    "complete_remission",
    "partial_remission",
    "local_recurrence",
    "distant_recurrence",
    "no_evidence_of_disease",
];
const RESPONSES: &[&str] = &[
    "complete_response",
    "partial_response",
    "stable_disease",
    "disease_progression",
    "mixed_response",
];
const METHODS: &[&str] = &["pcr", "ihc", "fish", "ngs"];
const INTERPRETATIONS: &[&str] = &["positive", "negative", "equivocal"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub n_patients: usize,
    /// Adds newsletters naming other cancers and side-effect leaflets.
    pub noise: bool,
}

impl SyntheticConfig {
    pub fn noise_free(seed: u64, n_patients: usize) -> Self {
        SyntheticConfig {
            seed,
            n_patients,
            noise: false,
        }
    }

    pub fn noisy(seed: u64, n_patients: usize) -> Self {
        SyntheticConfig {
            seed,
            n_patients,
            noise: true,
        }
    }
}

/// One clinical document with the category the generator intended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticDocument {
    pub category: DocumentCategory,
    pub text: String,
}

/// One record file; holds one or more documents back to back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticRecord {
    pub file_stem: String,
    pub documents: Vec<SyntheticDocument>,
}

impl SyntheticRecord {
    pub const SEPARATOR: &'static str = "\n\n";

    pub fn text(&self) -> String {
        self.documents
            .iter()
            .map(|d| d.text.as_str())
            .collect::<Vec<_>>()
            .join(Self::SEPARATOR)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticPatient {
    pub patient_id: String,
    pub cohort: CancerCohort,
    pub records: Vec<SyntheticRecord>,
    /// Person names and identifiers planted in the records.
    pub phi: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticCorpus {
    pub config: SyntheticConfig,
    pub patients: Vec<SyntheticPatient>,
    pub gold: GoldStandard,
}

impl SyntheticCorpus {
    pub fn generate(config: &SyntheticConfig, ontology: &OntologyGraph) -> Result<Self> {
        check_ontology(ontology)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let n = config.n_patients;
        let counts = record_counts(&mut rng, n);
        let cohorts = assign_cohorts(&mut rng, n);

        let mut patients = Vec::with_capacity(n);
        let mut gold = GoldStandard::default();
        for i in 0..n {
            let patient_seed = rng.gen::<u64>();
            let mut prng = ChaCha8Rng::seed_from_u64(patient_seed);
            let pid = format!("patient_{:03}", i + 1);
            let (patient, entry) = generate_patient(&mut prng, &pid, cohorts[i], counts[i], config.noise, ontology);
            gold.patients.insert(pid, entry);
            patients.push(patient);
        }
        Ok(SyntheticCorpus {
            config: config.clone(),
            patients,
            gold,
        })
    }

    pub fn to_record_sets(&self) -> Vec<PatientRecordSet> {
        self.patients
            .iter()
            .map(|p| PatientRecordSet {
                patient_id: p.patient_id.clone(),
                records: p
                    .records
                    .iter()
                    .map(|r| RawDocumentText::new(r.file_stem.clone(), r.text()))
                    .collect(),
                cancer_cohort: p.cohort,
            })
            .collect()
    }

    /// Every gazetteer name; one per line in `gazetteer.txt`.
    pub fn gazetteer() -> Vec<String> {
        FIRST_NAMES.iter().chain(LAST_NAMES).map(|s| s.to_string()).collect()
    }

    /// Writes `corpus/<pid>/<record>.txt`, `corpus/cohorts.tsv`, `gold.tsv`,
    /// `gazetteer.txt` and `ontology.txt` under `out`. Returns the corpus root.
    pub fn write(&self, out: &Path, ontology: &OntologyGraph) -> Result<PathBuf> {
        let root = out.join("corpus");
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let mut cohorts = String::new();
        for p in &self.patients {
            let dir = root.join(&p.patient_id);
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            for r in &p.records {
                let path = dir.join(format!("{}.txt", r.file_stem));
                std::fs::write(&path, r.text()).map_err(|e| Error::io(&path, e))?;
            }
            let _ = writeln!(cohorts, "{}\t{}", p.patient_id, p.cohort);
        }
        write_file(&root.join(COHORTS_FILE), &cohorts)?;
        write_file(&out.join("gold.tsv"), &self.gold.to_tsv())?;
        write_file(&out.join("gazetteer.txt"), &(Self::gazetteer().join("\n") + "\n"))?;
        write_file(&out.join("ontology.txt"), &ontology.to_text())?;
        Ok(root)
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Generates a corpus and writes it under `out`; returns the corpus root and
/// the gold standard.
pub fn generate_synthetic_corpus(
    config: &SyntheticConfig,
    ontology: &OntologyGraph,
    out: &Path,
) -> Result<(PathBuf, GoldStandard)> {
    let corpus = SyntheticCorpus::generate(config, ontology)?;
    let root = corpus.write(out, ontology)?;
    Ok((root, corpus.gold))
}

fn check_ontology(onto: &OntologyGraph) -> Result<()> {
    let mut needed: BTreeSet<&str> = BTreeSet::new();
    for cohort in [CancerCohort::Colorectal, CancerCohort::Breast, CancerCohort::Lung] {
        let p = pools(cohort);
        for (neo, morphs) in p.neoplasm {
            needed.insert(neo);
            needed.extend(morphs.iter());
        }
        for list in [p.medications, p.surgeries, p.procedures, p.biomarkers] {
            needed.extend(list.iter());
        }
    }
    for list in [
        T_LEAVES,
        N_LEAVES,
        M_LEAVES,
        STAGE_LEAVES,
        OUTCOMES,
        RESPONSES,
        METHODS,
        INTERPRETATIONS,
        NEWSLETTER_CANCERS,
    ] {
        needed.extend(list.iter());
    }
    for id in needed {
        if !onto.contains(id) {
            return Err(Error::Config(format!(
                "synthetic generator needs concept `{id}`, which the ontology lacks"
            )));
        }
    }
    Ok(())
}

/// Uniform draws from [5, 75], nudged one record at a time until the total
/// equals round(34 * n).
fn record_counts(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = (0..n).map(|_| rng.gen_range(MIN_RECORDS..=MAX_RECORDS)).collect();
    if n == 0 {
        return counts;
    }
    let target = (TARGET_MEAN_RECORDS * n as f64).round() as usize;
    let mut total: usize = counts.iter().sum();
    while total != target {
        let i = rng.gen_range(0..n);
        if total > target && counts[i] > MIN_RECORDS {
            counts[i] -= 1;
            total -= 1;
        } else if total < target && counts[i] < MAX_RECORDS {
            counts[i] += 1;
            total += 1;
        }
    }
    counts
}

/// Largest-remainder apportionment of the cohort shares, then shuffled.
fn assign_cohorts(rng: &mut ChaCha8Rng, n: usize) -> Vec<CancerCohort> {
    let quotas: Vec<f64> = COHORT_SHARES.iter().map(|(_, s)| s * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..COHORT_SHARES.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut left = n - counts.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    let mut out: Vec<CancerCohort> = COHORT_SHARES
        .iter()
        .zip(&counts)
        .flat_map(|((c, _), &k)| std::iter::repeat(*c).take(k))
        .collect();
    out.shuffle(rng);
    out
}

struct Person {
    first: String,
    last: String,
    mrn: String,
    phone: String,
    dob: NaiveDate,
    doctor: String,
}

impl Person {
    fn header(&self) -> String {
        format!(
            "Patient: {} {}    MRN: {}    Phone: {}\nDOB: {}",
            self.first,
            self.last,
            self.mrn,
            self.phone,
            self.dob.format("%Y-%m-%d")
        )
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &'a [&'a str]) -> &'a str {
    items.choose(rng).copied().expect("non-empty pool")
}

fn pick_n<'a>(rng: &mut ChaCha8Rng, items: &'a [&'a str], lo: usize, hi: usize) -> Vec<&'a str> {
    let n = rng.gen_range(lo..=hi.min(items.len()));
    let mut chosen: Vec<&str> = items.choose_multiple(rng, n).copied().collect();
    // keep output independent of the sampler's internal ordering
    chosen.sort_by_key(|id| items.iter().position(|x| x == id));
    chosen
}

fn name<'a>(onto: &'a OntologyGraph, id: &str) -> &'a str {
    &onto.concept(id).expect("checked concept").preferred_name
}

/// Pathologic TNM code as written in reports: `pT2a`, `pN1`, `cM0`.
fn tnm_surface(onto: &OntologyGraph, id: &str, prefix: char) -> String {
    format!("{prefix}{}", name(onto, id))
}

fn distinct_dates(rng: &mut ChaCha8Rng, base: NaiveDate, lo: i64, hi: i64, n: usize, used: &mut BTreeSet<NaiveDate>) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let d = base + Duration::days(rng.gen_range(lo..=hi));
        if used.insert(d) {
            out.push(d);
        }
    }
    out
}

struct PatientFacts {
    neoplasm: &'static str,
    morphology: &'static str,
    t: &'static str,
    n: &'static str,
    m: &'static str,
    stage: &'static str,
    diagnosis_date: NaiveDate,
    medications: Vec<(&'static str, NaiveDate)>,
    surgeries: Vec<(&'static str, NaiveDate)>,
    procedures: Vec<(&'static str, NaiveDate)>,
    biomarkers: Vec<(&'static str, &'static str, &'static str)>,
    outcomes: Vec<(&'static str, NaiveDate)>,
    responses: Vec<(&'static str, NaiveDate)>,
}

fn draw_facts(rng: &mut ChaCha8Rng, cohort: CancerCohort) -> PatientFacts {
    let p = pools(cohort);
    let (neoplasm, morphs) = *p.neoplasm.choose(rng).expect("pool");
    let morphology = pick(rng, morphs);
    let diagnosis_date = NaiveDate::from_ymd_opt(2015, 1, 1).expect("date") + Duration::days(rng.gen_range(0..2400));
    let mut used = BTreeSet::from([diagnosis_date]);

    let meds = pick_n(rng, p.medications, 1, 3);
    let med_dates = distinct_dates(rng, diagnosis_date, 20, 400, meds.len(), &mut used);
    let surg = pick_n(rng, p.surgeries, 1, 2);
    let surg_dates = distinct_dates(rng, diagnosis_date, 10, 200, surg.len(), &mut used);
    let procs = pick_n(rng, p.procedures, 1, 3);
    let proc_dates = distinct_dates(rng, diagnosis_date, -60, -1, procs.len(), &mut used);
    let markers = pick_n(rng, p.biomarkers, 1, 3);
    let biomarkers = markers
        .into_iter()
        .map(|b| (b, pick(rng, METHODS), pick(rng, INTERPRETATIONS)))
        .collect();
    let outs = pick_n(rng, OUTCOMES, 0, 1);
    let out_dates = distinct_dates(rng, diagnosis_date, 300, 900, outs.len(), &mut used);
    let resps = pick_n(rng, RESPONSES, 0, 2);
    let resp_dates = distinct_dates(rng, diagnosis_date, 100, 700, resps.len(), &mut used);

    PatientFacts {
        neoplasm,
        morphology,
        t: pick(rng, T_LEAVES),
        n: pick(rng, N_LEAVES),
        m: pick(rng, M_LEAVES),
        stage: pick(rng, STAGE_LEAVES),
        diagnosis_date,
        medications: meds.into_iter().zip(med_dates).collect(),
        surgeries: surg.into_iter().zip(surg_dates).collect(),
        procedures: procs.into_iter().zip(proc_dates).collect(),
        biomarkers,
        outcomes: outs.into_iter().zip(out_dates).collect(),
        responses: resps.into_iter().zip(resp_dates).collect(),
    }
}

fn gold_entry(f: &PatientFacts, onto: &OntologyGraph) -> GoldEntry {
    let mut e = GoldEntry::default();
    e.insert(Var::Neoplasm, GoldValue::concept(f.neoplasm));
    e.insert(Var::Morphology, GoldValue::concept(f.morphology));
    e.insert(Var::TStage, GoldValue::concept(f.t));
    e.insert(Var::NStage, GoldValue::concept(f.n));
    e.insert(Var::MStage, GoldValue::concept(f.m));
    e.insert(Var::StageGroup, GoldValue::concept(f.stage));
    e.insert(Var::CancerDiagnosisDate, GoldValue::dated(f.neoplasm, f.diagnosis_date));
    for (id, _) in &f.medications {
        e.insert(Var::Medications, GoldValue::concept(id));
    }
    for (id, _) in &f.surgeries {
        e.insert(Var::Surgeries, GoldValue::concept(id));
    }
    for (id, _) in &f.procedures {
        e.insert(Var::DiagnosticProcedures, GoldValue::concept(id));
    }
    for (id, _, interp) in &f.biomarkers {
        e.insert(
            Var::TestedBiomarkers,
            GoldValue {
                qualifier: Some(name(onto, interp).to_string()),
                ..GoldValue::concept(id)
            },
        );
    }
    for (id, d) in &f.outcomes {
        e.insert(Var::Outcome, GoldValue::dated(id, *d));
    }
    for (id, d) in &f.responses {
        e.insert(Var::Response, GoldValue::dated(id, *d));
    }
    e
}

fn generate_patient(
    rng: &mut ChaCha8Rng,
    pid: &str,
    cohort: CancerCohort,
    n_records: usize,
    noise: bool,
    onto: &OntologyGraph,
) -> (SyntheticPatient, GoldEntry) {
    let facts = draw_facts(rng, cohort);
    let person = Person {
        first: pick(rng, FIRST_NAMES).to_string(),
        last: pick(rng, LAST_NAMES).to_string(),
        mrn: format!("{:07}", rng.gen_range(1_000_000..10_000_000u32)),
        phone: format!("555-{:04}", rng.gen_range(100..10_000u32)),
        dob: NaiveDate::from_ymd_opt(1940, 1, 1).expect("date") + Duration::days(rng.gen_range(0..13_000)),
        doctor: pick(rng, LAST_NAMES).to_string(),
    };
    let site = pools(cohort).site;
    let neo = name(onto, facts.neoplasm);

    let mut docs = vec![pathology_report(rng, &person, &facts, site, onto)];
    let mut fact_lines = Vec::new();
    for (id, d) in &facts.medications {
        fact_lines.push(template_for(FactSlot::Medication).render(&Fill {
            value: name(onto, id),
            date: Some(*d),
            ..Default::default()
        }));
    }
    for (id, d) in &facts.surgeries {
        fact_lines.push(template_for(FactSlot::Surgery).render(&Fill {
            value: name(onto, id),
            date: Some(*d),
            ..Default::default()
        }));
    }
    for (id, d) in &facts.procedures {
        fact_lines.push(template_for(FactSlot::DiagnosticProcedure).render(&Fill {
            value: name(onto, id),
            date: Some(*d),
            ..Default::default()
        }));
    }
    for (id, d) in &facts.outcomes {
        fact_lines.push(template_for(FactSlot::Outcome).render(&Fill {
            value: name(onto, id),
            date: Some(*d),
            ..Default::default()
        }));
    }
    for (id, d) in &facts.responses {
        fact_lines.push(template_for(FactSlot::Response).render(&Fill {
            value: name(onto, id),
            date: Some(*d),
            ..Default::default()
        }));
    }
    for line in fact_lines {
        docs.push(progress_note(rng, &person, neo, Some(&line)));
    }
    for _ in 0..rng.gen_range(1..=2) {
        docs.push(progress_note(rng, &person, neo, None));
    }
    if noise {
        for _ in 0..rng.gen_range(1..=2) {
            let cancer = name(onto, pick(rng, NEWSLETTER_CANCERS));
            docs.push(newsletter(rng, cancer));
        }
        for (id, _) in &facts.medications {
            docs.push(side_effect_leaflet(rng, &person, name(onto, id)));
        }
    }

    let extra = rng.gen_range(0..=n_records / 6);
    let fillers = n_records.saturating_sub(docs.len()) + extra;
    for _ in 0..fillers {
        let doc = match rng.gen_range(0..4) {
            0 => lab_results(rng, &person),
            1 => insurance_form(rng, &person),
            2 => letter(rng, &person),
            _ => wellness_sheet(rng, &person),
        };
        docs.push(doc);
    }
    docs.shuffle(rng);

    // one document per record first, the rest appended to random records
    let mut buckets: Vec<Vec<SyntheticDocument>> = vec![Vec::new(); n_records];
    let mut it = docs.into_iter();
    for b in buckets.iter_mut() {
        b.push(it.next().expect("at least one document per record"));
    }
    for doc in it {
        let i = rng.gen_range(0..n_records);
        buckets[i].push(doc);
    }
    let records = buckets
        .into_iter()
        .enumerate()
        .map(|(i, documents)| SyntheticRecord {
            file_stem: format!("r{i:03}"),
            documents,
        })
        .collect();

    let phi = vec![
        person.first.clone(),
        person.last.clone(),
        person.doctor.clone(),
        person.mrn.clone(),
        person.phone.clone(),
    ];
    let patient = SyntheticPatient {
        patient_id: pid.to_string(),
        cohort,
        records,
        phi,
    };
    (patient, gold_entry(&facts, onto))
}

fn pathology_report(
    rng: &mut ChaCha8Rng,
    person: &Person,
    f: &PatientFacts,
    site: &str,
    onto: &OntologyGraph,
) -> SyntheticDocument {
    let neo = name(onto, f.neoplasm);
    let mut t = format!("PATHOLOGY REPORT\n{}\n\n", person.header());
    let _ = writeln!(
        t,
        "Specimen: tissue from the {site}, received in formalin in {} parts.",
        rng.gen_range(1..=4)
    );
    let _ = writeln!(
        t,
        "Gross description: tan-white fragments measuring {}.{} cm in aggregate.",
        rng.gen_range(1..=6),
        rng.gen_range(0..=9)
    );
    t.push_str(
        &template_for(FactSlot::NeoplasmDiagnosis).render(&Fill {
            value: neo,
            date: Some(f.diagnosis_date),
            ..Default::default()
        }),
    );
    t.push('\n');
    t.push_str(&template_for(FactSlot::NeoplasmMention).render(&Fill {
        value: neo,
        ..Default::default()
    }));
    t.push('\n');
    for (slot, text) in [
        (FactSlot::Morphology, name(onto, f.morphology).to_string()),
        (FactSlot::TStage, tnm_surface(onto, f.t, 'p')),
        (FactSlot::NStage, tnm_surface(onto, f.n, 'p')),
        (FactSlot::MStage, tnm_surface(onto, f.m, 'c')),
        (FactSlot::StageGroup, name(onto, f.stage).to_string()),
    ] {
        t.push_str(&template_for(slot).render(&Fill {
            value: &text,
            ..Default::default()
        }));
        t.push('\n');
    }
    t.push_str("Ancillary studies:");
    for (marker, method, interp) in &f.biomarkers {
        t.push(' ');
        t.push_str(&template_for(FactSlot::Biomarker).render(&Fill {
            value: name(onto, marker),
            method: Some(name(onto, method)),
            qualifier: Some(name(onto, interp)),
            ..Default::default()
        }));
    }
    t.push('\n');
    t.push_str("Margins: clear. Microscopic sections reviewed with appropriate controls.\n");
    let _ = write!(t, "\nElectronically signed by Dr. {}", person.doctor);
    SyntheticDocument {
        category: DocumentCategory::Pathology,
        text: t,
    }
}

fn progress_note(rng: &mut ChaCha8Rng, person: &Person, neoplasm: &str, fact: Option<&str>) -> SyntheticDocument {
    let feeling = pick(rng, &["well", "tired", "about the same", "somewhat better"]);
    let mut t = format!("PROGRESS NOTE\n{}\n\n", person.header());
    let _ = writeln!(
        t,
        "SUBJECTIVE: Patient reports feeling {feeling} since the last visit. Sleep and appetite are stable."
    );
    let _ = writeln!(
        t,
        "OBJECTIVE: Vital signs within normal limits. Weight {} kg. Alert and oriented.",
        rng.gen_range(48..=110)
    );
    let _ = writeln!(t, "ASSESSMENT: {}", template_for_mention(neoplasm));
    if let Some(line) = fact {
        let _ = writeln!(t, "{line}");
    }
    let _ = writeln!(
        t,
        "PLAN: Continue the current plan and return to clinic in {} weeks.",
        rng.gen_range(2..=12)
    );
    let _ = write!(t, "\nDr. {}", person.doctor);
    SyntheticDocument {
        category: DocumentCategory::SoapNote,
        text: t,
    }
}

fn template_for_mention(neoplasm: &str) -> String {
    super::templates::templates_for(FactSlot::NeoplasmMention)
        .find(|t| t.text.starts_with("Follow-up"))
        .expect("follow-up template")
        .render(&Fill {
            value: neoplasm,
            ..Default::default()
        })
}

fn lab_results(rng: &mut ChaCha8Rng, person: &Person) -> SyntheticDocument {
    let mut t = format!("LABORATORY RESULTS\n{}\n\n", person.header());
    let _ = writeln!(
        t,
        "Hemoglobin: {}.{} g/dL (reference range 12.0 - 16.0)",
        rng.gen_range(10..=16),
        rng.gen_range(0..=9)
    );
    let _ = writeln!(t, "White blood cell count: {}.{} K/uL", rng.gen_range(3..=11), rng.gen_range(0..=9));
    let _ = writeln!(t, "Platelets: {} K/uL (reference range 150 - 400)", rng.gen_range(140..=420));
    let _ = writeln!(t, "Sodium: {} mmol/L", rng.gen_range(133..=146));
    let _ = writeln!(t, "Creatinine: 0.{} mg/dL", rng.gen_range(6..=9));
    t.push_str("All laboratory values reviewed by the laboratory director.");
    SyntheticDocument {
        category: DocumentCategory::LabResults,
        text: t,
    }
}

fn insurance_form(rng: &mut ChaCha8Rng, person: &Person) -> SyntheticDocument {
    let mut t = format!("INSURANCE AUTHORIZATION FORM\n{}\n\n", person.header());
    let _ = writeln!(t, "Member ID: XK-{}", rng.gen_range(10_000..100_000u32));
    let _ = writeln!(
        t,
        "SSN: {:03}-{:02}-{:04}",
        rng.gen_range(100..900u32),
        rng.gen_range(10..100u32),
        rng.gen_range(1000..10_000u32)
    );
    t.push_str(
        "The insurance carrier has received the authorization request for outpatient services. \
         Billing questions about this claim may be directed to the member services line. \
         Please keep this form with your policy documents.",
    );
    SyntheticDocument {
        category: DocumentCategory::Administrative,
        text: t,
    }
}

fn letter(rng: &mut ChaCha8Rng, person: &Person) -> SyntheticDocument {
    let street = pick(rng, STREETS);
    let mut t = format!("CORRESPONDENCE LETTER\n{}\n\n", person.header());
    let _ = writeln!(t, "{} {street}", rng.gen_range(10..2000u32));
    let _ = writeln!(t, "Dear Dr. {},", person.doctor);
    t.push_str(
        "Thank you for the referral of your patient to our clinic. We have scheduled an \
         appointment and will share our notes after the visit. Please contact our office \
         with any questions.\n",
    );
    let _ = write!(
        t,
        "Sincerely,\n{} {}, {}.{}@example.org",
        person.first,
        person.last,
        person.first.to_lowercase(),
        person.last.to_lowercase()
    );
    SyntheticDocument {
        category: DocumentCategory::Administrative,
        text: t,
    }
}

fn wellness_sheet(rng: &mut ChaCha8Rng, person: &Person) -> SyntheticDocument {
    let topic = pick(rng, &["healthy eating", "staying active", "restful sleep", "hand hygiene"]);
    let mut t = format!("PATIENT EDUCATION SHEET\n{}\n\n", person.header());
    let _ = write!(
        t,
        "Topic: {topic}. This education sheet offers general tips for everyday wellness. \
         Drink plenty of water, take short walks when you can, and keep a regular routine. \
         Bring any questions to your next appointment."
    );
    SyntheticDocument {
        category: DocumentCategory::Other,
        text: t,
    }
}

fn side_effect_leaflet(rng: &mut ChaCha8Rng, person: &Person, drug: &str) -> SyntheticDocument {
    let items = pick_n(rng, SIDE_EFFECTS, 3, 4);
    let mut t = format!("PATIENT EDUCATION SHEET\n{}\n\n", person.header());
    let _ = writeln!(t, "About {drug}: this education sheet explains what to expect.");
    t.push_str(&render_side_effects(&items));
    t.push_str(
        "\nCall the clinic if symptoms are severe. Keep a diary of how you feel each day \
         and bring it to your next appointment.",
    );
    SyntheticDocument {
        category: DocumentCategory::Other,
        text: t,
    }
}

fn newsletter(rng: &mut ChaCha8Rng, cancer: &str) -> SyntheticDocument {
    let day = pick(rng, &["Saturday", "Sunday", "Wednesday"]);
    let t = format!(
        "COMMUNITY HEALTH NEWSLETTER\n\nThis month the clinic newsletter highlights {cancer} awareness. \
         Free information sessions are held every {day} morning in the main lobby. Volunteers are \
         welcome to join the planning committee, and refreshments will be served. Please share \
         this newsletter with friends and family."
    );
    SyntheticDocument {
        category: DocumentCategory::Other,
        text: t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_corpus() {
        let onto = OntologyGraph::bundled();
        let a = SyntheticCorpus::generate(&SyntheticConfig::noisy(1, 1), &onto).unwrap();
        let b = SyntheticCorpus::generate(&SyntheticConfig::noisy(1, 1), &onto).unwrap();
        assert_eq!(a, b);
        let c = SyntheticCorpus::generate(&SyntheticConfig::noisy(2, 1), &onto).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn record_counts_in_range_with_target_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [1, 3, 10, 100] {
            let counts = record_counts(&mut rng, n);
            assert!(counts.iter().all(|c| (MIN_RECORDS..=MAX_RECORDS).contains(c)));
            assert_eq!(counts.iter().sum::<usize>(), (34.0 * n as f64).round() as usize);
        }
        assert!(record_counts(&mut rng, 0).is_empty());
    }

    #[test]
    fn cohort_shares() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = assign_cohorts(&mut rng, 100);
        let count = |k| c.iter().filter(|&&x| x == k).count();
        assert_eq!(count(CancerCohort::Colorectal), 42);
        assert_eq!(count(CancerCohort::Breast), 28);
        assert_eq!(count(CancerCohort::Lung), 30);
    }

    #[test]
    fn documents_are_long_enough_and_gold_is_complete() {
        let onto = OntologyGraph::bundled();
        let corpus = SyntheticCorpus::generate(&SyntheticConfig::noisy(5, 6), &onto).unwrap();
        for p in &corpus.patients {
            for r in &p.records {
                assert!(!r.documents.is_empty());
                for d in &r.documents {
                    assert!(d.text.len() >= 200, "short document: {:?}", d.text);
                }
            }
            let e = corpus.gold.entry(&p.patient_id).unwrap();
            assert!(e.populated() >= 11);
            for v in [Var::Neoplasm, Var::Morphology, Var::TStage, Var::CancerDiagnosisDate] {
                assert_eq!(e.get(v).len(), 1);
            }
        }
    }

    #[test]
    fn zero_patients_is_valid() {
        let onto = OntologyGraph::bundled();
        let corpus = SyntheticCorpus::generate(&SyntheticConfig::noise_free(1, 0), &onto).unwrap();
        assert!(corpus.patients.is_empty());
        assert!(corpus.gold.is_empty());
    }
}
