use serde::{Deserialize, Serialize};

use super::answers::{format_answer, AnswerItem, NO_INFORMATION};
use super::embed::{agent, backend_error};
use super::questions::QuestionBank;
use super::{whitespace_tokens, Chunk, GeneratedAnswer};
use crate::corpus::templates::{extract_facts, extract_side_effect_lists, ExtractedFact, FactSlot};
use crate::error::{Error, Result};
use crate::variables::MedicalVariableKind;

pub const PROMPT_VERSION: &str = "qa-v1";

pub const PROMPT_TEMPLATE: &str = "You are abstracting an oncology patient's medical record.\n\
Answer the question using only the context below. Give each item as \
`value on YYYY-MM-DD (qualifier)`, omitting the date or qualifier when unknown, \
and separate items with `; `. If the context does not answer the question, reply \
`no information found`.\n\nContext:\n{context}\n\nQuestion: {question}\nAnswer:";

/// Prompt budget in whitespace tokens.
pub const DEFAULT_CONTEXT_BUDGET: usize = 16_000;

pub fn build_prompt(question: &str, context: &[&str]) -> String {
    PROMPT_TEMPLATE
        .replace("{context}", &context.join("\n\n---\n\n"))
        .replace("{question}", question)
}

#[derive(Debug, Clone)]
pub struct GenerationRequest<'a> {
    pub question_index: usize,
    pub question: &'a str,
    /// Context passages, best-ranked first.
    pub context: Vec<&'a str>,
    pub prompt: String,
    pub temperature: f64,
}

pub trait Generator: Send + Sync {
    fn backend_id(&self) -> &str;

    fn generate(&self, request: &GenerationRequest<'_>) -> Result<String>;
}

/// Builds the prompt, dropping the lowest-ranked chunks until it fits the
/// budget, and asks the backend. An empty context is answered without a
/// backend call.
pub fn generate_answer(
    question_index: usize,
    question: &str,
    context_chunks: &[Chunk],
    backend: &dyn Generator,
    temperature: f64,
    budget: usize,
) -> Result<GeneratedAnswer> {
    let mut context: Vec<&str> = context_chunks.iter().map(|c| c.text.as_str()).collect();
    let mut prompt = build_prompt(question, &context);
    while !context.is_empty() && whitespace_tokens(&prompt).len() > budget {
        context.pop();
        prompt = build_prompt(question, &context);
    }
    let answer_text = if context.is_empty() {
        NO_INFORMATION.to_string()
    } else {
        let request = GenerationRequest {
            question_index,
            question,
            context,
            prompt,
            temperature,
        };
        backend.generate(&request).map_err(|e| Error::Generation {
            question_index,
            source: Box::new(e),
        })?
    };
    Ok(GeneratedAnswer {
        question_index,
        answer_text,
        backend_id: backend.backend_id().to_string(),
        temperature,
    })
}

/// Failure modes observed in generated answers, switchable one by one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anomalies {
    /// The patient summary names a different cancer than the record.
    pub inconsistent: bool,
    /// Multi-valued answers gain one value that the context never states.
    pub hallucinate: bool,
    /// Medication questions are answered with side-effect lists.
    pub confuse_generic: bool,
}

impl Anomalies {
    pub fn none() -> Self {
        Anomalies::default()
    }

    pub fn all() -> Self {
        Anomalies {
            inconsistent: true,
            hallucinate: true,
            confuse_generic: true,
        }
    }

    pub fn any(&self) -> bool {
        self.inconsistent || self.hallucinate || self.confuse_generic
    }

    /// Comma-separated mode names; `none` and `all` are accepted.
    pub fn parse(s: &str) -> Result<Self> {
        let mut a = Anomalies::none();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "none" => {}
                "all" => a = Anomalies::all(),
                "inconsistent" => a.inconsistent = true,
                "hallucinate" => a.hallucinate = true,
                "confuse_generic" => a.confuse_generic = true,
                other => return Err(Error::Config(format!("unknown anomaly mode `{other}`"))),
            }
        }
        Ok(a)
    }
}

const GENERIC_SIDE_EFFECTS: &[&str] = &["nausea", "fatigue", "hair loss"];

const ALTERNATE_CANCERS: &[(&str, &[&str])] = &[
    ("breast cancer", &["breast", "tnbc"]),
    ("lung cancer", &["lung", "nsclc", "sclc"]),
    ("colorectal cancer", &["colo", "rect", "crc"]),
];

fn hallucination_pool(v: MedicalVariableKind) -> &'static [&'static str] {
    use MedicalVariableKind::*;
    match v {
        Medications => &["doxorubicin", "cyclophosphamide", "irinotecan", "bevacizumab", "nivolumab"],
        Surgeries => &["pneumonectomy", "sigmoidectomy", "lumpectomy", "wedge resection"],
        DiagnosticProcedures => &["bone scan", "brain MRI", "bronchoscopy", "breast ultrasound"],
        TestedBiomarkers => &["BRCA2", "ROS1", "CEA", "Ki-67"],
        Outcome => &["distant recurrence", "local recurrence"],
        Response => &["mixed response", "stable disease"],
        _ => &[],
    }
}

fn mix(seed: u64, s: &str) -> u64 {
    // splitmix-style scramble of the seed folded over the bytes
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for b in s.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h ^= h >> 31;
    }
    h
}

/// Deterministic stand-in for a generative model: reads templated facts out
/// of the context and formats them, optionally with injected anomalies.
#[derive(Debug, Clone, Default)]
pub struct MockGenerator {
    pub seed: u64,
    pub anomalies: Anomalies,
}

impl MockGenerator {
    pub fn new(seed: u64, anomalies: Anomalies) -> Self {
        MockGenerator { seed, anomalies }
    }

    fn items_for(var: MedicalVariableKind, facts: &[ExtractedFact]) -> Vec<AnswerItem> {
        use MedicalVariableKind::*;
        fn of<'a>(facts: &'a [ExtractedFact], slots: &'a [FactSlot]) -> impl Iterator<Item = &'a ExtractedFact> + 'a {
            facts.iter().filter(move |f| slots.contains(&f.slot))
        }
        let slot_facts = |slots: &'static [FactSlot]| of(facts, slots);
        let distinct = |slot: FactSlot, with_date: bool, with_qualifier: bool| {
            let mut items: Vec<AnswerItem> = Vec::new();
            for f in of(facts, &[slot]) {
                let item = AnswerItem {
                    value: f.value.clone(),
                    date: if with_date { f.date } else { None },
                    qualifier: if with_qualifier { f.qualifier.clone() } else { None },
                };
                let dup = items.iter().any(|i| {
                    i.value.eq_ignore_ascii_case(&item.value) && (!with_date || i.date == item.date)
                });
                if !dup {
                    items.push(item);
                }
            }
            items
        };
        match var {
            Neoplasm => {
                // most frequently stated, first stated on ties
                let mut counts: Vec<(String, usize)> = Vec::new();
                for f in slot_facts(&[FactSlot::NeoplasmDiagnosis, FactSlot::NeoplasmMention]) {
                    match counts.iter_mut().find(|(v, _)| v.eq_ignore_ascii_case(&f.value)) {
                        Some((_, n)) => *n += 1,
                        None => counts.push((f.value.clone(), 1)),
                    }
                }
                let best = counts.iter().map(|(_, n)| *n).max();
                counts
                    .into_iter()
                    .find(|(_, n)| Some(*n) == best)
                    .map(|(v, _)| vec![AnswerItem::plain(v)])
                    .unwrap_or_default()
            }
            CancerDiagnosisDate => slot_facts(&[FactSlot::NeoplasmDiagnosis])
                .filter(|f| f.date.is_some())
                .min_by_key(|f| f.date)
                .map(|f| {
                    vec![AnswerItem {
                        value: f.value.clone(),
                        date: f.date,
                        qualifier: None,
                    }]
                })
                .unwrap_or_default(),
            Morphology | TStage | NStage | MStage | StageGroup => {
                let slot = match var {
                    Morphology => FactSlot::Morphology,
                    TStage => FactSlot::TStage,
                    NStage => FactSlot::NStage,
                    MStage => FactSlot::MStage,
                    _ => FactSlot::StageGroup,
                };
                of(facts, &[slot]).take(1).map(|f| AnswerItem::plain(&f.value)).collect()
            }
            Medications => distinct(FactSlot::Medication, true, false),
            Surgeries => distinct(FactSlot::Surgery, true, false),
            DiagnosticProcedures => distinct(FactSlot::DiagnosticProcedure, true, false),
            TestedBiomarkers => distinct(FactSlot::Biomarker, false, true),
            Outcome => distinct(FactSlot::Outcome, true, false),
            Response => distinct(FactSlot::Response, true, false),
        }
    }

    /// The answer items for question `index` given the context passages.
    pub fn answer_items(&self, index: usize, context: &[&str]) -> Vec<AnswerItem> {
        if context.is_empty() {
            return Vec::new();
        }
        let joined = context.join("\n\n");
        let facts = extract_facts(&joined);
        let targets = QuestionBank::bundled().targets(index);
        let mut items: Vec<AnswerItem> = Vec::new();
        for &var in targets {
            let mut var_items = if self.anomalies.confuse_generic && var == MedicalVariableKind::Medications {
                let mut effects: Vec<String> = Vec::new();
                for e in extract_side_effect_lists(&joined).into_iter().flatten() {
                    if !effects.iter().any(|x| x.eq_ignore_ascii_case(&e)) {
                        effects.push(e);
                    }
                }
                if effects.is_empty() {
                    effects = GENERIC_SIDE_EFFECTS.iter().map(|s| s.to_string()).collect();
                }
                effects.into_iter().map(AnswerItem::plain).collect()
            } else {
                Self::items_for(var, &facts)
            };
            if self.anomalies.inconsistent && index == 1 && var == MedicalVariableKind::Neoplasm {
                for item in &mut var_items {
                    let lower = item.value.to_lowercase();
                    if let Some((alt, _)) = ALTERNATE_CANCERS
                        .iter()
                        .find(|(_, keys)| !keys.iter().any(|k| lower.contains(k)))
                    {
                        item.value = alt.to_string();
                    }
                }
            }
            if self.anomalies.hallucinate {
                let pool = hallucination_pool(var);
                let lower = joined.to_lowercase();
                if !pool.is_empty() {
                    let start = (mix(self.seed, var.name()) % pool.len() as u64) as usize;
                    let absent = (0..pool.len())
                        .map(|i| pool[(start + i) % pool.len()])
                        .find(|v| !lower.contains(&v.to_lowercase()));
                    if let Some(v) = absent {
                        var_items.push(AnswerItem::plain(v));
                    }
                }
            }
            for it in var_items {
                if !items.contains(&it) {
                    items.push(it);
                }
            }
        }
        items
    }
}

impl Generator for MockGenerator {
    fn backend_id(&self) -> &str {
        "mock-generator"
    }

    fn generate(&self, request: &GenerationRequest<'_>) -> Result<String> {
        Ok(format_answer(&self.answer_items(request.question_index, &request.context)))
    }
}

#[derive(Serialize)]
struct GenerateBody<'a> {
    prompt: &'a str,
    temperature: f64,
}

#[derive(Deserialize)]
struct GenerateReply {
    text: String,
}

/// `POST {base}/generate` with `{"prompt", "temperature"}`, expecting `{"text"}`.
pub struct HttpGenerator {
    backend_id: String,
    url: String,
    agent: ureq::Agent,
}

impl HttpGenerator {
    pub fn new(base_url: &str) -> Self {
        HttpGenerator {
            backend_id: format!("http:{base_url}"),
            url: format!("{}/generate", base_url.trim_end_matches('/')),
            agent: agent(),
        }
    }
}

impl Generator for HttpGenerator {
    fn backend_id(&self) -> &str {
        &self.backend_id
    }

    fn generate(&self, request: &GenerationRequest<'_>) -> Result<String> {
        let reply: GenerateReply = self
            .agent
            .post(&self.url)
            .send_json(GenerateBody {
                prompt: &request.prompt,
                temperature: request.temperature,
            })
            .and_then(|mut r| r.body_mut().read_json())
            .map_err(|e| backend_error(&self.backend_id, e))?;
        Ok(reply.text)
    }
}
