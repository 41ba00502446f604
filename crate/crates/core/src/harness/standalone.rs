use crate::llm::{parse_answer, GeneratedAnswer, QuestionBank};
use crate::ontology::OntologyGraph;
use crate::reasoning::{ReadoutValue, VariableReadout};
use crate::variables::ValueRef;

/// Generated answers taken at face value: every parsed item becomes a value
/// of each variable its question targets. Items naming a concept are
/// attached only to variables on that concept's axis; unresolvable items
/// stay literals on all targets.
pub fn answers_to_readout(answers: &[GeneratedAnswer], questions: &QuestionBank, onto: &OntologyGraph) -> VariableReadout {
    let mut out = VariableReadout::default();
    let mut sorted: Vec<&GeneratedAnswer> = answers.iter().collect();
    sorted.sort_by_key(|a| a.question_index);
    for a in sorted {
        let targets = questions.targets(a.question_index);
        for item in parse_answer(&a.answer_text) {
            let resolved: Vec<_> = targets
                .iter()
                .map(|v| (*v, onto.lookup(&item.value, v.axis())))
                .collect();
            let any = resolved.iter().any(|(_, c)| c.is_some());
            for (var, concept) in resolved {
                let value = match concept {
                    Some(c) => ValueRef::Concept(c.concept_id.clone()),
                    None if !any => ValueRef::Literal(item.value.clone()),
                    None => continue,
                };
                let v = ReadoutValue {
                    value,
                    date: item.date,
                    qualifier: item.qualifier.clone(),
                    confidence: 1.0,
                };
                if !out.get(var).iter().any(|x| x.value == v.value && x.date == v.date) {
                    out.push(var, v);
                }
            }
        }
    }
    out
}
