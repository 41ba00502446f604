use proptest::prelude::*;

use medrec_core::extraction::{Extractor, LexiconTagger, PreferredNameTagger, RelationRules, Tagger};
use medrec_core::ontology::OntologyGraph;
use medrec_core::preprocess::{ClinicalDocument, DocProvenance, DocumentCategory};

fn piece() -> impl Strategy<Value = String> {
    let names: Vec<String> = OntologyGraph::bundled()
        .concepts()
        .flat_map(|c| c.names().map(str::to_string).collect::<Vec<_>>())
        .collect();
    prop_oneof![
        3 => prop::sample::select(names),
        2 => "[a-z]{1,9}",
        1 => "(19|20)[0-9]{2}-(0[1-9]|1[0-2])-[0-3][0-9]",
        1 => "[0-1]?[0-9]/[0-3]?[0-9]/20[0-9]{2}",
        1 => "[cp]?T[0-4][a-c]? ?N[0-3] ?M[01]",
        1 => prop::sample::select(vec![". ", ", ", " on ", " was ", "\n", " (", ") ", "-", "é"]).prop_map(str::to_string),
    ]
}

fn document() -> impl Strategy<Value = String> {
    prop::collection::vec(piece(), 0..40).prop_map(|v| v.join(" "))
}

fn doc(text: &str) -> ClinicalDocument {
    ClinicalDocument {
        doc_id: "p/r.s0".into(),
        patient_id: "p".into(),
        category: DocumentCategory::Other,
        text: text.to_string(),
        provenance: DocProvenance::SourceRecord,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn mentions_are_sorted_disjoint_slices(text in document()) {
        let onto = OntologyGraph::bundled();
        let taggers: [Box<dyn Tagger>; 2] = [Box::new(LexiconTagger::new(&onto)), Box::new(PreferredNameTagger::new(&onto))];
        for tagger in taggers {
            let ms = tagger.tag(&text);
            for (i, m) in ms.iter().enumerate() {
                prop_assert_eq!(m.mention_id, i);
                prop_assert!(m.start < m.end && m.end <= text.len());
                prop_assert_eq!(&m.surface, &text[m.start..m.end]);
                prop_assert!(m.candidates.windows(2).all(|w| w[0].score >= w[1].score));
                prop_assert_eq!(m.date.is_some(), m.entity_type.axis().is_none());
                prop_assert_eq!(m.candidates.is_empty(), m.entity_type.axis().is_none());
                if i > 0 {
                    prop_assert!(ms[i - 1].end <= m.start);
                }
            }
        }
    }

    #[test]
    fn edges_resolve_and_graphs_are_deterministic(text in document()) {
        let onto = OntologyGraph::bundled();
        let ex = Extractor::new(Box::new(LexiconTagger::new(&onto)), RelationRules::defaults());
        let g = ex.build_tag_graph(&doc(&text));
        for e in &g.edges {
            prop_assert!(e.from != e.to);
            prop_assert!(g.mention(e.from).is_some() && g.mention(e.to).is_some());
            prop_assert!(e.score > 0.0 && e.score <= 1.0);
        }
        prop_assert_eq!(ex.build_tag_graph(&doc(&text)), g);
    }
}
