mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{oracle_compatible, random_ontology, reaches};
use medrec_core::ontology::{OntologyGraph, SemanticAxis};

#[test]
fn lung_cancer_and_breast_cancer_meet_only_through_cancer() {
    let onto = OntologyGraph::bundled();
    assert!(onto.compatible("lung_cancer", "cancer").unwrap());
    assert!(onto.compatible("cancer", "breast_cancer").unwrap());
    assert!(!onto.compatible("lung_cancer", "breast_cancer").unwrap());
}

#[test]
fn cross_axis_is_incompatible_not_an_error() {
    let onto = OntologyGraph::bundled();
    assert_eq!(onto.compatible("lung_cancer", "carboplatin").unwrap(), false);
    assert!(onto.compatible("lung_cancer", "no_such_concept").is_err());
}

#[test]
fn bundled_lookup_is_a_function_per_axis() {
    let onto = OntologyGraph::bundled();
    for (name, concepts) in onto.name_index() {
        for axis in SemanticAxis::ALL {
            let on_axis = concepts.iter().filter(|c| c.axis == axis).count();
            assert!(on_axis <= 1, "`{name}` names {on_axis} concepts on {axis}");
        }
    }
}

#[test]
fn bundled_subtype_is_reflexive_transitive_antisymmetric() {
    let onto = OntologyGraph::bundled();
    let ids: Vec<String> = onto.concepts().map(|c| c.concept_id.clone()).collect();
    for a in &ids {
        assert!(onto.is_subtype_of(a, a).unwrap());
        for b in &ids {
            let ab = onto.is_subtype_of(a, b).unwrap();
            if a != b && ab {
                assert!(!onto.is_subtype_of(b, a).unwrap(), "{a} <-> {b}");
            }
            if !ab {
                continue;
            }
            for c in &ids {
                if onto.is_subtype_of(b, c).unwrap() {
                    assert!(onto.is_subtype_of(a, c).unwrap(), "{a} < {b} < {c}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn subtype_matches_reachability(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = random_ontology(&mut rng, false);
        let ids: Vec<String> = o.parents.keys().cloned().collect();
        for _ in 0..50 {
            let a = &ids[rng.gen_range(0..ids.len())];
            let b = &ids[rng.gen_range(0..ids.len())];
            prop_assert_eq!(o.graph.is_subtype_of(a, b).unwrap(), reaches(&o.parents, a, b), "{} < {}", a, b);
            prop_assert_eq!(o.graph.compatible(a, b).unwrap(), oracle_compatible(&o, a, b));
            prop_assert_eq!(o.graph.compatible(a, b).unwrap(), o.graph.compatible(b, a).unwrap());
            if oracle_compatible(&o, a, b) {
                let m = o.graph.most_specific(a, b).unwrap();
                prop_assert!(m == a || m == b);
                prop_assert!(reaches(&o.parents, m, a) && reaches(&o.parents, m, b));
            }
        }
    }

    #[test]
    fn text_form_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = random_ontology(&mut rng, false);
        let again = medrec_core::ontology::parse_ontology(&o.graph.to_text(), "round trip").unwrap();
        for id in o.parents.keys() {
            prop_assert_eq!(again.concept(id), o.graph.concept(id));
        }
    }
}
