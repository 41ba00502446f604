//! Line-oriented ontology file:
//! `concept_id|axis|preferred_name|parent_ids|synonyms`, with comma-separated
//! parent and synonym lists (either may be empty) and `#` comment lines.

use std::collections::HashSet;
use std::path::Path;

use super::{Concept, OntologyGraph};
use crate::error::{Error, Result};

pub fn load_ontology(path: impl AsRef<Path>) -> Result<OntologyGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ontology(&text, &path.display().to_string())
}

pub fn parse_ontology(text: &str, source: &str) -> Result<OntologyGraph> {
    let mut concepts = Vec::new();
    let mut seen = HashSet::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                source,
                line_no,
                format!("expected 5 `|`-separated fields, found {}", fields.len()),
            ));
        }
        let id = fields[0];
        if id.is_empty() {
            return Err(Error::parse(source, line_no, "empty concept id"));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::DuplicateConcept(id.to_string()));
        }
        let axis = fields[1]
            .parse()
            .map_err(|e: String| Error::parse(source, line_no, e))?;
        let name = if fields[2].is_empty() { id } else { fields[2] };
        let mut concept = Concept::new(id, axis, name);
        for p in split_list(fields[3]) {
            concept.parents.insert(p.to_string());
        }
        for s in split_list(fields[4]) {
            concept.synonyms.insert(s.to_string());
        }
        concepts.push(concept);
    }
    OntologyGraph::from_concepts(concepts)
}

fn split_list(field: &str) -> impl Iterator<Item = &str> {
    field.split(',').map(str::trim).filter(|s| !s.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::SemanticAxis;

    #[test]
    fn three_line_file() {
        let o = parse_ontology(
            "# toy\ncancer|Neoplasm|cancer||\nlung_cancer|Neoplasm|lung cancer|cancer|\nbreast_cancer|Neoplasm|breast cancer|cancer|\n",
            "toy",
        )
        .unwrap();
        assert_eq!(o.len(), 3);
        assert_eq!(o.edge_count(), 2);
    }

    #[test]
    fn cycle_names_members() {
        let err = parse_ontology("a|Other|a|b|\nb|Other|b|a|\n", "loop").unwrap_err();
        match err {
            Error::OntologyCycle(mut ids) => {
                ids.sort();
                assert_eq!(ids, vec!["a", "b"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_dangling_rejected() {
        assert!(matches!(
            parse_ontology("a|Other|a||\na|Other|a2||\n", "dup"),
            Err(Error::DuplicateConcept(id)) if id == "a"
        ));
        assert!(matches!(
            parse_ontology("a|Other|a|ghost|\n", "dangling"),
            Err(Error::UnknownConcept(id)) if id == "ghost"
        ));
        assert!(matches!(
            parse_ontology("a|Nowhere|a||\n", "axis"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn synonyms_parsed() {
        let o = parse_ontology("fu|Medication|fluorouracil||5-FU, 5 fluorouracil\n", "s").unwrap();
        assert_eq!(
            o.lookup("5-fu", SemanticAxis::Medication).unwrap().concept_id,
            "fu"
        );
    }
}
