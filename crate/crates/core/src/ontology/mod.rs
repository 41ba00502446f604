//! Hierarchical concept graph and the subtype / compatibility queries that
//! drive consolidation.
//!
//! The is-a relation is a DAG (concepts may have several parents). Subtype
//! checks are reflexive: every concept is a subtype of itself. Two concepts
//! are *compatible* when they share an axis and one subsumes the other. That
//! relation is symmetric and reflexive but not transitive: `lung_cancer` and
//! `breast_cancer` are both compatible with `cancer` and not with each other.

mod loader;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use loader::{load_ontology, parse_ontology};

pub type ConceptId = String;

const BUNDLED_ONTOLOGY: &str = include_str!("../../data/oncology.onto");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SemanticAxis {
    Neoplasm,
    Morphology,
    TStage,
    NStage,
    MStage,
    StageGroup,
    Medication,
    Outcome,
    Response,
    Biomarker,
    Surgery,
    DiagnosticProcedure,
    BodySite,
    Other,
}

impl SemanticAxis {
    pub const ALL: [SemanticAxis; 14] = [
        SemanticAxis::Neoplasm,
        SemanticAxis::Morphology,
        SemanticAxis::TStage,
        SemanticAxis::NStage,
        SemanticAxis::MStage,
        SemanticAxis::StageGroup,
        SemanticAxis::Medication,
        SemanticAxis::Outcome,
        SemanticAxis::Response,
        SemanticAxis::Biomarker,
        SemanticAxis::Surgery,
        SemanticAxis::DiagnosticProcedure,
        SemanticAxis::BodySite,
        SemanticAxis::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SemanticAxis::Neoplasm => "Neoplasm",
            SemanticAxis::Morphology => "Morphology",
            SemanticAxis::TStage => "TStage",
            SemanticAxis::NStage => "NStage",
            SemanticAxis::MStage => "MStage",
            SemanticAxis::StageGroup => "StageGroup",
            SemanticAxis::Medication => "Medication",
            SemanticAxis::Outcome => "Outcome",
            SemanticAxis::Response => "Response",
            SemanticAxis::Biomarker => "Biomarker",
            SemanticAxis::Surgery => "Surgery",
            SemanticAxis::DiagnosticProcedure => "DiagnosticProcedure",
            SemanticAxis::BodySite => "BodySite",
            SemanticAxis::Other => "Other",
        }
    }

    /// Stage axes are tagged by TNM pattern rather than by lexicon.
    pub fn is_tnm(self) -> bool {
        matches!(self, SemanticAxis::TStage | SemanticAxis::NStage | SemanticAxis::MStage)
    }
}

impl fmt::Display for SemanticAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SemanticAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown semantic axis `{}`", s.trim()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub concept_id: ConceptId,
    pub preferred_name: String,
    pub synonyms: BTreeSet<String>,
    pub axis: SemanticAxis,
    pub parents: BTreeSet<ConceptId>,
}

impl Concept {
    pub fn new(id: &str, axis: SemanticAxis, name: &str) -> Self {
        Concept {
            concept_id: id.to_string(),
            preferred_name: name.to_string(),
            synonyms: BTreeSet::new(),
            axis,
            parents: BTreeSet::new(),
        }
    }

    pub fn with_parent(mut self, parent: &str) -> Self {
        self.parents.insert(parent.to_string());
        self
    }

    pub fn with_synonym(mut self, synonym: &str) -> Self {
        self.synonyms.insert(synonym.to_string());
        self
    }

    /// Preferred name followed by synonyms.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.preferred_name.as_str()).chain(self.synonyms.iter().map(String::as_str))
    }
}

/// Lowercases and collapses internal whitespace; the key used for every
/// name lookup.
pub fn normalize_name(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone)]
pub struct OntologyGraph {
    concepts: Vec<Concept>,
    index: HashMap<ConceptId, usize>,
    /// Reflexive ancestor sets, by concept index.
    ancestors: Vec<BTreeSet<usize>>,
    depth: Vec<usize>,
    names: HashMap<String, Vec<usize>>,
    max_name_words: usize,
}

impl OntologyGraph {
    /// Validates and indexes a concept list: unique ids, resolvable parents,
    /// acyclic is-a edges, and at most one concept per (name, axis).
    pub fn from_concepts(concepts: Vec<Concept>) -> Result<Self> {
        let mut index = HashMap::with_capacity(concepts.len());
        for (i, c) in concepts.iter().enumerate() {
            if index.insert(c.concept_id.clone(), i).is_some() {
                return Err(Error::DuplicateConcept(c.concept_id.clone()));
            }
        }
        let mut parents: Vec<Vec<usize>> = Vec::with_capacity(concepts.len());
        for c in &concepts {
            let mut ps = Vec::with_capacity(c.parents.len());
            for p in &c.parents {
                let &pi = index.get(p).ok_or_else(|| Error::UnknownConcept(p.clone()))?;
                ps.push(pi);
            }
            parents.push(ps);
        }

        let order = topological_order(&concepts, &parents)?;
        let mut ancestors = vec![BTreeSet::new(); concepts.len()];
        let mut depth = vec![0usize; concepts.len()];
        for &i in &order {
            let mut set = BTreeSet::from([i]);
            let mut d = 0;
            for &p in &parents[i] {
                set.extend(ancestors[p].iter().copied());
                d = d.max(depth[p] + 1);
            }
            ancestors[i] = set;
            depth[i] = d;
        }

        let mut names: HashMap<String, Vec<usize>> = HashMap::new();
        let mut max_name_words = 0;
        for (i, c) in concepts.iter().enumerate() {
            for name in c.names() {
                let key = normalize_name(name);
                if key.is_empty() {
                    continue;
                }
                max_name_words = max_name_words.max(key.split(' ').count());
                let slot = names.entry(key.clone()).or_default();
                if slot.contains(&i) {
                    continue;
                }
                if let Some(&other) = slot.iter().find(|&&j| concepts[j].axis == c.axis) {
                    return Err(Error::Config(format!(
                        "name `{key}` maps to both `{}` and `{}` on axis {}",
                        concepts[other].concept_id, c.concept_id, c.axis
                    )));
                }
                slot.push(i);
            }
        }

        Ok(OntologyGraph {
            concepts,
            index,
            ancestors,
            depth,
            names,
            max_name_words,
        })
    }

    /// The toy oncology ontology shipped with the crate.
    pub fn bundled() -> Self {
        parse_ontology(BUNDLED_ONTOLOGY, "oncology.onto").expect("bundled ontology is valid")
    }

    pub fn bundled_source() -> &'static str {
        BUNDLED_ONTOLOGY
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.iter()
    }

    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.index.get(id).map(|&i| &self.concepts[i])
    }

    pub fn get(&self, id: &str) -> Result<&Concept> {
        self.concept(id).ok_or_else(|| Error::UnknownConcept(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    fn idx(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownConcept(id.to_string()))
    }

    /// Number of is-a edges.
    pub fn edge_count(&self) -> usize {
        self.concepts.iter().map(|c| c.parents.len()).sum()
    }

    /// Longest parent path to a root; roots have depth 0.
    pub fn depth(&self, id: &str) -> Result<usize> {
        Ok(self.depth[self.idx(id)?])
    }

    pub fn roots(&self, axis: SemanticAxis) -> impl Iterator<Item = &Concept> {
        self.concepts
            .iter()
            .filter(move |c| c.axis == axis && c.parents.is_empty())
    }

    pub fn is_subtype_of(&self, descendant: &str, ancestor: &str) -> Result<bool> {
        let d = self.idx(descendant)?;
        let a = self.idx(ancestor)?;
        Ok(self.ancestors[d].contains(&a))
    }

    /// Same axis and related by subtype in either direction. Cross-axis
    /// pairs are simply incompatible.
    pub fn compatible(&self, a: &str, b: &str) -> Result<bool> {
        let ai = self.idx(a)?;
        let bi = self.idx(b)?;
        if self.concepts[ai].axis != self.concepts[bi].axis {
            return Ok(false);
        }
        Ok(self.ancestors[ai].contains(&bi) || self.ancestors[bi].contains(&ai))
    }

    /// The descendant of a compatible pair; `a` when they are equal.
    pub fn most_specific<'a>(&self, a: &'a str, b: &'a str) -> Result<&'a str> {
        if !self.compatible(a, b)? {
            return Err(Error::Incompatible(a.to_string(), b.to_string()));
        }
        if self.is_subtype_of(a, b)? {
            Ok(a)
        } else {
            Ok(b)
        }
    }

    /// Concept named `surface` on `axis`, if any.
    pub fn lookup(&self, surface: &str, axis: SemanticAxis) -> Option<&Concept> {
        self.names
            .get(&normalize_name(surface))?
            .iter()
            .map(|&i| &self.concepts[i])
            .find(|c| c.axis == axis)
    }

    /// Every concept named `surface`, across axes.
    pub fn lookup_all(&self, surface: &str) -> Vec<&Concept> {
        self.names
            .get(&normalize_name(surface))
            .map(|v| v.iter().map(|&i| &self.concepts[i]).collect())
            .unwrap_or_default()
    }

    /// All normalized names with the concepts they denote.
    pub fn name_index(&self) -> impl Iterator<Item = (&str, Vec<&Concept>)> {
        self.names
            .iter()
            .map(|(k, v)| (k.as_str(), v.iter().map(|&i| &self.concepts[i]).collect()))
    }

    /// Word count of the longest name.
    pub fn max_name_words(&self) -> usize {
        self.max_name_words
    }

    /// Serializes in the line format read by [`parse_ontology`].
    pub fn to_text(&self) -> String {
        let mut out = String::from("# concept_id|axis|preferred_name|parent_ids|synonyms\n");
        for c in &self.concepts {
            let parents: Vec<&str> = c.parents.iter().map(String::as_str).collect();
            let synonyms: Vec<&str> = c.synonyms.iter().map(String::as_str).collect();
            out.push_str(&format!(
                "{}|{}|{}|{}|{}\n",
                c.concept_id,
                c.axis,
                c.preferred_name,
                parents.join(","),
                synonyms.join(",")
            ));
        }
        out
    }
}

fn topological_order(concepts: &[Concept], parents: &[Vec<usize>]) -> Result<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let n = concepts.len();
    let mut mark = vec![Mark::New; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if mark[start] != Mark::New {
            continue;
        }
        // (node, next parent slot)
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        mark[start] = Mark::Open;
        while let Some(top) = stack.last_mut() {
            let node = top.0;
            if top.1 < parents[node].len() {
                let p = parents[node][top.1];
                top.1 += 1;
                match mark[p] {
                    Mark::New => {
                        mark[p] = Mark::Open;
                        stack.push((p, 0));
                    }
                    Mark::Open => {
                        let from = stack.iter().position(|&(x, _)| x == p).unwrap_or(0);
                        let cycle = stack[from..]
                            .iter()
                            .map(|&(x, _)| concepts[x].concept_id.clone())
                            .collect();
                        return Err(Error::OntologyCycle(cycle));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                order.push(node);
                stack.pop();
            }
        }
    }
    Ok(order)
}
