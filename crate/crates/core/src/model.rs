//! The explanandum: rule theory, premises, ontology, sources, ground
//! fragments and overview metadata, bundled as one immutable value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::literal::{Literal, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Strict,
    Defeasible,
    Defeater,
}

impl RuleKind {
    /// Strict and defeasible rules can establish their consequent; defeaters only block.
    pub fn supports(self) -> bool {
        !matches!(self, RuleKind::Defeater)
    }

    pub fn arrow(self) -> &'static str {
        match self {
            RuleKind::Strict => "->",
            RuleKind::Defeasible => "=>",
            RuleKind::Defeater => "~>",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub kind: RuleKind,
    pub antecedents: Vec<Literal>,
    pub consequent: Literal,
    pub source_refs: Vec<String>,
    pub jurisdiction: Option<String>,
    pub annotations: BTreeMap<String, String>,
}

impl Rule {
    pub fn new(id: impl Into<String>, kind: RuleKind, antecedents: Vec<Literal>, consequent: Literal) -> Self {
        Rule {
            id: id.into(),
            kind,
            antecedents,
            consequent,
            source_refs: Vec::new(),
            jurisdiction: None,
            annotations: BTreeMap::new(),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        for (i, a) in self.antecedents.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        if !self.antecedents.is_empty() {
            f.write_str(" ")?;
        }
        write!(f, "{} {}", self.kind.arrow(), self.consequent)
    }
}

/// A superiority pair: `winner` prevails over `loser` when both apply.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Superiority {
    pub winner: String,
    pub loser: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("superiority pair is reflexive")]
    Reflexive,
    #[error("superiority pair references an unknown rule")]
    UnknownRule,
    #[error("superiority pair relates rules whose consequents are not complementary")]
    NotConflicting,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Theory {
    pub rules: Vec<Rule>,
    pub superiority: Vec<Superiority>,
}

impl Theory {
    pub fn new(rules: Vec<Rule>) -> Self {
        Theory {
            rules,
            superiority: Vec::new(),
        }
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn is_superior(&self, winner: &str, loser: &str) -> bool {
        self.superiority
            .iter()
            .any(|s| s.winner == winner && s.loser == loser)
    }

    pub fn superiority_pair(&self, winner: &str, loser: &str) -> Option<&Superiority> {
        self.superiority
            .iter()
            .find(|s| s.winner == winner && s.loser == loser)
    }

    /// Checks one superiority pair against the rules of this theory.
    pub fn check_pair(&self, pair: &Superiority) -> Result<(), TheoryError> {
        if pair.winner == pair.loser {
            return Err(TheoryError::Reflexive);
        }
        let (Some(w), Some(l)) = (self.rule(&pair.winner), self.rule(&pair.loser)) else {
            return Err(TheoryError::UnknownRule);
        };
        if w.consequent.complement() != l.consequent {
            return Err(TheoryError::NotConflicting);
        }
        Ok(())
    }

    /// Every literal mentioned by a rule.
    pub fn literals(&self) -> BTreeSet<Literal> {
        self.rules
            .iter()
            .flat_map(|r| r.antecedents.iter().chain(std::iter::once(&r.consequent)))
            .cloned()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Concept {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// A labelled concept taxonomy (a forest) plus entity typing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ontology {
    pub concepts: Vec<Concept>,
    /// Entity (or any element key: rule id, source id, atom) to concepts.
    pub entities: BTreeMap<String, Vec<String>>,
    pub labels: BTreeMap<String, String>,
}

impl Ontology {
    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.concepts.iter().find(|c| c.id == id)
    }

    pub fn children(&self, id: &str) -> impl Iterator<Item = &Concept> {
        let id = id.to_string();
        self.concepts
            .iter()
            .filter(move |c| c.parent.as_deref() == Some(id.as_str()))
    }

    pub fn roots(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.iter().filter(|c| c.parent.is_none())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub citation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uri: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excerpt: Option<String>,
}

/// A declared input of the process. Boolean premises assert their literal
/// (or its complement when false); valued premises assert `attribute=value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Premise {
    pub id: String,
    pub attribute: Literal,
    pub value: Value,
    pub source_refs: Vec<String>,
}

impl Premise {
    pub fn asserted(&self) -> Literal {
        match &self.value {
            Value::Bool(true) => self.attribute.clone(),
            Value::Bool(false) => self.attribute.complement(),
            other => self
                .attribute
                .clone()
                .with_comparison(crate::literal::CompareOp::Eq, other.clone()),
        }
    }

    pub fn is_boolean(&self) -> bool {
        matches!(self.value, Value::Bool(_))
    }

    /// Text form used by what-if mutations: `age(marco)=14`.
    pub fn assignment(&self) -> String {
        format!("{}={}", self.attribute, self.value)
    }
}

/// A verbatim fragment in the explanandum's original representation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundFragment {
    pub format: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "ex-ante")]
    ExAnte,
    #[serde(rename = "ex-post")]
    ExPost,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ExAnte => "ex-ante",
            Mode::ExPost => "ex-post",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ex-ante" => Ok(Mode::ExAnte),
            "ex-post" => Ok(Mode::ExPost),
            other => Err(format!("unknown mode `{other}` (expected ex-ante or ex-post)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Overview {
    pub mode: Mode,
    pub purpose: Option<String>,
    /// The literal standing for the process' decision.
    pub decision: Option<Literal>,
    pub language: Option<String>,
    pub representation: Option<String>,
    pub pipeline: Option<String>,
    pub training_data: Option<String>,
    pub jurisdiction: Option<String>,
    pub consequences: Option<String>,
    pub runtime_context: BTreeMap<String, String>,
}

impl Default for Overview {
    fn default() -> Self {
        Overview {
            mode: Mode::ExAnte,
            purpose: None,
            decision: None,
            language: None,
            representation: None,
            pipeline: None,
            training_data: None,
            jurisdiction: None,
            consequences: None,
            runtime_context: BTreeMap::new(),
        }
    }
}

/// Background knowledge shared with the explainee: entities that are not
/// part of the process inputs but help interpret them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Context {
    pub entities: BTreeMap<String, Vec<String>>,
    pub labels: BTreeMap<String, String>,
}

/// The process: its inputs (premises) and its function (the rule theory).
/// Outputs are produced by [`crate::reasoner::derive`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Process {
    pub inputs: Vec<Premise>,
    pub function: Theory,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplanandumBundle {
    pub id: String,
    pub process: Process,
    pub ontology: Ontology,
    pub sources: Vec<Source>,
    pub ground: BTreeMap<String, GroundFragment>,
    pub overview: Overview,
    pub context: Context,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
}

impl ExplanandumBundle {
    pub fn theory(&self) -> &Theory {
        &self.process.function
    }

    pub fn premises(&self) -> &[Premise] {
        &self.process.inputs
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.process.function.rule(id)
    }

    pub fn premise(&self, id: &str) -> Option<&Premise> {
        self.process.inputs.iter().find(|p| p.id == id)
    }

    pub fn premise_for(&self, attribute: &Literal) -> Option<&Premise> {
        self.process.inputs.iter().find(|p| &p.attribute == attribute)
    }

    pub fn source(&self, id: &str) -> Option<&Source> {
        self.sources.iter().find(|s| s.id == id)
    }

    /// Number of parent edges from `concept` to the root of its tree.
    pub fn abstraction_depth(&self, concept: &str) -> Result<usize, OntologyError> {
        let mut current = self
            .ontology
            .concept(concept)
            .ok_or_else(|| OntologyError::UnknownConcept(concept.to_string()))?;
        let mut depth = 0;
        while let Some(parent) = &current.parent {
            depth += 1;
            current = self
                .ontology
                .concept(parent)
                .ok_or_else(|| OntologyError::UnknownConcept(parent.clone()))?;
            // parse rejects cycles, so the walk is bounded by the concept count
            if depth > self.ontology.concepts.len() {
                break;
            }
        }
        Ok(depth)
    }

    /// Concepts typing `key`, from the main ontology then the context.
    pub fn concepts_of(&self, key: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for map in [&self.ontology.entities, &self.context.entities] {
            if let Some(cs) = map.get(key) {
                for c in cs {
                    if !out.contains(&c.as_str()) {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    pub fn is_context_entity(&self, key: &str) -> bool {
        self.context.entities.contains_key(key) && !self.ontology.entities.contains_key(key)
    }

    /// True when `concept` is `ancestor` or one of its descendants.
    pub fn is_subconcept(&self, concept: &str, ancestor: &str) -> bool {
        let mut current = Some(concept);
        let mut steps = 0;
        while let Some(c) = current {
            if c == ancestor {
                return true;
            }
            current = self.ontology.concept(c).and_then(|c| c.parent.as_deref());
            steps += 1;
            if steps > self.ontology.concepts.len() {
                break;
            }
        }
        false
    }

    /// Human-readable label for any element key; falls back to the key.
    pub fn label<'a>(&'a self, key: &'a str) -> &'a str {
        self.ontology
            .labels
            .get(key)
            .or_else(|| self.context.labels.get(key))
            .map(String::as_str)
            .or_else(|| {
                self.ontology
                    .concept(key)
                    .and_then(|c| c.label.as_deref())
            })
            .or_else(|| self.source(key).map(|s| s.title.as_str()))
            .unwrap_or(key)
    }

    /// The literal set handed to the reasoner: asserted premises plus every
    /// rule comparison that holds on the premise values.
    pub fn grounded_facts(&self) -> BTreeSet<Literal> {
        ground_facts(&self.process.function, &self.process.inputs)
    }
}

/// Asserts premises and pre-evaluates comparison antecedents against them.
pub fn ground_facts(theory: &Theory, premises: &[Premise]) -> BTreeSet<Literal> {
    let mut facts: BTreeSet<Literal> = premises.iter().map(Premise::asserted).collect();
    for rule in &theory.rules {
        for lit in &rule.antecedents {
            let Some(cmp) = &lit.comparison else { continue };
            if lit.modality != crate::literal::Modality::None {
                continue;
            }
            let attribute = lit.attribute();
            let Some(premise) = premises.iter().find(|p| p.attribute == attribute) else {
                continue;
            };
            let holds = cmp.op.holds(&premise.value, &cmp.value);
            if holds != lit.is_negative() {
                facts.insert(lit.clone());
            }
        }
    }
    facts
}
