//! JSON bundle document: parsing with cross-reference resolution, and the
//! inverse serializer.
//!
//! The normative shape lives in `schema/bundle.schema.json`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::literal::{Literal, LiteralSyntaxError, Value};
use crate::model::{
    Concept, Context, ExplanandumBundle, GroundFragment, Mode, Ontology, Overview, Premise,
    Process, Rule, RuleKind, Source, Superiority, Theory, TheoryError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid bundle structure at line {line}, column {column}: {message}")]
    Structure {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("in {element}: {source}")]
    Literal {
        element: String,
        #[source]
        source: LiteralSyntaxError,
    },
    #[error("{from} references undeclared `{missing}`")]
    DanglingReference { from: String, missing: String },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("taxonomy cycle: {}", cycle.join(" -> "))]
    TaxonomyCycle { cycle: Vec<String> },
    #[error("superiority ({winner}, {loser}): {reason}")]
    Superiority {
        winner: String,
        loser: String,
        reason: TheoryError,
    },
    #[error("rule `{id}`: {reason}")]
    InvalidRule { id: String, reason: String },
    #[error("{element}: {reason}")]
    InvalidValue { element: String, reason: String },
}

impl BundleError {
    /// `(line, column)` for errors tied to a document position.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            BundleError::Syntax { line, column, .. } | BundleError::Structure { line, column, .. } => {
                Some((*line, *column))
            }
            _ => None,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            BundleError::Syntax { .. } => "syntax_error",
            BundleError::Structure { .. } => "structure_error",
            BundleError::Literal { .. } => "literal_syntax_error",
            BundleError::DanglingReference { .. } => "dangling_reference",
            BundleError::DuplicateId { .. } => "duplicate_id",
            BundleError::TaxonomyCycle { .. } => "taxonomy_cycle",
            BundleError::Superiority { .. } => "invalid_superiority",
            BundleError::InvalidRule { .. } => "invalid_rule",
            BundleError::InvalidValue { .. } => "invalid_value",
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBundle {
    #[serde(default)]
    rules: Vec<RawRule>,
    #[serde(default)]
    superiority: Vec<Superiority>,
    #[serde(default)]
    facts: Vec<RawFact>,
    #[serde(default)]
    ontology: RawOntology,
    #[serde(default)]
    sources: Vec<Source>,
    #[serde(default)]
    ground: BTreeMap<String, GroundFragment>,
    #[serde(default)]
    overview: RawOverview,
    #[serde(default)]
    context: RawContext,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    id: String,
    kind: RuleKind,
    #[serde(default, rename = "if")]
    antecedents: Vec<String>,
    #[serde(rename = "then")]
    consequent: String,
    #[serde(default)]
    sources: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    jurisdiction: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    annotations: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFact {
    id: String,
    literal: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<serde_json::Value>,
    #[serde(default)]
    sources: Vec<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOntology {
    #[serde(default)]
    concepts: Vec<Concept>,
    #[serde(default)]
    entities: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    labels: BTreeMap<String, String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContext {
    #[serde(default)]
    entities: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    labels: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOverview {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default = "default_mode")]
    mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    purpose: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    decision: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    language: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    representation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pipeline: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    training_data: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    jurisdiction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    consequences: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    runtime_context: BTreeMap<String, String>,
}

fn default_mode() -> Mode {
    Mode::ExAnte
}

impl Default for RawOverview {
    fn default() -> Self {
        RawOverview {
            id: None,
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

fn literal(element: impl FnOnce() -> String, text: &str) -> Result<Literal, BundleError> {
    text.parse().map_err(|source| BundleError::Literal {
        element: element(),
        source,
    })
}

fn check_unique<'a>(
    kind: &'static str,
    ids: impl IntoIterator<Item = &'a str>,
) -> Result<(), BundleError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(BundleError::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}

/// Parses and resolves a bundle document.
pub fn parse_bundle(document: &str) -> Result<ExplanandumBundle, BundleError> {
    let raw: RawBundle = serde_json::from_str(document).map_err(|e| {
        let (line, column, message) = (e.line(), e.column(), e.to_string());
        match e.classify() {
            serde_json::error::Category::Data => BundleError::Structure {
                line,
                column,
                message,
            },
            _ => BundleError::Syntax {
                line,
                column,
                message,
            },
        }
    })?;
    let id = raw.overview.id.clone().unwrap_or_else(|| {
        let digest = Sha256::digest(document.as_bytes());
        format!("bundle-{}", &hex::encode(digest)[..12])
    });
    resolve(raw, id)
}

fn resolve(raw: RawBundle, id: String) -> Result<ExplanandumBundle, BundleError> {
    // sources
    check_unique("source", raw.sources.iter().map(|s| s.id.as_str()))?;
    for s in &raw.sources {
        if s.title.trim().is_empty() {
            return Err(BundleError::InvalidValue {
                element: format!("source `{}`", s.id),
                reason: "title must be nonempty".into(),
            });
        }
    }
    let source_ids: HashSet<&str> = raw.sources.iter().map(|s| s.id.as_str()).collect();
    let check_sources = |from: String, refs: &[String]| -> Result<(), BundleError> {
        for r in refs {
            if !source_ids.contains(r.as_str()) {
                return Err(BundleError::DanglingReference {
                    from,
                    missing: r.clone(),
                });
            }
        }
        Ok(())
    };

    // taxonomy
    check_unique("concept", raw.ontology.concepts.iter().map(|c| c.id.as_str()))?;
    let concept_ids: HashSet<&str> = raw.ontology.concepts.iter().map(|c| c.id.as_str()).collect();
    for c in &raw.ontology.concepts {
        if let Some(p) = &c.parent {
            if !concept_ids.contains(p.as_str()) {
                return Err(BundleError::DanglingReference {
                    from: format!("concept `{}`", c.id),
                    missing: p.clone(),
                });
            }
        }
    }
    check_taxonomy(&raw.ontology.concepts)?;
    for (scope, map) in [("ontology", &raw.ontology.entities), ("context", &raw.context.entities)] {
        for (entity, concepts) in map {
            for c in concepts {
                if !concept_ids.contains(c.as_str()) {
                    return Err(BundleError::DanglingReference {
                        from: format!("{scope} entity `{entity}`"),
                        missing: c.clone(),
                    });
                }
            }
        }
    }

    // rules
    check_unique("rule", raw.rules.iter().map(|r| r.id.as_str()))?;
    let mut rules = Vec::with_capacity(raw.rules.len());
    for r in raw.rules {
        if r.id.trim().is_empty() {
            return Err(BundleError::InvalidRule {
                id: r.id,
                reason: "empty id".into(),
            });
        }
        let antecedents = r
            .antecedents
            .iter()
            .map(|a| literal(|| format!("rule `{}` antecedent", r.id), a))
            .collect::<Result<Vec<_>, _>>()?;
        let consequent = literal(|| format!("rule `{}` consequent", r.id), &r.consequent)?;
        if antecedents.contains(&consequent) {
            return Err(BundleError::InvalidRule {
                id: r.id,
                reason: "consequent appears among its antecedents".into(),
            });
        }
        let distinct: BTreeSet<&Literal> = antecedents.iter().collect();
        if distinct.len() != antecedents.len() {
            return Err(BundleError::InvalidRule {
                id: r.id,
                reason: "repeated antecedent".into(),
            });
        }
        check_sources(format!("rule `{}`", r.id), &r.sources)?;
        rules.push(Rule {
            id: r.id,
            kind: r.kind,
            antecedents,
            consequent,
            source_refs: r.sources,
            jurisdiction: r.jurisdiction,
            annotations: r.annotations,
        });
    }
    let mut theory = Theory::new(rules);
    for pair in &raw.superiority {
        theory.check_pair(pair).map_err(|reason| {
            if reason == TheoryError::UnknownRule {
                let missing = if theory.rule(&pair.winner).is_none() {
                    pair.winner.clone()
                } else {
                    pair.loser.clone()
                };
                BundleError::DanglingReference {
                    from: format!("superiority ({}, {})", pair.winner, pair.loser),
                    missing,
                }
            } else {
                BundleError::Superiority {
                    winner: pair.winner.clone(),
                    loser: pair.loser.clone(),
                    reason,
                }
            }
        })?;
    }
    let distinct_pairs: BTreeSet<(&str, &str)> = raw
        .superiority
        .iter()
        .map(|p| (p.winner.as_str(), p.loser.as_str()))
        .collect();
    if distinct_pairs.len() != raw.superiority.len() {
        return Err(BundleError::DuplicateId {
            kind: "superiority pair",
            id: "repeated (winner, loser)".into(),
        });
    }
    theory.superiority = raw.superiority;

    // premises
    check_unique("fact", raw.facts.iter().map(|f| f.id.as_str()))?;
    let mut premises: Vec<Premise> = Vec::with_capacity(raw.facts.len());
    for f in raw.facts {
        let element = format!("fact `{}`", f.id);
        let attribute = literal(|| element.clone(), &f.literal)?;
        if attribute.comparison.is_some() {
            return Err(BundleError::InvalidValue {
                element,
                reason: "fact literals name an attribute; put the value in `value`".into(),
            });
        }
        let value = match &f.value {
            None => Value::Bool(true),
            Some(v) => Value::from_json(v).ok_or_else(|| BundleError::InvalidValue {
                element: element.clone(),
                reason: format!("unsupported value {v}"),
            })?,
        };
        if !matches!(value, Value::Bool(_)) && attribute.is_negative() {
            return Err(BundleError::InvalidValue {
                element,
                reason: "valued attributes cannot be negated".into(),
            });
        }
        if premises.iter().any(|p| p.attribute.positive() == attribute.positive()) {
            return Err(BundleError::DuplicateId {
                kind: "premise attribute",
                id: attribute.positive().to_string(),
            });
        }
        check_sources(element, &f.sources)?;
        // A negated boolean fact is normalised to a positive attribute with `false`.
        let (attribute, value) = match value {
            Value::Bool(b) if attribute.is_negative() => (attribute.complement(), Value::Bool(!b)),
            v => (attribute, v),
        };
        premises.push(Premise {
            id: f.id,
            attribute,
            value,
            source_refs: f.sources,
        });
    }

    // ground fragments must point at a rule, a premise, or a theory literal
    let theory_literals: BTreeSet<String> = theory.literals().iter().map(|l| l.to_string()).collect();
    for key in raw.ground.keys() {
        let known = theory.rule(key).is_some()
            || premises.iter().any(|p| &p.id == key)
            || theory_literals.contains(key);
        if !known {
            return Err(BundleError::DanglingReference {
                from: "ground".into(),
                missing: key.clone(),
            });
        }
    }

    // overview
    let o = raw.overview;
    let decision = match &o.decision {
        Some(text) => {
            let lit = literal(|| "overview decision".into(), text)?;
            let heads: BTreeSet<Literal> =
                theory.rules.iter().map(|r| r.consequent.positive()).collect();
            if !heads.contains(&lit.positive()) {
                return Err(BundleError::DanglingReference {
                    from: "overview decision".into(),
                    missing: lit.to_string(),
                });
            }
            Some(lit)
        }
        None => None,
    };

    Ok(ExplanandumBundle {
        id,
        process: Process {
            inputs: premises,
            function: theory,
        },
        ontology: Ontology {
            concepts: raw.ontology.concepts,
            entities: raw.ontology.entities,
            labels: raw.ontology.labels,
        },
        sources: raw.sources,
        ground: raw.ground,
        overview: Overview {
            mode: o.mode,
            purpose: o.purpose,
            decision,
            language: o.language,
            representation: o.representation,
            pipeline: o.pipeline,
            training_data: o.training_data,
            jurisdiction: o.jurisdiction,
            consequences: o.consequences,
            runtime_context: o.runtime_context,
        },
        context: Context {
            entities: raw.context.entities,
            labels: raw.context.labels,
        },
    })
}

fn check_taxonomy(concepts: &[Concept]) -> Result<(), BundleError> {
    let parent: BTreeMap<&str, &str> = concepts
        .iter()
        .filter_map(|c| c.parent.as_deref().map(|p| (c.id.as_str(), p)))
        .collect();
    let mut cleared: HashSet<&str> = HashSet::new();
    for c in concepts {
        let mut path: Vec<&str> = Vec::new();
        let mut current = c.id.as_str();
        loop {
            if cleared.contains(current) {
                break;
            }
            if let Some(pos) = path.iter().position(|p| *p == current) {
                let mut cycle: Vec<String> = path[pos..].iter().map(|s| s.to_string()).collect();
                cycle.push(current.to_string());
                return Err(BundleError::TaxonomyCycle { cycle });
            }
            path.push(current);
            match parent.get(current) {
                Some(p) => current = p,
                None => break,
            }
        }
        cleared.extend(path);
    }
    Ok(())
}

/// Serializes a bundle back to the document format.
pub fn to_document(bundle: &ExplanandumBundle) -> String {
    let theory = bundle.theory();
    let raw = RawBundle {
        rules: theory
            .rules
            .iter()
            .map(|r| RawRule {
                id: r.id.clone(),
                kind: r.kind,
                antecedents: r.antecedents.iter().map(|a| a.to_string()).collect(),
                consequent: r.consequent.to_string(),
                sources: r.source_refs.clone(),
                jurisdiction: r.jurisdiction.clone(),
                annotations: r.annotations.clone(),
            })
            .collect(),
        superiority: theory.superiority.clone(),
        facts: bundle
            .premises()
            .iter()
            .map(|p| RawFact {
                id: p.id.clone(),
                literal: p.attribute.to_string(),
                value: match &p.value {
                    Value::Bool(true) => None,
                    v => Some(v.to_json()),
                },
                sources: p.source_refs.clone(),
            })
            .collect(),
        ontology: RawOntology {
            concepts: bundle.ontology.concepts.clone(),
            entities: bundle.ontology.entities.clone(),
            labels: bundle.ontology.labels.clone(),
        },
        sources: bundle.sources.clone(),
        ground: bundle.ground.clone(),
        overview: RawOverview {
            id: Some(bundle.id.clone()),
            mode: bundle.overview.mode,
            purpose: bundle.overview.purpose.clone(),
            decision: bundle.overview.decision.as_ref().map(|d| d.to_string()),
            language: bundle.overview.language.clone(),
            representation: bundle.overview.representation.clone(),
            pipeline: bundle.overview.pipeline.clone(),
            training_data: bundle.overview.training_data.clone(),
            jurisdiction: bundle.overview.jurisdiction.clone(),
            consequences: bundle.overview.consequences.clone(),
            runtime_context: bundle.overview.runtime_context.clone(),
        },
        context: RawContext {
            entities: bundle.context.entities.clone(),
            labels: bundle.context.labels.clone(),
        },
    };
    serde_json::to_string_pretty(&raw).expect("bundle serialization is infallible")
}
