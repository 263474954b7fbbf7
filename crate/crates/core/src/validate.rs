//! Explainability checklist over a parsed bundle.
//!
//! Violations are data: a bundle can parse and still fail the checklist.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::model::{ExplanandumBundle, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    UnsourcedRule,
    UntypedEntity,
    MissingGround,
    MissingPurpose,
    MissingExAnteField,
    MissingExPostContext,
    MissingExPostInputs,
    MissingDecision,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::UnsourcedRule => "unsourced-rule",
            ViolationKind::UntypedEntity => "untyped-entity",
            ViolationKind::MissingGround => "missing-ground",
            ViolationKind::MissingPurpose => "missing-purpose",
            ViolationKind::MissingExAnteField => "missing-ex-ante-field",
            ViolationKind::MissingExPostContext => "missing-ex-post-context",
            ViolationKind::MissingExPostInputs => "missing-ex-post-inputs",
            ViolationKind::MissingDecision => "missing-decision",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// The offending element (rule id, entity, field name).
    pub subject: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.subject)
    }
}

/// Runs the checklist. The report is sorted, so it does not depend on the
/// order elements were declared in.
pub fn validate_explainability(bundle: &ExplanandumBundle) -> Vec<Violation> {
    let mut out: BTreeSet<Violation> = BTreeSet::new();
    let mut push = |kind, subject: &str| {
        out.insert(Violation {
            kind,
            subject: subject.to_string(),
        });
    };

    let theory = bundle.theory();
    for rule in &theory.rules {
        if rule.source_refs.is_empty() {
            push(ViolationKind::UnsourcedRule, &rule.id);
        }
        if !bundle.ground.contains_key(&rule.id) {
            push(ViolationKind::MissingGround, &rule.id);
        }
    }
    for premise in bundle.premises() {
        if !bundle.ground.contains_key(&premise.id) {
            push(ViolationKind::MissingGround, &premise.id);
        }
    }

    let premise_entities = bundle
        .premises()
        .iter()
        .flat_map(|p| p.asserted().entities().map(str::to_string).collect::<Vec<_>>());
    let rule_entities = theory.rules.iter().flat_map(|r| {
        r.antecedents
            .iter()
            .chain(std::iter::once(&r.consequent))
            .flat_map(|l| l.entities().map(str::to_string).collect::<Vec<_>>())
            .collect::<Vec<_>>()
    });
    for entity in premise_entities.chain(rule_entities) {
        if bundle.concepts_of(&entity).is_empty() {
            push(ViolationKind::UntypedEntity, &entity);
        }
    }

    let o = &bundle.overview;
    let blank = |v: &Option<String>| v.as_deref().is_none_or(|s| s.trim().is_empty());
    if blank(&o.purpose) {
        push(ViolationKind::MissingPurpose, "purpose");
    }
    match o.mode {
        Mode::ExAnte => {
            for (field, value) in [
                ("pipeline", &o.pipeline),
                ("training_data", &o.training_data),
                ("jurisdiction", &o.jurisdiction),
                ("consequences", &o.consequences),
            ] {
                if blank(value) {
                    push(ViolationKind::MissingExAnteField, field);
                }
            }
        }
        Mode::ExPost => {
            if o.runtime_context.is_empty() {
                push(ViolationKind::MissingExPostContext, "runtime_context");
            }
            if bundle.premises().is_empty() {
                push(ViolationKind::MissingExPostInputs, "facts");
            }
            if o.decision.is_none() {
                push(ViolationKind::MissingDecision, "decision");
            }
        }
    }
    out.into_iter().collect()
}
