//! What-if analysis: mutate premise values, re-derive, diff the outcomes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::literal::{CompareOp, Literal, Modality, Value};
use crate::model::{ground_facts, ExplanandumBundle, Premise};
use crate::reasoner::{derive, Conclusion, Derivation, ProofTag, ReasonerError};

/// `attribute=value`, e.g. `age(marco)=13`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutation {
    pub premise: Literal,
    #[serde(with = "value_json")]
    pub value: Value,
}

mod value_json {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::literal::Value;

    pub fn serialize<S: Serializer>(value: &Value, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&value.to_json(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Value, D::Error> {
        let raw = serde_json::Value::deserialize(d)?;
        Value::from_json(&raw).ok_or_else(|| serde::de::Error::custom(format!("unsupported value {raw}")))
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.premise, self.value)
    }
}

impl FromStr for Mutation {
    type Err = CounterfactualError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = |why: &str| CounterfactualError::Malformed(format!("`{}`: {why}", s.trim()));
        let lit: Literal = s.trim().parse().map_err(|e| malformed(&format!("{e}")))?;
        let cmp = lit
            .comparison
            .clone()
            .ok_or_else(|| malformed("expected attribute=value"))?;
        if cmp.op != CompareOp::Eq {
            return Err(malformed("only `=` assignments are allowed"));
        }
        if lit.is_negative() || lit.modality != Modality::None {
            return Err(malformed("the attribute must be a plain premise"));
        }
        Ok(Mutation {
            premise: lit.attribute(),
            value: cmp.value,
        })
    }
}

/// Parses a comma-separated mutation list. Commas inside argument lists
/// are not separators.
pub fn parse_mutations(text: &str) -> Result<Vec<Mutation>, CounterfactualError> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(text[start..i].parse()?);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !text[start..].trim().is_empty() {
        out.push(text[start..].parse()?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedMutation {
    pub premise_id: String,
    pub attribute: Literal,
    #[serde(with = "value_json")]
    pub old: Value,
    #[serde(with = "value_json")]
    pub new: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flip {
    pub literal: Literal,
    pub before: ProofTag,
    pub after: ProofTag,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diff {
    pub flipped: Vec<Flip>,
    pub newly_fired: Vec<String>,
    pub no_longer_fired: Vec<String>,
}

impl Diff {
    /// Literal-by-literal comparison of two derivations. A literal missing
    /// from one side counts as −∂ there.
    pub fn between(before: &Derivation, after: &Derivation) -> Diff {
        let literals: BTreeSet<&Literal> = before
            .conclusions
            .keys()
            .chain(after.conclusions.keys())
            .collect();
        let flipped = literals
            .into_iter()
            .filter_map(|l| {
                let b = before.conclusion(l).defeasible_tag();
                let a = after.conclusion(l).defeasible_tag();
                (a != b).then(|| Flip {
                    literal: l.clone(),
                    before: b,
                    after: a,
                })
            })
            .collect();
        let fired_before = before.fired_rules();
        let fired_after = after.fired_rules();
        Diff {
            flipped,
            newly_fired: fired_after
                .difference(&fired_before)
                .map(|s| s.to_string())
                .collect(),
            no_longer_fired: fired_before
                .difference(&fired_after)
                .map(|s| s.to_string())
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.flipped.is_empty() && self.newly_fired.is_empty() && self.no_longer_fired.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterfactualResult {
    pub mutations: Vec<AppliedMutation>,
    pub new_derivation: Derivation,
    pub diff: Diff,
    pub decision_changed: bool,
    /// Tags of the decision literal before and after, when one is declared.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<DecisionOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub literal: Literal,
    pub before: Conclusion,
    pub after: Conclusion,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CounterfactualError {
    #[error("malformed mutation {0}")]
    Malformed(String),
    #[error("`{0}` is not a declared premise (only premises can be changed)")]
    NotAPremise(String),
    #[error("type mismatch for `{attribute}`: {reason}")]
    TypeMismatch { attribute: String, reason: String },
    #[error("`{0}` is mutated more than once")]
    Repeated(String),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
}

impl CounterfactualError {
    pub fn code(&self) -> &'static str {
        match self {
            CounterfactualError::Malformed(_) => "malformed_mutation",
            CounterfactualError::NotAPremise(_) => "not_a_premise",
            CounterfactualError::TypeMismatch { .. } => "type_mismatch",
            CounterfactualError::Repeated(_) => "repeated_mutation",
            CounterfactualError::Reasoner(_) => "reasoning_error",
        }
    }
}

fn type_check(bundle: &ExplanandumBundle, premise: &Premise, new: &Value) -> Result<(), CounterfactualError> {
    let mismatch = |reason: String| CounterfactualError::TypeMismatch {
        attribute: premise.attribute.to_string(),
        reason,
    };
    if premise.value.kind() != new.kind() {
        return Err(mismatch(format!(
            "expected a {} value, got {} `{new}`",
            premise.value.kind(),
            new.kind()
        )));
    }
    if let (Value::Entity(old), Value::Entity(new)) = (&premise.value, new) {
        let new_types = bundle.concepts_of(new);
        if new_types.is_empty() {
            return Err(mismatch(format!("entity `{new}` is not declared in the ontology")));
        }
        let old_types = bundle.concepts_of(old);
        let compatible = old_types.is_empty()
            || new_types
                .iter()
                .any(|n| old_types.iter().any(|o| bundle.is_subconcept(n, o)));
        if !compatible {
            return Err(mismatch(format!(
                "`{new}` ({}) is not a {}",
                new_types.join(", "),
                old_types.join(" or ")
            )));
        }
    }
    Ok(())
}

/// Checks mutations against the bundle's premises and returns the mutated
/// premise list alongside what changed.
pub fn apply_mutations(
    bundle: &ExplanandumBundle,
    mutations: &[Mutation],
) -> Result<(Vec<Premise>, Vec<AppliedMutation>), CounterfactualError> {
    let mut premises = bundle.premises().to_vec();
    let mut applied = Vec::with_capacity(mutations.len());
    let mut touched = BTreeSet::new();
    for m in mutations {
        let slot = premises
            .iter_mut()
            .find(|p| p.attribute == m.premise)
            .ok_or_else(|| CounterfactualError::NotAPremise(m.premise.to_string()))?;
        if !touched.insert(slot.id.clone()) {
            return Err(CounterfactualError::Repeated(m.premise.to_string()));
        }
        type_check(bundle, slot, &m.value)?;
        applied.push(AppliedMutation {
            premise_id: slot.id.clone(),
            attribute: slot.attribute.clone(),
            old: slot.value.clone(),
            new: m.value.clone(),
        });
        slot.value = m.value.clone();
    }
    Ok((premises, applied))
}

/// Re-derives under mutated premises and reports what changed.
pub fn whatif(
    bundle: &ExplanandumBundle,
    derivation: &Derivation,
    mutations: &[Mutation],
) -> Result<CounterfactualResult, CounterfactualError> {
    let (premises, applied) = apply_mutations(bundle, mutations)?;
    let facts = ground_facts(bundle.theory(), &premises);
    let new_derivation = derive(bundle.theory(), &facts)?;
    let diff = Diff::between(derivation, &new_derivation);
    let decision = bundle.overview.decision.as_ref().map(|d| DecisionOutcome {
        literal: d.clone(),
        before: derivation.conclusion(d),
        after: new_derivation.conclusion(d),
    });
    let decision_changed = decision.as_ref().is_some_and(|d| d.before != d.after);
    Ok(CounterfactualResult {
        mutations: applied,
        new_derivation,
        diff,
        decision_changed,
        decision,
    })
}
