use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::literal::Literal;

/// The six stages of the explanatory space, in presentation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    Incipit,
    CoreInformation,
    MarginalInformation,
    Ground,
    Sources,
    Counterfactuals,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Incipit,
        Stage::CoreInformation,
        Stage::MarginalInformation,
        Stage::Ground,
        Stage::Sources,
        Stage::Counterfactuals,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Incipit => "Incipit",
            Stage::CoreInformation => "CoreInformation",
            Stage::MarginalInformation => "MarginalInformation",
            Stage::Ground => "Ground",
            Stage::Sources => "Sources",
            Stage::Counterfactuals => "Counterfactuals",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What an information node is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubjectKind {
    Purpose,
    Overview,
    Justification,
    Hint,
    Conclusion,
    FiredRule,
    Premise,
    DirectEntity,
    Concept,
    UnfiredRule,
    Rebuttal,
    ContextEntity,
    GroundFragment,
    SourceDocument,
    WhatIfResult,
}

/// Stage of a subject kind. Total over [`SubjectKind`].
pub fn stage_of(kind: SubjectKind) -> Stage {
    match kind {
        SubjectKind::Purpose | SubjectKind::Overview | SubjectKind::Justification | SubjectKind::Hint => {
            Stage::Incipit
        }
        SubjectKind::Conclusion
        | SubjectKind::FiredRule
        | SubjectKind::Premise
        | SubjectKind::DirectEntity
        | SubjectKind::Concept => Stage::CoreInformation,
        SubjectKind::UnfiredRule | SubjectKind::Rebuttal | SubjectKind::ContextEntity => {
            Stage::MarginalInformation
        }
        SubjectKind::GroundFragment => Stage::Ground,
        SubjectKind::SourceDocument => Stage::Sources,
        SubjectKind::WhatIfResult => Stage::Counterfactuals,
    }
}

/// A reference to a bundle element (or an incipit item, or a what-if
/// result). Its text form `kind:key` doubles as the node id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementRef {
    Purpose,
    Overview,
    Justification,
    Hint,
    Conclusion(Literal),
    Rule(String),
    /// The rebuttal won by a rule through superiority.
    Rebuttal(String),
    Premise(String),
    Entity(String),
    Concept(String),
    /// Raw fragment keyed by rule id, premise id, or literal text.
    Ground(String),
    Source(String),
    Counterfactual(usize),
}

impl ElementRef {
    /// The key used for labels, typing and ground lookups.
    pub fn key(&self) -> String {
        match self {
            ElementRef::Purpose => "purpose".into(),
            ElementRef::Overview => "overview".into(),
            ElementRef::Justification => "justification".into(),
            ElementRef::Hint => "hint".into(),
            ElementRef::Conclusion(l) => l.to_string(),
            ElementRef::Rule(k)
            | ElementRef::Rebuttal(k)
            | ElementRef::Premise(k)
            | ElementRef::Entity(k)
            | ElementRef::Concept(k)
            | ElementRef::Ground(k)
            | ElementRef::Source(k) => k.clone(),
            ElementRef::Counterfactual(n) => n.to_string(),
        }
    }

    fn prefix(&self) -> &'static str {
        match self {
            ElementRef::Purpose | ElementRef::Overview | ElementRef::Justification | ElementRef::Hint => {
                "incipit"
            }
            ElementRef::Conclusion(_) => "conclusion",
            ElementRef::Rule(_) => "rule",
            ElementRef::Rebuttal(_) => "rebuttal",
            ElementRef::Premise(_) => "premise",
            ElementRef::Entity(_) => "entity",
            ElementRef::Concept(_) => "concept",
            ElementRef::Ground(_) => "ground",
            ElementRef::Source(_) => "source",
            ElementRef::Counterfactual(_) => "whatif",
        }
    }

    pub fn is_incipit(&self) -> bool {
        matches!(
            self,
            ElementRef::Purpose | ElementRef::Overview | ElementRef::Justification | ElementRef::Hint
        )
    }
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix(), self.key())
    }
}

impl FromStr for ElementRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (prefix, key) = s
            .split_once(':')
            .ok_or_else(|| format!("`{s}` is not a node id (expected kind:key)"))?;
        let owned = || key.to_string();
        Ok(match prefix {
            "incipit" => match key {
                "purpose" => ElementRef::Purpose,
                "overview" => ElementRef::Overview,
                "justification" => ElementRef::Justification,
                "hint" => ElementRef::Hint,
                other => return Err(format!("unknown incipit item `{other}`")),
            },
            "conclusion" => ElementRef::Conclusion(key.parse().map_err(|e| format!("{e}"))?),
            "rule" => ElementRef::Rule(owned()),
            "rebuttal" => ElementRef::Rebuttal(owned()),
            "premise" => ElementRef::Premise(owned()),
            "entity" => ElementRef::Entity(owned()),
            "concept" => ElementRef::Concept(owned()),
            "ground" => ElementRef::Ground(owned()),
            "source" => ElementRef::Source(owned()),
            "whatif" => ElementRef::Counterfactual(
                key.parse().map_err(|_| format!("bad what-if index `{key}`"))?,
            ),
            other => return Err(format!("unknown node kind `{other}`")),
        })
    }
}

impl Serialize for ElementRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ElementRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
