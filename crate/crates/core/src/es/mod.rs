//! The explanatory process: an initial explanans, the action set, and the
//! transition `step(E_t, i_t) = E_{t+1}` over a lazily explored space.

mod element;
mod render;
mod space;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use element::{stage_of, ElementRef, Stage, SubjectKind};
pub use space::{
    available_actions, initial_explanans, relevance_score, step, ExplanatorySpace, UNREACHABLE,
};

use crate::counterfactual::{CounterfactualError, CounterfactualResult, Mutation};
use crate::literal::Literal;
use crate::model::GroundFragment;
use crate::narrative::{ArgumentTarget, Stance};

/// Payload carried by nodes whose subject has more than a rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NodeDetail {
    Ground {
        #[serde(flatten)]
        fragment: GroundFragment,
    },
    Counterfactual {
        #[serde(flatten)]
        result: Box<CounterfactualResult>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoNode {
    pub id: String,
    pub stage: Stage,
    pub kind: SubjectKind,
    pub subject: ElementRef,
    pub rendering: String,
    pub complexity_weight: u32,
    pub links: Vec<ElementRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<NodeDetail>,
}

impl InfoNode {
    pub(crate) fn new(
        subject: ElementRef,
        kind: SubjectKind,
        rendering: String,
        links: Vec<ElementRef>,
        detail: Option<NodeDetail>,
    ) -> Self {
        let tokens = rendering.split_whitespace().count();
        let weight = (tokens + links.len()).max(1) as u32;
        InfoNode {
            id: subject.to_string(),
            stage: stage_of(kind),
            kind,
            subject,
            rendering,
            complexity_weight: weight,
            links,
            detail,
        }
    }
}

/// The explanation in progress: an append-only node sequence plus the
/// interactions that grew it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Explanans {
    pub nodes: Vec<InfoNode>,
    /// For each node, the index into `interactions` that introduced it;
    /// `None` for the initial segment.
    pub provenance: Vec<Option<usize>>,
    pub interactions: Vec<Interaction>,
}

impl Explanans {
    pub fn node(&self, id: &str) -> Option<&InfoNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn contains(&self, subject: &ElementRef) -> bool {
        self.nodes.iter().any(|n| &n.subject == subject)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn initial_len(&self) -> usize {
        self.provenance.iter().take_while(|p| p.is_none()).count()
    }

    /// Nodes appended by the interaction at `index`.
    pub fn introduced_by(&self, index: usize) -> impl Iterator<Item = &InfoNode> {
        self.nodes
            .iter()
            .zip(&self.provenance)
            .filter(move |(_, p)| **p == Some(index))
            .map(|(n, _)| n)
    }

    pub fn counterfactual_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.subject, ElementRef::Counterfactual(_)))
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Expand,
    Ground,
    Source,
    Mark,
    #[serde(rename = "whatif")]
    WhatIf,
}

impl ActionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Expand => "expand",
            ActionKind::Ground => "ground",
            ActionKind::Source => "source",
            ActionKind::Mark => "mark",
            ActionKind::WhatIf => "whatif",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A user interaction: an action from the fixed set plus its arguments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "lowercase", deny_unknown_fields)]
pub enum Interaction {
    Expand {
        target: String,
    },
    Ground {
        target: String,
    },
    Source {
        target: String,
    },
    Mark {
        target: String,
        stance: Stance,
        claim: String,
        #[serde(default)]
        argument_target: ArgumentTarget,
    },
    #[serde(rename = "whatif")]
    WhatIf {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<String>,
        mutations: Vec<Mutation>,
    },
}

impl Interaction {
    pub fn kind(&self) -> ActionKind {
        match self {
            Interaction::Expand { .. } => ActionKind::Expand,
            Interaction::Ground { .. } => ActionKind::Ground,
            Interaction::Source { .. } => ActionKind::Source,
            Interaction::Mark { .. } => ActionKind::Mark,
            Interaction::WhatIf { .. } => ActionKind::WhatIf,
        }
    }

    pub fn target(&self) -> Option<&str> {
        match self {
            Interaction::Expand { target }
            | Interaction::Ground { target }
            | Interaction::Source { target }
            | Interaction::Mark { target, .. } => Some(target),
            Interaction::WhatIf { target, .. } => target.as_deref(),
        }
    }
}

/// Script form, one line per interaction.
impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interaction::Expand { target } => write!(f, "expand {target}"),
            Interaction::Ground { target } => write!(f, "ground {target}"),
            Interaction::Source { target } => write!(f, "source {target}"),
            Interaction::Mark {
                target,
                stance,
                claim,
                argument_target,
            } => {
                write!(f, "mark {target} {stance}")?;
                if let ArgumentTarget::Argument(a) = argument_target {
                    write!(f, " {a}")?;
                }
                write!(f, " {claim:?}")
            }
            Interaction::WhatIf { mutations, .. } => {
                f.write_str("whatif ")?;
                for (i, m) in mutations.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{m}")?;
                }
                Ok(())
            }
        }
    }
}

/// Heuristic scores of a candidate; lower is presented earlier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scores {
    pub relevance: u32,
    pub abstraction: u32,
    pub simplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateAction {
    pub interaction: Interaction,
    pub scores: Scores,
    pub stage: Stage,
    /// Ids of the nodes the action would append.
    pub appends: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    Relevance,
    Abstraction,
    Simplicity,
}

/// Priority of the three exploration policies when ordering candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicOrder(pub [Heuristic; 3]);

impl Default for HeuristicOrder {
    fn default() -> Self {
        HeuristicOrder([Heuristic::Relevance, Heuristic::Abstraction, Heuristic::Simplicity])
    }
}

impl HeuristicOrder {
    pub fn key(&self, s: &Scores) -> [u32; 3] {
        self.0.map(|h| match h {
            Heuristic::Relevance => s.relevance,
            Heuristic::Abstraction => s.abstraction,
            Heuristic::Simplicity => s.simplicity,
        })
    }
}

impl FromStr for HeuristicOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<Heuristic> = s
            .split(',')
            .map(|p| match p.trim() {
                "relevance" => Ok(Heuristic::Relevance),
                "abstraction" => Ok(Heuristic::Abstraction),
                "simplicity" => Ok(Heuristic::Simplicity),
                other => Err(format!("unknown heuristic `{other}`")),
            })
            .collect::<Result<_, _>>()?;
        match parts.as_slice() {
            [a, b, c] if a != b && b != c && a != c => Ok(HeuristicOrder([*a, *b, *c])),
            _ => Err("expected a permutation of relevance,abstraction,simplicity".into()),
        }
    }
}

impl fmt::Display for HeuristicOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self
            .0
            .iter()
            .map(|h| match h {
                Heuristic::Relevance => "relevance",
                Heuristic::Abstraction => "abstraction",
                Heuristic::Simplicity => "simplicity",
            })
            .collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EsError {
    #[error("unknown target `{0}`")]
    UnknownTarget(String),
    #[error("nothing to expand on `{0}`")]
    NothingToExpand(String),
    #[error("`{target}` has no {what}")]
    NotApplicable { target: String, what: &'static str },
    #[error("{action} on `{target}` would add nothing new")]
    AlreadyShown { action: ActionKind, target: String },
    #[error("malformed arguments: {0}")]
    MalformedArguments(String),
    #[error("ex-post bundle requires a derivation")]
    MissingDerivation,
    #[error(transparent)]
    Counterfactual(#[from] CounterfactualError),
}

impl EsError {
    pub fn code(&self) -> &'static str {
        match self {
            EsError::UnknownTarget(_) => "unknown_target",
            EsError::NothingToExpand(_) => "nothing_to_expand",
            EsError::NotApplicable { .. } => "not_applicable",
            EsError::AlreadyShown { .. } => "already_shown",
            EsError::MalformedArguments(_) => "malformed_arguments",
            EsError::MissingDerivation => "missing_derivation",
            EsError::Counterfactual(e) => e.code(),
        }
    }
}

/// Renders a literal's decision status for incipit and what-if text.
pub(crate) fn literal_list(lits: &[Literal]) -> String {
    lits.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ")
}
