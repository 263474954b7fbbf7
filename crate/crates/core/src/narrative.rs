//! Recording the user's path as a narrative and exporting it.
//!
//! Each `mark` interaction becomes an argument (`a1`, `a2`, ...) whose
//! evidence is the marked node. Arguments target the decision or an
//! earlier argument, which gives a small support/attack graph.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::es::{Explanans, InfoNode, Interaction, Stage};
use crate::model::{ExplanandumBundle, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stance {
    Supports,
    Attacks,
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stance::Supports => "supports",
            Stance::Attacks => "attacks",
        })
    }
}

impl FromStr for Stance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "supports" => Ok(Stance::Supports),
            "attacks" => Ok(Stance::Attacks),
            other => Err(format!("stance must be `supports` or `attacks`, got `{other}`")),
        }
    }
}

/// What an argument is about. Serialized as `"decision"` or an argument id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub enum ArgumentTarget {
    #[default]
    Decision,
    Argument(String),
}

impl fmt::Display for ArgumentTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgumentTarget::Decision => f.write_str("decision"),
            ArgumentTarget::Argument(a) => f.write_str(a),
        }
    }
}

impl Serialize for ArgumentTarget {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ArgumentTarget {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(if s == "decision" {
            ArgumentTarget::Decision
        } else {
            ArgumentTarget::Argument(s)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Argument {
    pub id: String,
    pub claim: String,
    pub stance: Stance,
    pub target: ArgumentTarget,
    /// Node ids backing the claim.
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NarrativeMetadata {
    pub bundle_id: String,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Narrative {
    pub metadata: NarrativeMetadata,
    pub arguments: Vec<Argument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NarrativeError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("empty claim")]
    EmptyClaim,
    #[error("unknown argument `{0}`")]
    UnknownArgument(String),
}

impl Narrative {
    pub fn new(bundle: &ExplanandumBundle) -> Self {
        Narrative {
            metadata: NarrativeMetadata {
                bundle_id: bundle.id.clone(),
                mode: bundle.overview.mode,
                goal: bundle.overview.purpose.clone(),
                decision: bundle.overview.decision.as_ref().map(|d| d.to_string()),
            },
            arguments: Vec::new(),
        }
    }

    /// Rebuilds the argument graph from the explanans' mark interactions.
    pub fn from_explanans(bundle: &ExplanandumBundle, explanans: &Explanans) -> Self {
        let mut n = Narrative::new(bundle);
        for i in &explanans.interactions {
            if let Interaction::Mark {
                target,
                stance,
                claim,
                argument_target,
            } = i
            {
                n = mark(&n, explanans, target, *stance, claim, argument_target.clone())
                    .expect("recorded marks were validated when applied");
            }
        }
        n
    }

    pub fn argument(&self, id: &str) -> Option<&Argument> {
        self.arguments.iter().find(|a| a.id == id)
    }
}

/// Returns a new narrative with one more argument.
pub fn mark(
    narrative: &Narrative,
    explanans: &Explanans,
    node: &str,
    stance: Stance,
    claim: &str,
    target: ArgumentTarget,
) -> Result<Narrative, NarrativeError> {
    if explanans.node(node).is_none() {
        return Err(NarrativeError::UnknownNode(node.to_string()));
    }
    if claim.trim().is_empty() {
        return Err(NarrativeError::EmptyClaim);
    }
    if let ArgumentTarget::Argument(a) = &target {
        if narrative.argument(a).is_none() {
            return Err(NarrativeError::UnknownArgument(a.clone()));
        }
    }
    let mut next = narrative.clone();
    next.arguments.push(Argument {
        id: format!("a{}", narrative.arguments.len() + 1),
        claim: claim.trim().to_string(),
        stance,
        target,
        evidence: vec![node.to_string()],
    });
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExportFormat {
    #[default]
    Json,
    Markdown,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "markdown" | "md" => Ok(ExportFormat::Markdown),
            other => Err(format!("unknown format `{other}` (expected json or markdown)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionKind {
    Justificatory,
    Descriptive,
    Causal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionNode {
    pub id: String,
    pub rendering: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub kind: SectionKind,
    pub title: String,
    pub stages: Vec<Stage>,
    pub nodes: Vec<SectionNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStep {
    pub index: usize,
    pub interaction: Interaction,
    pub appended: Vec<String>,
}

/// The exported artefact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NarrativeExport {
    pub metadata: NarrativeMetadata,
    pub path: Vec<PathStep>,
    pub arguments: Vec<Argument>,
    pub sections: Vec<Section>,
}

fn section(kind: SectionKind, title: &str, stages: &[Stage], explanans: &Explanans) -> Section {
    Section {
        kind,
        title: title.to_string(),
        stages: stages.to_vec(),
        nodes: explanans
            .nodes
            .iter()
            .filter(|n| stages.contains(&n.stage))
            .map(|n: &InfoNode| SectionNode {
                id: n.id.clone(),
                rendering: n.rendering.clone(),
            })
            .collect(),
    }
}

/// Groups the explanans into labelled sections. Descriptive sections are
/// only emitted for stages the user actually reached.
pub fn sections(explanans: &Explanans) -> Vec<Section> {
    let mut out = vec![section(
        SectionKind::Justificatory,
        "Justification",
        &[Stage::Incipit, Stage::Sources],
        explanans,
    )];
    for (stage, title) in [
        (Stage::CoreInformation, "Core information"),
        (Stage::MarginalInformation, "Marginal information"),
        (Stage::Ground, "Ground"),
    ] {
        let s = section(SectionKind::Descriptive, title, &[stage], explanans);
        if !s.nodes.is_empty() {
            out.push(s);
        }
    }
    let causal = section(SectionKind::Causal, "Counterfactuals", &[Stage::Counterfactuals], explanans);
    if !causal.nodes.is_empty() {
        out.push(causal);
    }
    out
}

pub fn build_export(narrative: &Narrative, explanans: &Explanans) -> NarrativeExport {
    let path = explanans
        .interactions
        .iter()
        .enumerate()
        .map(|(index, interaction)| PathStep {
            index,
            interaction: interaction.clone(),
            appended: explanans.introduced_by(index).map(|n| n.id.clone()).collect(),
        })
        .collect();
    NarrativeExport {
        metadata: narrative.metadata.clone(),
        path,
        arguments: narrative.arguments.clone(),
        sections: sections(explanans),
    }
}

/// Deterministic export: the same narrative and explanans always give the
/// same bytes.
pub fn export_narrative(narrative: &Narrative, explanans: &Explanans, format: ExportFormat) -> String {
    let export = build_export(narrative, explanans);
    match format {
        ExportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&export).expect("export serializes");
            s.push('\n');
            s
        }
        ExportFormat::Markdown => markdown(&export),
    }
}

fn markdown(e: &NarrativeExport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Explanation of {}", e.metadata.bundle_id);
    let _ = writeln!(s);
    let _ = writeln!(s, "- Mode: {}", e.metadata.mode);
    if let Some(g) = &e.metadata.goal {
        let _ = writeln!(s, "- Goal: {g}");
    }
    if let Some(d) = &e.metadata.decision {
        let _ = writeln!(s, "- Decision: `{d}`");
    }
    for sec in &e.sections {
        let kind = match sec.kind {
            SectionKind::Justificatory => "justificatory",
            SectionKind::Descriptive => "descriptive",
            SectionKind::Causal => "causal",
        };
        let _ = writeln!(s);
        let _ = writeln!(s, "## {} ({kind})", sec.title);
        for n in &sec.nodes {
            let _ = writeln!(s);
            let _ = writeln!(s, "### `{}`", n.id);
            let _ = writeln!(s);
            let _ = writeln!(s, "{}", n.rendering);
        }
    }
    if !e.arguments.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "## Arguments");
        let _ = writeln!(s);
        for a in &e.arguments {
            let _ = writeln!(
                s,
                "- **{}** {} {}: {} (evidence: {})",
                a.id,
                a.stance,
                a.target,
                a.claim,
                a.evidence.join(", ")
            );
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "## Path");
    let _ = writeln!(s);
    if e.path.is_empty() {
        let _ = writeln!(s, "No interactions.");
    }
    for p in &e.path {
        let _ = write!(s, "{}. `{}`", p.index + 1, p.interaction);
        if !p.appended.is_empty() {
            let _ = write!(s, " added {}", p.appended.join(", "));
        }
        let _ = writeln!(s);
    }
    s
}
