//! Propositional defeasible logic: ambiguity blocking with team defeat.
//!
//! The theory's atom-dependency graph must be acyclic. Literals are decided
//! one atom at a time in topological order, so each literal's antecedents
//! are fully tagged before the literal itself is considered, and the single
//! pass yields the least fixpoint of the proof conditions.
//!
//! Firing records and justifications are produced during that pass.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::literal::Literal;
use crate::model::{Rule, Theory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProofTag {
    #[serde(rename = "+Δ")]
    DefinitelyProvable,
    #[serde(rename = "-Δ")]
    DefinitelyRefuted,
    #[serde(rename = "+∂")]
    DefeasiblyProvable,
    #[serde(rename = "-∂")]
    DefeasiblyRefuted,
}

impl ProofTag {
    pub fn symbol(self) -> &'static str {
        match self {
            ProofTag::DefinitelyProvable => "+Δ",
            ProofTag::DefinitelyRefuted => "−Δ",
            ProofTag::DefeasiblyProvable => "+∂",
            ProofTag::DefeasiblyRefuted => "−∂",
        }
    }
}

impl fmt::Display for ProofTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Both tags of a literal: one definite, one defeasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conclusion {
    pub definite: bool,
    pub defeasible: bool,
}

impl Conclusion {
    pub fn definite_tag(self) -> ProofTag {
        if self.definite {
            ProofTag::DefinitelyProvable
        } else {
            ProofTag::DefinitelyRefuted
        }
    }

    pub fn defeasible_tag(self) -> ProofTag {
        if self.defeasible {
            ProofTag::DefeasiblyProvable
        } else {
            ProofTag::DefeasiblyRefuted
        }
    }

    pub fn tags(self) -> [ProofTag; 2] {
        [self.definite_tag(), self.defeasible_tag()]
    }

    pub fn has(self, tag: ProofTag) -> bool {
        self.tags().contains(&tag)
    }
}

/// One step of the causal chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Firing {
    pub step: usize,
    pub rule: String,
    pub satisfied: Vec<Literal>,
    pub consequent: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "lowercase")]
pub enum Support {
    /// The literal is a premise (or an evaluated premise comparison).
    Fact,
    Rule(String),
}

impl Support {
    pub fn rule_id(&self) -> Option<&str> {
        match self {
            Support::Fact => None,
            Support::Rule(id) => Some(id),
        }
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Support::Fact => f.write_str("fact"),
            Support::Rule(id) => f.write_str(id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefeatReason {
    InapplicableAntecedent,
    BeatenBySuperiority,
    /// The winning literal is definitely provable; defeasible attackers
    /// cannot touch it.
    OverriddenByDefiniteConclusion,
}

impl DefeatReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DefeatReason::InapplicableAntecedent => "inapplicable-antecedent",
            DefeatReason::BeatenBySuperiority => "beaten-by-superiority",
            DefeatReason::OverriddenByDefiniteConclusion => "overridden-by-definite-conclusion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Defeat {
    pub rule: String,
    pub reason: DefeatReason,
    /// For superiority defeats, the rule that beat this one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Justification {
    pub conclusion: Literal,
    pub winning_rule: Support,
    pub supporting_facts: Vec<Literal>,
    pub defeated_rules: Vec<Defeat>,
    pub superiority_used: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub conclusions: BTreeMap<Literal, Conclusion>,
    pub causal_chain: Vec<Firing>,
    pub justifications: BTreeMap<Literal, Justification>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonerError {
    #[error("cyclic dependency: {}", format_cycle(cycle))]
    CyclicDependency { cycle: Vec<Literal> },
    #[error("`{0}` is not positively derived")]
    NotPositivelyDerived(Literal),
}

fn format_cycle(cycle: &[Literal]) -> String {
    cycle
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

impl Derivation {
    pub fn conclusion(&self, literal: &Literal) -> Conclusion {
        self.conclusions.get(literal).copied().unwrap_or(Conclusion {
            definite: false,
            defeasible: false,
        })
    }

    pub fn is_provable(&self, literal: &Literal) -> bool {
        self.conclusion(literal).defeasible
    }

    /// Literals tagged +∂ (which includes every +Δ literal).
    pub fn positive(&self) -> impl Iterator<Item = &Literal> {
        self.conclusions
            .iter()
            .filter(|(_, c)| c.defeasible)
            .map(|(l, _)| l)
    }

    pub fn fired_rules(&self) -> BTreeSet<&str> {
        self.causal_chain.iter().map(|f| f.rule.as_str()).collect()
    }

    pub fn has_fired(&self, rule: &str) -> bool {
        self.causal_chain.iter().any(|f| f.rule == rule)
    }

    /// Justifications along the derivation of `literal` that were settled by
    /// superiority, nearest the root first.
    pub fn contested_ancestry(&self, literal: &Literal) -> Vec<&Justification> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut stack = vec![literal];
        while let Some(lit) = stack.pop() {
            if !seen.insert(lit) {
                continue;
            }
            let Some(j) = self.justifications.get(lit) else { continue };
            if !j.superiority_used.is_empty() {
                out.push(j);
            }
            if j.winning_rule != Support::Fact {
                for a in j.supporting_facts.iter().rev() {
                    stack.push(a);
                }
            }
        }
        out
    }

    /// The rule that settles `literal`: the nearest superiority-contested
    /// winner in its ancestry, else its own winning rule.
    pub fn deciding_rule(&self, literal: &Literal) -> Option<&str> {
        if let Some(j) = self.contested_ancestry(literal).first() {
            return j.winning_rule.rule_id();
        }
        self.justifications
            .get(literal)
            .and_then(|j| j.winning_rule.rule_id())
    }
}

/// Returns the stored justification of a positively derived literal.
pub fn justify<'a>(derivation: &'a Derivation, literal: &Literal) -> Result<&'a Justification, ReasonerError> {
    if !derivation.is_provable(literal) {
        return Err(ReasonerError::NotPositivelyDerived(literal.clone()));
    }
    derivation
        .justifications
        .get(literal)
        .ok_or_else(|| ReasonerError::NotPositivelyDerived(literal.clone()))
}

pub fn causal_chain(derivation: &Derivation) -> &[Firing] {
    &derivation.causal_chain
}

struct Index<'a> {
    theory: &'a Theory,
    /// rules grouped by consequent, declaration order preserved
    by_head: BTreeMap<&'a Literal, Vec<&'a Rule>>,
}

impl<'a> Index<'a> {
    fn new(theory: &'a Theory) -> Self {
        let mut by_head: BTreeMap<&Literal, Vec<&Rule>> = BTreeMap::new();
        for r in &theory.rules {
            by_head.entry(&r.consequent).or_default().push(r);
        }
        Index { theory, by_head }
    }

    fn rules_for(&self, lit: &Literal) -> &[&'a Rule] {
        self.by_head.get(lit).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Orders atom keys so every antecedent precedes the consequents it feeds.
fn topological_order(
    theory: &Theory,
    facts: &BTreeSet<Literal>,
) -> Result<Vec<Literal>, ReasonerError> {
    let mut nodes: BTreeSet<Literal> = facts.iter().map(Literal::positive).collect();
    let mut edges: BTreeMap<Literal, BTreeSet<Literal>> = BTreeMap::new();
    for r in &theory.rules {
        let head = r.consequent.positive();
        nodes.insert(head.clone());
        for a in &r.antecedents {
            let from = a.positive();
            nodes.insert(from.clone());
            edges.entry(from).or_default().insert(head.clone());
        }
    }

    let mut indegree: BTreeMap<&Literal, usize> = nodes.iter().map(|n| (n, 0)).collect();
    for targets in edges.values() {
        for t in targets {
            *indegree.get_mut(t).expect("edge target is a node") += 1;
        }
    }
    let mut ready: BTreeSet<&Literal> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| *n)
        .collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(n) = ready.pop_first() {
        order.push(n.clone());
        if let Some(targets) = edges.get(n) {
            for t in targets {
                let d = indegree.get_mut(t).expect("edge target is a node");
                *d -= 1;
                if *d == 0 {
                    ready.insert(t);
                }
            }
        }
    }
    if order.len() == nodes.len() {
        return Ok(order);
    }

    // Walk the residual graph until a node repeats to report one cycle.
    let residual: BTreeSet<&Literal> = indegree
        .iter()
        .filter(|(_, d)| **d > 0)
        .map(|(n, _)| *n)
        .collect();
    let start = *residual.iter().next().expect("residual graph is nonempty");
    let mut path: Vec<&Literal> = vec![start];
    loop {
        let current = *path.last().expect("path is nonempty");
        let next = edges
            .get(current)
            .and_then(|ts| ts.iter().find(|t| residual.contains(t)))
            .expect("every residual node has a residual successor");
        if let Some(pos) = path.iter().position(|p| *p == next) {
            let mut cycle: Vec<Literal> = path[pos..].iter().map(|l| (*l).clone()).collect();
            cycle.push(next.clone());
            return Err(ReasonerError::CyclicDependency { cycle });
        }
        path.push(next);
    }
}

struct Tables {
    definite: BTreeMap<Literal, bool>,
    defeasible: BTreeMap<Literal, bool>,
}

impl Tables {
    fn definite(&self, lit: &Literal) -> bool {
        self.definite.get(lit).copied().unwrap_or(false)
    }

    fn defeasible(&self, lit: &Literal) -> bool {
        self.defeasible.get(lit).copied().unwrap_or(false)
    }

    fn definitely_applicable(&self, rule: &Rule) -> bool {
        rule.antecedents.iter().all(|a| self.definite(a))
    }

    fn applicable(&self, rule: &Rule) -> bool {
        rule.antecedents.iter().all(|a| self.defeasible(a))
    }
}

/// Computes the tags, causal chain and justifications for `facts` under `theory`.
pub fn derive(theory: &Theory, facts: &BTreeSet<Literal>) -> Result<Derivation, ReasonerError> {
    let order = topological_order(theory, facts)?;
    let index = Index::new(theory);
    let mut tables = Tables {
        definite: BTreeMap::new(),
        defeasible: BTreeMap::new(),
    };
    let mut derivation = Derivation::default();

    for key in &order {
        let pair = [key.clone(), key.complement()];

        for q in &pair {
            let definite = facts.contains(q)
                || index
                    .rules_for(q)
                    .iter()
                    .any(|r| r.kind == crate::model::RuleKind::Strict && tables.definitely_applicable(r));
            tables.definite.insert(q.clone(), definite);
        }

        let mut decided: Vec<(Literal, Option<Justification>)> = Vec::with_capacity(2);
        for q in &pair {
            let nq = q.complement();
            let justification = if tables.definite(q) {
                Some(definite_justification(&index, &tables, facts, q))
            } else if tables.definite(&nq) {
                None
            } else {
                defeasible_justification(&index, &tables, q)
            };
            decided.push((q.clone(), justification));
        }
        for (q, justification) in decided {
            tables.defeasible.insert(q.clone(), justification.is_some());
            if let Some(j) = justification {
                derivation.justifications.insert(q, j);
            }
        }

        for q in &pair {
            if !tables.defeasible(q) {
                continue;
            }
            for r in index.rules_for(q) {
                if r.kind.supports() && tables.applicable(r) {
                    derivation.causal_chain.push(Firing {
                        step: derivation.causal_chain.len() + 1,
                        rule: r.id.clone(),
                        satisfied: r.antecedents.clone(),
                        consequent: q.clone(),
                    });
                }
            }
        }
    }

    let universe: BTreeSet<Literal> = order
        .iter()
        .flat_map(|k| [k.clone(), k.complement()])
        .collect();
    derivation.conclusions = universe
        .into_iter()
        .map(|l| {
            let c = Conclusion {
                definite: tables.definite(&l),
                defeasible: tables.defeasible(&l),
            };
            (l, c)
        })
        .collect();
    Ok(derivation)
}

fn definite_justification(
    index: &Index<'_>,
    tables: &Tables,
    facts: &BTreeSet<Literal>,
    q: &Literal,
) -> Justification {
    let (winning_rule, supporting_facts) = if facts.contains(q) {
        (Support::Fact, vec![q.clone()])
    } else {
        let r = index
            .rules_for(q)
            .iter()
            .find(|r| r.kind == crate::model::RuleKind::Strict && tables.definitely_applicable(r))
            .expect("definite literal has a fact or an applicable strict rule");
        (Support::Rule(r.id.clone()), r.antecedents.clone())
    };
    let defeated_rules = index
        .rules_for(&q.complement())
        .iter()
        .map(|s| Defeat {
            rule: s.id.clone(),
            reason: if tables.applicable(s) {
                DefeatReason::OverriddenByDefiniteConclusion
            } else {
                DefeatReason::InapplicableAntecedent
            },
            by: None,
            annotation: None,
        })
        .collect();
    Justification {
        conclusion: q.clone(),
        winning_rule,
        supporting_facts,
        defeated_rules,
        superiority_used: Vec::new(),
    }
}

/// +∂ for a literal that is not definite and whose complement is not
/// definite. Returns `None` when the literal is refuted.
fn defeasible_justification(index: &Index<'_>, tables: &Tables, q: &Literal) -> Option<Justification> {
    let supporters: Vec<&Rule> = index
        .rules_for(q)
        .iter()
        .copied()
        .filter(|r| r.kind.supports() && tables.applicable(r))
        .collect();
    if supporters.is_empty() {
        return None;
    }

    let mut defeated_rules = Vec::new();
    let mut superiority_used = Vec::new();
    for s in index.rules_for(&q.complement()) {
        if !tables.applicable(s) {
            defeated_rules.push(Defeat {
                rule: s.id.clone(),
                reason: DefeatReason::InapplicableAntecedent,
                by: None,
                annotation: None,
            });
            continue;
        }
        let beater = supporters
            .iter()
            .find(|t| index.theory.is_superior(&t.id, &s.id))?;
        let annotation = index
            .theory
            .superiority_pair(&beater.id, &s.id)
            .and_then(|p| p.annotation.clone());
        superiority_used.push((beater.id.clone(), s.id.clone()));
        defeated_rules.push(Defeat {
            rule: s.id.clone(),
            reason: DefeatReason::BeatenBySuperiority,
            by: Some(beater.id.clone()),
            annotation,
        });
    }

    let winner = superiority_used
        .first()
        .and_then(|(w, _)| supporters.iter().find(|r| &r.id == w))
        .unwrap_or(&supporters[0]);
    Some(Justification {
        conclusion: q.clone(),
        winning_rule: Support::Rule(winner.id.clone()),
        supporting_facts: winner.antecedents.clone(),
        defeated_rules,
        superiority_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RuleKind, Superiority};

    fn lit(s: &str) -> Literal {
        s.parse().unwrap()
    }

    fn rule(id: &str, kind: RuleKind, ante: &[&str], head: &str) -> Rule {
        Rule::new(id, kind, ante.iter().map(|a| lit(a)).collect(), lit(head))
    }

    fn facts(items: &[&str]) -> BTreeSet<Literal> {
        items.iter().map(|s| lit(s)).collect()
    }

    fn gdpr_theory() -> Theory {
        Theory {
            rules: vec![
                rule("r_gdpr", RuleKind::Defeasible, &["age(marco)<16"], "~valid_consent(marco)"),
                rule(
                    "r_it",
                    RuleKind::Defeasible,
                    &["age(marco)>=14", "jurisdiction(marco)=italy"],
                    "valid_consent(marco)",
                ),
                rule(
                    "r_rej",
                    RuleKind::Defeasible,
                    &["valid_consent(marco)"],
                    "reject_parent_deletion(giulio,marco)",
                ),
            ],
            superiority: vec![Superiority {
                winner: "r_it".into(),
                loser: "r_gdpr".into(),
                annotation: Some("Lex specialis derogat generali".into()),
            }],
        }
    }

    fn gdpr_facts() -> BTreeSet<Literal> {
        facts(&[
            "age(marco)=14",
            "age(marco)<16",
            "age(marco)>=14",
            "jurisdiction(marco)=italy",
            "parent(giulio,marco)",
        ])
    }

    #[test]
    fn gdpr_case_rejects_the_parent_request() {
        let d = derive(&gdpr_theory(), &gdpr_facts()).unwrap();
        assert!(d.conclusion(&lit("valid_consent(marco)")).defeasible);
        assert!(!d.conclusion(&lit("~valid_consent(marco)")).defeasible);
        assert!(d.conclusion(&lit("reject_parent_deletion(giulio,marco)")).defeasible);
        assert!(!d.conclusion(&lit("reject_parent_deletion(giulio,marco)")).definite);

        let chain: Vec<&str> = d.causal_chain.iter().map(|f| f.rule.as_str()).collect();
        assert_eq!(chain, ["r_it", "r_rej"]);

        let j = justify(&d, &lit("valid_consent(marco)")).unwrap();
        assert_eq!(j.winning_rule, Support::Rule("r_it".into()));
        assert_eq!(j.superiority_used, vec![("r_it".to_string(), "r_gdpr".to_string())]);
        assert_eq!(j.defeated_rules.len(), 1);
        assert_eq!(j.defeated_rules[0].reason, DefeatReason::BeatenBySuperiority);
        assert_eq!(
            j.defeated_rules[0].annotation.as_deref(),
            Some("Lex specialis derogat generali")
        );
        assert_eq!(
            d.deciding_rule(&lit("reject_parent_deletion(giulio,marco)")),
            Some("r_it")
        );
    }

    #[test]
    fn without_superiority_the_conflict_is_ambiguous() {
        let mut t = gdpr_theory();
        t.superiority.clear();
        let d = derive(&t, &gdpr_facts()).unwrap();
        assert!(!d.is_provable(&lit("valid_consent(marco)")));
        assert!(!d.is_provable(&lit("~valid_consent(marco)")));
        assert!(!d.is_provable(&lit("reject_parent_deletion(giulio,marco)")));
    }

    #[test]
    fn empty_theory_gives_empty_derivation() {
        let d = derive(&Theory::default(), &BTreeSet::new()).unwrap();
        assert!(d.conclusions.is_empty());
        assert!(d.causal_chain.is_empty());
    }

    #[test]
    fn unopposed_fact_is_its_own_support() {
        let d = derive(&Theory::default(), &facts(&["p"])).unwrap();
        let j = justify(&d, &lit("p")).unwrap();
        assert_eq!(j.winning_rule, Support::Fact);
        assert!(j.defeated_rules.is_empty());
        assert_eq!(d.conclusion(&lit("p")).tags(), [ProofTag::DefinitelyProvable, ProofTag::DefeasiblyProvable]);
        assert_eq!(d.conclusion(&lit("~p")).tags(), [ProofTag::DefinitelyRefuted, ProofTag::DefeasiblyRefuted]);
    }

    #[test]
    fn single_rule_chain_has_one_step() {
        let t = Theory::new(vec![rule("r", RuleKind::Defeasible, &["p"], "q")]);
        let d = derive(&t, &facts(&["p"])).unwrap();
        assert_eq!(d.causal_chain.len(), 1);
        assert_eq!(d.causal_chain[0].step, 1);
        assert_eq!(d.causal_chain[0].consequent, lit("q"));
    }

    #[test]
    fn refuted_literal_has_no_justification() {
        let d = derive(&gdpr_theory(), &gdpr_facts()).unwrap();
        let err = justify(&d, &lit("~valid_consent(marco)")).unwrap_err();
        assert_eq!(err, ReasonerError::NotPositivelyDerived(lit("~valid_consent(marco)")));
    }

    #[test]
    fn cycles_are_reported() {
        let t = Theory::new(vec![
            rule("a", RuleKind::Defeasible, &["p"], "q"),
            rule("b", RuleKind::Defeasible, &["q"], "r"),
            rule("c", RuleKind::Defeasible, &["r"], "~p"),
        ]);
        match derive(&t, &BTreeSet::new()).unwrap_err() {
            ReasonerError::CyclicDependency { cycle } => {
                assert_eq!(cycle.first(), cycle.last());
                let names: Vec<String> = cycle.iter().map(|l| l.to_string()).collect();
                assert_eq!(names, ["p", "q", "r", "p"]);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn defeaters_block_but_never_conclude() {
        let t = Theory::new(vec![
            rule("d", RuleKind::Defeasible, &["p"], "q"),
            rule("x", RuleKind::Defeater, &["p"], "~q"),
        ]);
        let d = derive(&t, &facts(&["p"])).unwrap();
        assert!(!d.is_provable(&lit("q")));
        assert!(!d.is_provable(&lit("~q")));
        assert_eq!(d.causal_chain.len(), 0);
    }

    #[test]
    fn team_defeat() {
        // a > c and b > d: together the team for q beats every attacker.
        let t = Theory {
            rules: vec![
                rule("a", RuleKind::Defeasible, &["p"], "q"),
                rule("b", RuleKind::Defeasible, &["p"], "q"),
                rule("c", RuleKind::Defeasible, &["p"], "~q"),
                rule("d", RuleKind::Defeasible, &["p"], "~q"),
            ],
            superiority: vec![
                Superiority { winner: "a".into(), loser: "c".into(), annotation: None },
                Superiority { winner: "b".into(), loser: "d".into(), annotation: None },
            ],
        };
        let d = derive(&t, &facts(&["p"])).unwrap();
        assert!(d.is_provable(&lit("q")));
        assert!(!d.is_provable(&lit("~q")));
        let j = justify(&d, &lit("q")).unwrap();
        assert_eq!(j.superiority_used.len(), 2);
    }

    #[test]
    fn strict_rules_give_definite_conclusions() {
        let t = Theory::new(vec![
            rule("s", RuleKind::Strict, &["p"], "q"),
            rule("d", RuleKind::Defeasible, &["p"], "~q"),
        ]);
        let d = derive(&t, &facts(&["p"])).unwrap();
        assert!(d.conclusion(&lit("q")).definite);
        assert!(!d.is_provable(&lit("~q")));
        let j = justify(&d, &lit("q")).unwrap();
        assert_eq!(j.winning_rule, Support::Rule("s".into()));
        assert_eq!(j.defeated_rules[0].reason, DefeatReason::OverriddenByDefiniteConclusion);
    }
}
