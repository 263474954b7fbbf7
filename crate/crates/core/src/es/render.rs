//! Natural-language renderings of information nodes.

use std::fmt::Write as _;

use super::element::ElementRef;
use super::literal_list;
use super::space::ExplanatorySpace;
use crate::counterfactual::CounterfactualResult;
use crate::literal::Literal;
use crate::model::Mode;
use crate::reasoner::{DefeatReason, Support};

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

impl ExplanatorySpace<'_> {
    fn rule_name(&self, id: &str) -> String {
        let label = self.bundle.label(id);
        if label == id {
            format!("rule {id}")
        } else {
            format!("{label} ({id})")
        }
    }

    fn literal_name(&self, lit: &Literal) -> String {
        let label = self.bundle.label(&lit.atom);
        if label == lit.atom {
            lit.to_string()
        } else {
            format!("{label} [{lit}]")
        }
    }

    pub(super) fn render(&self, subject: &ElementRef) -> String {
        let b = self.bundle;
        let d = self.derivation;
        match subject {
            ElementRef::Purpose => match &b.overview.purpose {
                Some(p) => format!("Purpose: {p}"),
                None => "Purpose: not stated.".to_string(),
            },
            ElementRef::Overview => self.render_overview(),
            ElementRef::Justification => self.render_justification(),
            ElementRef::Hint => {
                let mut s = String::from(
                    "Expand any element for detail, ask for its original ground form or its sources, \
                     mark what supports or attacks the decision, or try what-if changes to the premises",
                );
                let premises: Vec<String> = b.premises().iter().map(|p| p.assignment()).collect();
                if !premises.is_empty() {
                    let _ = write!(s, " ({})", premises.join(", "));
                }
                s.push('.');
                s
            }
            ElementRef::Conclusion(l) => {
                let c = d.conclusion(l);
                let mut s = format!(
                    "{} holds ({} {}).",
                    capitalize(&self.literal_name(l)),
                    c.definite_tag().symbol(),
                    c.defeasible_tag().symbol()
                );
                if let Some(j) = d.justifications.get(l) {
                    if let Support::Rule(r) = &j.winning_rule {
                        let _ = write!(s, " Established by {}", self.rule_name(r));
                        if !j.supporting_facts.is_empty() {
                            let _ = write!(s, " from {}", literal_list(&j.supporting_facts));
                        }
                        s.push('.');
                    }
                    for def in &j.defeated_rules {
                        let _ = write!(s, " {}", self.render_defeat(def));
                    }
                }
                s
            }
            ElementRef::Rule(id) => {
                let r = b.rule(id).expect("rule exists");
                let mut s = format!(
                    "{}: {} {} {}.",
                    capitalize(&self.rule_name(id)),
                    literal_list(&r.antecedents),
                    r.kind.arrow(),
                    r.consequent
                );
                if let Some(f) = d.causal_chain.iter().find(|f| &f.rule == id) {
                    let _ = write!(s, " Fired at step {} concluding {}.", f.step, f.consequent);
                } else {
                    let unmet: Vec<Literal> = r
                        .antecedents
                        .iter()
                        .filter(|a| !d.is_provable(a))
                        .cloned()
                        .collect();
                    if unmet.is_empty() {
                        s.push_str(" Applicable but its conclusion did not prevail.");
                    } else {
                        let _ = write!(s, " Not fired: {} not established.", literal_list(&unmet));
                    }
                }
                if let Some(j) = &r.jurisdiction {
                    let _ = write!(s, " Jurisdiction: {j}.");
                }
                s
            }
            ElementRef::Rebuttal(w) => {
                let mut parts = Vec::new();
                for j in d.justifications.values() {
                    for (winner, loser) in &j.superiority_used {
                        if winner != w {
                            continue;
                        }
                        let mut p = format!(
                            "{} prevails over {}",
                            capitalize(&self.rule_name(w)),
                            self.rule_name(loser)
                        );
                        if let Some(a) = b
                            .theory()
                            .superiority_pair(winner, loser)
                            .and_then(|p| p.annotation.as_ref())
                        {
                            let _ = write!(p, " ({a})");
                        }
                        p.push_str(&format!(" on {}", j.conclusion));
                        parts.push(p);
                    }
                }
                parts.dedup();
                format!("{}.", parts.join("; "))
            }
            ElementRef::Premise(id) => {
                let p = b.premise(id).expect("premise exists");
                let label = b.label(id);
                if label == id {
                    format!("Premise {}.", p.assignment())
                } else {
                    format!("{label}: {}.", p.assignment())
                }
            }
            ElementRef::Entity(name) => {
                let concepts: Vec<&str> = b.concepts_of(name).into_iter().map(|c| b.label(c)).collect();
                let label = b.label(name);
                let head = if label == name {
                    name.clone()
                } else {
                    format!("{label} ({name})")
                };
                if concepts.is_empty() {
                    format!("{head}: untyped.")
                } else if b.is_context_entity(name) {
                    format!("{head}: {}, known from the context.", concepts.join(", "))
                } else {
                    format!("{head}: {}.", concepts.join(", "))
                }
            }
            ElementRef::Concept(c) => {
                let concept = b.ontology.concept(c).expect("concept exists");
                match &concept.parent {
                    Some(p) => format!("{} is a kind of {}.", capitalize(b.label(c)), b.label(p)),
                    None => format!("{} is a top-level concept.", capitalize(b.label(c))),
                }
            }
            ElementRef::Source(id) => {
                let src = b.source(id).expect("source exists");
                let mut s = src.title.clone();
                if !src.citation.is_empty() {
                    let _ = write!(s, ". {}", src.citation);
                }
                if let Some(u) = &src.uri {
                    let _ = write!(s, " <{u}>");
                }
                if let Some(e) = &src.excerpt {
                    let _ = write!(s, "\n\"{e}\"");
                }
                s
            }
            ElementRef::Ground(k) => {
                let g = &b.ground[k];
                format!("Original {} of {k}:\n{}", g.format, g.text)
            }
            ElementRef::Counterfactual(_) => String::new(),
        }
    }

    fn render_defeat(&self, def: &crate::reasoner::Defeat) -> String {
        let name = self.rule_name(&def.rule);
        match def.reason {
            DefeatReason::InapplicableAntecedent => format!("{} does not apply.", capitalize(&name)),
            DefeatReason::BeatenBySuperiority => {
                let mut s = format!("{} is overridden", capitalize(&name));
                if let Some(by) = &def.by {
                    let _ = write!(s, " by {}", self.rule_name(by));
                }
                if let Some(a) = &def.annotation {
                    let _ = write!(s, " ({a})");
                }
                s.push('.');
                s
            }
            DefeatReason::OverriddenByDefiniteConclusion => {
                format!("{} cannot override a definite conclusion.", capitalize(&name))
            }
        }
    }

    fn render_overview(&self) -> String {
        let o = &self.bundle.overview;
        let mut s = format!("Explanation {}", o.mode);
        if let Some(d) = &o.decision {
            let _ = write!(s, " of the decision {}", self.literal_name(d));
        }
        s.push('.');
        let fields = [
            ("Language", &o.language),
            ("Representation", &o.representation),
            ("Jurisdiction", &o.jurisdiction),
            ("Pipeline", &o.pipeline),
            ("Training data", &o.training_data),
            ("Consequences", &o.consequences),
        ];
        for (name, value) in fields {
            if let Some(v) = value {
                let _ = write!(s, " {name}: {v}.");
            }
        }
        if o.mode == Mode::ExPost && !o.runtime_context.is_empty() {
            let ctx: Vec<String> = o
                .runtime_context
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            let _ = write!(s, " Context: {}.", ctx.join(", "));
        }
        s
    }

    fn render_justification(&self) -> String {
        let b = self.bundle;
        let d = self.derivation;
        let Some(decision) = &b.overview.decision else {
            return "No decision is declared.".to_string();
        };
        let Some(decided) = self.decided_literal() else {
            return format!(
                "The decision {} is not reached: neither it nor its complement is established.",
                self.literal_name(decision)
            );
        };
        let mut s = if decided == decision {
            format!("The decision {} holds.", self.literal_name(decision))
        } else {
            format!(
                "The decision {} does not hold; {} is established instead.",
                self.literal_name(decision),
                decided
            )
        };
        if let Some(j) = d.justifications.get(decided) {
            if let Support::Rule(r) = &j.winning_rule {
                let _ = write!(s, " It follows from {}", self.rule_name(r));
                if !j.supporting_facts.is_empty() {
                    let _ = write!(s, " given {}", literal_list(&j.supporting_facts));
                }
                s.push('.');
            }
        }
        let contested = d.contested_ancestry(decided);
        if let Some(j) = contested.first() {
            if let Some(w) = d.deciding_rule(decided) {
                let _ = write!(
                    s,
                    " The case turns on {}: {} applies",
                    j.conclusion,
                    self.rule_name(w)
                );
                for (winner, loser) in &j.superiority_used {
                    if winner != w {
                        continue;
                    }
                    let _ = write!(s, " and prevails over {}", self.rule_name(loser));
                    if let Some(a) = b
                        .theory()
                        .superiority_pair(winner, loser)
                        .and_then(|p| p.annotation.as_ref())
                    {
                        let _ = write!(s, " ({a})");
                    }
                }
                s.push('.');
            }
        }
        s
    }

    pub(super) fn render_counterfactual(&self, r: &CounterfactualResult) -> String {
        let changes: Vec<String> = r
            .mutations
            .iter()
            .map(|m| format!("{} from {} to {}", m.attribute, m.old, m.new))
            .collect();
        let mut s = format!("What if {}?", changes.join(" and "));
        if let Some(dec) = &r.decision {
            if r.decision_changed {
                let _ = write!(
                    s,
                    " The decision {} changes from {} to {}.",
                    dec.literal,
                    dec.before.defeasible_tag().symbol(),
                    dec.after.defeasible_tag().symbol()
                );
            } else {
                let _ = write!(
                    s,
                    " The decision {} stays {}.",
                    dec.literal,
                    dec.after.defeasible_tag().symbol()
                );
            }
        }
        if r.diff.is_empty() {
            s.push_str(" Nothing else changes.");
            return s;
        }
        for f in &r.diff.flipped {
            let _ = write!(s, " {}: {} -> {}.", f.literal, f.before.symbol(), f.after.symbol());
        }
        if !r.diff.newly_fired.is_empty() {
            let _ = write!(s, " Now fired: {}.", r.diff.newly_fired.join(", "));
        }
        if !r.diff.no_longer_fired.is_empty() {
            let _ = write!(s, " No longer fired: {}.", r.diff.no_longer_fired.join(", "));
        }
        s
    }
}
