use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::element::{ElementRef, Stage, SubjectKind};
use super::{
    ActionKind, CandidateAction, EsError, Explanans, HeuristicOrder, InfoNode, Interaction,
    NodeDetail, Scores,
};
use crate::counterfactual::whatif;
use crate::literal::Literal;
use crate::model::{ExplanandumBundle, Mode};
use crate::narrative::ArgumentTarget;
use crate::reasoner::{Derivation, Support};

/// Relevance of elements with no link path from the incipit.
pub const UNREACHABLE: u32 = u32::MAX;

static EMPTY_DERIVATION: Derivation = Derivation {
    conclusions: BTreeMap::new(),
    causal_chain: Vec::new(),
    justifications: BTreeMap::new(),
};

#[derive(Debug, Clone)]
pub(super) struct ElementInfo {
    pub kind: SubjectKind,
    pub links: Vec<ElementRef>,
}

/// The element-link graph of one (bundle, derivation) pair, with relevance
/// precomputed. Candidates and transitions are computed on demand; the full
/// space of explanans is never materialised.
pub struct ExplanatorySpace<'a> {
    pub(super) bundle: &'a ExplanandumBundle,
    pub(super) derivation: &'a Derivation,
    pub(super) elements: BTreeMap<ElementRef, ElementInfo>,
    relevance: BTreeMap<ElementRef, u32>,
    order: HeuristicOrder,
}

fn push_unique(out: &mut Vec<ElementRef>, e: ElementRef) {
    if !out.contains(&e) {
        out.push(e);
    }
}

impl<'a> ExplanatorySpace<'a> {
    pub fn new(bundle: &'a ExplanandumBundle, derivation: &'a Derivation) -> Self {
        Self::with_order(bundle, derivation, HeuristicOrder::default())
    }

    pub fn with_order(bundle: &'a ExplanandumBundle, derivation: &'a Derivation, order: HeuristicOrder) -> Self {
        let mut space = ExplanatorySpace {
            bundle,
            derivation,
            elements: BTreeMap::new(),
            relevance: BTreeMap::new(),
            order,
        };
        space.build_graph();
        space.relevance = space.compute_relevance();
        space
    }

    pub fn order(&self) -> HeuristicOrder {
        self.order
    }

    pub fn mode(&self) -> Mode {
        self.bundle.overview.mode
    }

    /// The literal the incipit justifies: the declared decision if derived,
    /// else its complement if that is derived.
    pub(super) fn decided_literal(&self) -> Option<&'a Literal> {
        let d = self.bundle.overview.decision.as_ref()?;
        let nd = d.complement();
        if self.derivation.is_provable(d) {
            return Some(d);
        }
        self.derivation
            .conclusions
            .get_key_value(&nd)
            .filter(|(_, c)| c.defeasible)
            .map(|(l, _)| l)
    }

    fn conclusion_elements(&self) -> Vec<&'a Literal> {
        // chain order first, then any remaining rule-supported literal
        let mut out: Vec<&Literal> = Vec::new();
        for f in &self.derivation.causal_chain {
            if let Some((l, _)) = self.derivation.justifications.get_key_value(&f.consequent) {
                if !out.contains(&l) {
                    out.push(l);
                }
            }
        }
        for (l, j) in &self.derivation.justifications {
            if matches!(j.winning_rule, Support::Rule(_)) && !out.contains(&l) {
                out.push(l);
            }
        }
        out
    }

    fn entity_elements(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut direct = BTreeSet::new();
        let mut all = BTreeSet::new();
        for p in self.bundle.premises() {
            for e in p.asserted().entities() {
                direct.insert(e.to_string());
            }
        }
        for l in self.conclusion_elements() {
            for e in l.entities() {
                direct.insert(e.to_string());
            }
        }
        for r in &self.bundle.theory().rules {
            let fired = self.derivation.has_fired(&r.id);
            for l in r.antecedents.iter().chain(std::iter::once(&r.consequent)) {
                for e in l.entities() {
                    all.insert(e.to_string());
                    if fired {
                        direct.insert(e.to_string());
                    }
                }
            }
        }
        all.extend(direct.iter().cloned());
        all.extend(self.bundle.context.entities.keys().cloned());
        (direct, all)
    }

    /// Maps an antecedent or consequent literal to the element standing for it.
    fn literal_element(&self, lit: &Literal) -> Option<ElementRef> {
        let attribute = lit.attribute();
        if let Some(p) = self.bundle.premise_for(&attribute) {
            return Some(ElementRef::Premise(p.id.clone()));
        }
        let c = ElementRef::Conclusion(lit.clone());
        self.elements.contains_key(&c).then_some(c)
    }

    fn typed_element(&self, key: &str, entities: &BTreeSet<String>) -> Option<ElementRef> {
        if self.bundle.rule(key).is_some() {
            Some(ElementRef::Rule(key.to_string()))
        } else if self.bundle.source(key).is_some() {
            Some(ElementRef::Source(key.to_string()))
        } else if self.bundle.premise(key).is_some() {
            Some(ElementRef::Premise(key.to_string()))
        } else if entities.contains(key) {
            Some(ElementRef::Entity(key.to_string()))
        } else {
            None
        }
    }

    fn build_graph(&mut self) {
        let b = self.bundle;
        let d = self.derivation;
        let mut el: BTreeMap<ElementRef, ElementInfo> = BTreeMap::new();
        let info = |kind| ElementInfo { kind, links: Vec::new() };

        el.insert(ElementRef::Purpose, info(SubjectKind::Purpose));
        el.insert(ElementRef::Overview, info(SubjectKind::Overview));
        if b.overview.mode == Mode::ExPost {
            el.insert(ElementRef::Justification, info(SubjectKind::Justification));
        }
        el.insert(ElementRef::Hint, info(SubjectKind::Hint));

        let conclusions = self.conclusion_elements();
        for l in &conclusions {
            el.insert(ElementRef::Conclusion((*l).clone()), info(SubjectKind::Conclusion));
        }
        let mut rebuttal_winners: BTreeSet<&str> = BTreeSet::new();
        for j in d.justifications.values() {
            for (w, _) in &j.superiority_used {
                rebuttal_winners.insert(w);
            }
        }
        for r in &b.theory().rules {
            let kind = if d.has_fired(&r.id) {
                SubjectKind::FiredRule
            } else {
                SubjectKind::UnfiredRule
            };
            el.insert(ElementRef::Rule(r.id.clone()), info(kind));
        }
        for w in &rebuttal_winners {
            el.insert(ElementRef::Rebuttal(w.to_string()), info(SubjectKind::Rebuttal));
        }
        for p in b.premises() {
            el.insert(ElementRef::Premise(p.id.clone()), info(SubjectKind::Premise));
        }
        let (direct, entities) = self.entity_elements();
        for e in &entities {
            let kind = if direct.contains(e) {
                SubjectKind::DirectEntity
            } else {
                SubjectKind::ContextEntity
            };
            el.insert(ElementRef::Entity(e.clone()), info(kind));
        }
        for c in &b.ontology.concepts {
            el.insert(ElementRef::Concept(c.id.clone()), info(SubjectKind::Concept));
        }
        for s in &b.sources {
            el.insert(ElementRef::Source(s.id.clone()), info(SubjectKind::SourceDocument));
        }
        for k in b.ground.keys() {
            el.insert(ElementRef::Ground(k.clone()), info(SubjectKind::GroundFragment));
        }
        self.elements = el;

        // links
        let keys: Vec<ElementRef> = self.elements.keys().cloned().collect();
        for e in keys {
            let links = self.links_of(&e, &conclusions, &entities);
            self.elements.get_mut(&e).expect("element exists").links = links;
        }
    }

    fn links_of(&self, e: &ElementRef, conclusions: &[&Literal], entities: &BTreeSet<String>) -> Vec<ElementRef> {
        let b = self.bundle;
        let d = self.derivation;
        let mut out = Vec::new();
        let entity_links = |out: &mut Vec<ElementRef>, lit: &Literal| {
            for name in lit.entities() {
                if entities.contains(name) {
                    push_unique(out, ElementRef::Entity(name.to_string()));
                }
            }
        };
        match e {
            ElementRef::Purpose | ElementRef::Source(_) | ElementRef::Ground(_) | ElementRef::Counterfactual(_) => {}
            ElementRef::Overview => {
                for c in b.ontology.roots() {
                    push_unique(&mut out, ElementRef::Concept(c.id.clone()));
                }
            }
            ElementRef::Justification => {
                if let Some(decided) = self.decided_literal() {
                    push_unique(&mut out, ElementRef::Conclusion(decided.clone()));
                }
                for l in conclusions {
                    push_unique(&mut out, ElementRef::Conclusion((*l).clone()));
                }
                for f in &d.causal_chain {
                    push_unique(&mut out, ElementRef::Rule(f.rule.clone()));
                }
                for p in b.premises() {
                    push_unique(&mut out, ElementRef::Premise(p.id.clone()));
                }
                if let Some(decided) = self.decided_literal() {
                    entity_links(&mut out, decided);
                }
            }
            ElementRef::Hint => {
                for p in b.premises() {
                    push_unique(&mut out, ElementRef::Premise(p.id.clone()));
                }
            }
            ElementRef::Conclusion(l) => {
                if let Some(w) = d.justifications.get(l).and_then(|j| j.winning_rule.rule_id()) {
                    push_unique(&mut out, ElementRef::Rule(w.to_string()));
                }
                let nl = l.complement();
                for r in &b.theory().rules {
                    if r.consequent == *l || r.consequent == nl {
                        push_unique(&mut out, ElementRef::Rule(r.id.clone()));
                    }
                }
                entity_links(&mut out, l);
            }
            ElementRef::Rule(id) => {
                let r = b.rule(id).expect("rule element exists");
                let head = ElementRef::Conclusion(r.consequent.clone());
                if self.elements.contains_key(&head) {
                    push_unique(&mut out, head);
                }
                for a in &r.antecedents {
                    if let Some(x) = self.literal_element(a) {
                        push_unique(&mut out, x);
                    }
                }
                let rebuttal = ElementRef::Rebuttal(id.clone());
                if self.elements.contains_key(&rebuttal) {
                    push_unique(&mut out, rebuttal);
                }
                for j in d.justifications.values() {
                    for (w, l) in &j.superiority_used {
                        if w == id {
                            push_unique(&mut out, ElementRef::Rule(l.clone()));
                        } else if l == id {
                            push_unique(&mut out, ElementRef::Rule(w.clone()));
                        }
                    }
                }
                entity_links(&mut out, &r.consequent);
                for a in &r.antecedents {
                    entity_links(&mut out, a);
                }
                for c in b.concepts_of(id) {
                    push_unique(&mut out, ElementRef::Concept(c.to_string()));
                }
            }
            ElementRef::Rebuttal(w) => {
                push_unique(&mut out, ElementRef::Rule(w.clone()));
                for j in d.justifications.values() {
                    for (winner, loser) in &j.superiority_used {
                        if winner == w {
                            push_unique(&mut out, ElementRef::Rule(loser.clone()));
                        }
                    }
                }
            }
            ElementRef::Premise(id) => {
                let p = b.premise(id).expect("premise element exists");
                entity_links(&mut out, &p.asserted());
                for r in &b.theory().rules {
                    if r.antecedents.iter().any(|a| a.attribute() == p.attribute) {
                        push_unique(&mut out, ElementRef::Rule(r.id.clone()));
                    }
                }
            }
            ElementRef::Entity(name) => {
                for c in b.concepts_of(name) {
                    push_unique(&mut out, ElementRef::Concept(c.to_string()));
                }
            }
            ElementRef::Concept(c) => {
                for child in b.ontology.children(c) {
                    push_unique(&mut out, ElementRef::Concept(child.id.clone()));
                }
                for map in [&b.ontology.entities, &b.context.entities] {
                    for (key, cs) in map {
                        if cs.iter().any(|x| x == c) {
                            if let Some(x) = self.typed_element(key, entities) {
                                push_unique(&mut out, x);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn seeds(&self) -> Vec<ElementRef> {
        let mut seeds: Vec<ElementRef> = self
            .elements
            .keys()
            .filter(|e| e.is_incipit())
            .cloned()
            .collect();
        let anchor = if self.elements.contains_key(&ElementRef::Justification) {
            ElementRef::Justification
        } else {
            ElementRef::Overview
        };
        seeds.extend(self.elements[&anchor].links.iter().cloned());
        seeds
    }

    fn compute_relevance(&self) -> BTreeMap<ElementRef, u32> {
        let mut dist: BTreeMap<ElementRef, u32> = BTreeMap::new();
        let mut queue = VecDeque::new();
        for s in self.seeds() {
            if !dist.contains_key(&s) {
                dist.insert(s.clone(), 0);
                queue.push_back(s);
            }
        }
        while let Some(e) = queue.pop_front() {
            let next = dist[&e] + 1;
            if let Some(info) = self.elements.get(&e) {
                for l in &info.links {
                    if !dist.contains_key(l) {
                        dist.insert(l.clone(), next);
                        queue.push_back(l.clone());
                    }
                }
            }
        }
        dist
    }

    /// Shortest link distance from the incipit's justification (or overview).
    pub fn relevance(&self, element: &ElementRef) -> u32 {
        self.relevance.get(element).copied().unwrap_or(UNREACHABLE)
    }

    /// Taxonomy depth of the most abstract concept typing the element.
    pub fn abstraction(&self, element: &ElementRef) -> u32 {
        let b = self.bundle;
        if let ElementRef::Concept(c) = element {
            return b.abstraction_depth(c).map(|d| d as u32).unwrap_or(0);
        }
        let key = match element {
            ElementRef::Conclusion(l) => l.atom.clone(),
            ElementRef::Premise(id) => {
                if b.concepts_of(id).is_empty() {
                    b.premise(id).map(|p| p.attribute.atom.clone()).unwrap_or_default()
                } else {
                    id.clone()
                }
            }
            other => other.key(),
        };
        b.concepts_of(&key)
            .into_iter()
            .filter_map(|c| b.abstraction_depth(c).ok())
            .min()
            .unwrap_or(0) as u32
    }

    pub fn kind_of(&self, element: &ElementRef) -> Option<SubjectKind> {
        match element {
            ElementRef::Counterfactual(_) => Some(SubjectKind::WhatIfResult),
            other => self.elements.get(other).map(|i| i.kind),
        }
    }

    pub fn links(&self, element: &ElementRef) -> &[ElementRef] {
        self.elements
            .get(element)
            .map(|i| i.links.as_slice())
            .unwrap_or(&[])
    }

    pub fn elements(&self) -> impl Iterator<Item = &ElementRef> {
        self.elements.keys()
    }

    /// Ground key of an element with a stored raw fragment.
    pub(super) fn ground_key(&self, element: &ElementRef) -> Option<String> {
        let key = match element {
            ElementRef::Rule(_) | ElementRef::Premise(_) | ElementRef::Conclusion(_) => element.key(),
            _ => return None,
        };
        self.bundle.ground.contains_key(&key).then_some(key)
    }

    pub(super) fn source_refs(&self, element: &ElementRef) -> Vec<String> {
        let b = self.bundle;
        let d = self.derivation;
        let mut out: Vec<String> = Vec::new();
        let mut add = |refs: &[String]| {
            for r in refs {
                if !out.contains(r) {
                    out.push(r.clone());
                }
            }
        };
        match element {
            ElementRef::Rule(id) => add(&b.rule(id).map(|r| r.source_refs.clone()).unwrap_or_default()),
            ElementRef::Premise(id) => add(&b.premise(id).map(|p| p.source_refs.clone()).unwrap_or_default()),
            ElementRef::Justification => {
                for f in &d.causal_chain {
                    if let Some(r) = b.rule(&f.rule) {
                        add(&r.source_refs);
                    }
                }
            }
            ElementRef::Conclusion(l) => {
                for f in d.causal_chain.iter().filter(|f| &f.consequent == l) {
                    if let Some(r) = b.rule(&f.rule) {
                        add(&r.source_refs);
                    }
                }
            }
            ElementRef::Rebuttal(w) => {
                for e in self.links(element) {
                    if let ElementRef::Rule(id) = e {
                        if let Some(r) = b.rule(id) {
                            add(&r.source_refs);
                        }
                    }
                }
                let _ = w;
            }
            _ => {}
        }
        out
    }

    pub(super) fn node_for(&self, subject: &ElementRef) -> InfoNode {
        let kind = self.kind_of(subject).expect("subject is an element of the space");
        let rendering = self.render(subject);
        let detail = match subject {
            ElementRef::Ground(k) => self.bundle.ground.get(k).map(|g| NodeDetail::Ground {
                fragment: g.clone(),
            }),
            _ => None,
        };
        InfoNode::new(subject.clone(), kind, rendering, self.links(subject).to_vec(), detail)
    }

    /// The incipit: purpose, overview, (ex-post) justification, hint.
    pub fn initial_explanans(&self) -> Explanans {
        let mut subjects = vec![ElementRef::Purpose, ElementRef::Overview];
        if self.mode() == Mode::ExPost {
            subjects.push(ElementRef::Justification);
        }
        subjects.push(ElementRef::Hint);
        let nodes: Vec<InfoNode> = subjects.iter().map(|s| self.node_for(s)).collect();
        Explanans {
            provenance: vec![None; nodes.len()],
            nodes,
            interactions: Vec::new(),
        }
    }

    /// Subjects an Expand/Ground/Source on `node` would append.
    fn appended(&self, explanans: &Explanans, node: &InfoNode, action: ActionKind) -> Result<Vec<ElementRef>, EsError> {
        let fresh = |subjects: Vec<ElementRef>| -> Vec<ElementRef> {
            subjects.into_iter().filter(|s| !explanans.contains(s)).collect()
        };
        match action {
            ActionKind::Expand => {
                let new = fresh(node.links.clone());
                if new.is_empty() {
                    return Err(EsError::NothingToExpand(node.id.clone()));
                }
                Ok(new)
            }
            ActionKind::Ground => {
                let key = self.ground_key(&node.subject).ok_or_else(|| EsError::NotApplicable {
                    target: node.id.clone(),
                    what: "ground fragment",
                })?;
                let new = fresh(vec![ElementRef::Ground(key)]);
                if new.is_empty() {
                    return Err(EsError::AlreadyShown {
                        action,
                        target: node.id.clone(),
                    });
                }
                Ok(new)
            }
            ActionKind::Source => {
                let refs = self.source_refs(&node.subject);
                if refs.is_empty() {
                    return Err(EsError::NotApplicable {
                        target: node.id.clone(),
                        what: "sources",
                    });
                }
                let new = fresh(refs.into_iter().map(ElementRef::Source).collect());
                if new.is_empty() {
                    return Err(EsError::AlreadyShown {
                        action,
                        target: node.id.clone(),
                    });
                }
                Ok(new)
            }
            ActionKind::Mark | ActionKind::WhatIf => Ok(Vec::new()),
        }
    }

    /// Applies one interaction; the input explanans is left untouched.
    pub fn step(&self, explanans: &Explanans, interaction: &Interaction) -> Result<Explanans, EsError> {
        let target_node = match interaction.target() {
            Some(t) => Some(
                explanans
                    .node(t)
                    .ok_or_else(|| EsError::UnknownTarget(t.to_string()))?,
            ),
            None => None,
        };
        let index = explanans.interactions.len();
        let mut next = explanans.clone();
        let append = |next: &mut Explanans, nodes: Vec<InfoNode>| {
            for n in nodes {
                next.nodes.push(n);
                next.provenance.push(Some(index));
            }
        };
        match interaction {
            Interaction::Expand { .. } | Interaction::Ground { .. } | Interaction::Source { .. } => {
                let node = target_node.expect("target resolved");
                let subjects = self.appended(explanans, node, interaction.kind())?;
                let nodes = subjects.iter().map(|s| self.node_for(s)).collect();
                append(&mut next, nodes);
            }
            Interaction::Mark {
                claim,
                argument_target,
                ..
            } => {
                if claim.trim().is_empty() {
                    return Err(EsError::MalformedArguments("empty claim".into()));
                }
                if let ArgumentTarget::Argument(a) = argument_target {
                    let marks = explanans
                        .interactions
                        .iter()
                        .filter(|i| i.kind() == ActionKind::Mark)
                        .count();
                    let known = a
                        .strip_prefix('a')
                        .and_then(|n| n.parse::<usize>().ok())
                        .is_some_and(|n| n >= 1 && n <= marks);
                    if !known {
                        return Err(EsError::MalformedArguments(format!("unknown argument `{a}`")));
                    }
                }
            }
            Interaction::WhatIf { mutations, .. } => {
                if mutations.is_empty() {
                    return Err(EsError::MalformedArguments("what-if needs at least one mutation".into()));
                }
                let result = whatif(self.bundle, self.derivation, mutations)?;
                let subject = ElementRef::Counterfactual(explanans.counterfactual_count() + 1);
                let rendering = self.render_counterfactual(&result);
                let node = InfoNode::new(
                    subject,
                    SubjectKind::WhatIfResult,
                    rendering,
                    Vec::new(),
                    Some(NodeDetail::Counterfactual {
                        result: Box::new(result),
                    }),
                );
                append(&mut next, vec![node]);
            }
        }
        next.interactions.push(interaction.clone());
        Ok(next)
    }

    /// Every legal Expand/Ground/Source on the current nodes, best first.
    pub fn available_actions(&self, explanans: &Explanans) -> Vec<CandidateAction> {
        let mut out = Vec::new();
        for node in &explanans.nodes {
            for action in [ActionKind::Expand, ActionKind::Ground, ActionKind::Source] {
                let Ok(subjects) = self.appended(explanans, node, action) else {
                    continue;
                };
                let simplicity = subjects
                    .iter()
                    .map(|s| self.node_for(s).complexity_weight)
                    .sum();
                let target = node.id.clone();
                let interaction = match action {
                    ActionKind::Expand => Interaction::Expand { target },
                    ActionKind::Ground => Interaction::Ground { target },
                    _ => Interaction::Source { target },
                };
                out.push(CandidateAction {
                    interaction,
                    scores: Scores {
                        relevance: self.relevance(&node.subject),
                        abstraction: self.abstraction(&node.subject),
                        simplicity,
                    },
                    stage: node.stage,
                    appends: subjects.iter().map(|s| s.to_string()).collect(),
                });
            }
        }
        out.sort_by(|a, b| self.compare(a, b));
        out
    }

    pub fn compare(&self, a: &CandidateAction, b: &CandidateAction) -> std::cmp::Ordering {
        self.order
            .key(&a.scores)
            .cmp(&self.order.key(&b.scores))
            .then(a.stage.cmp(&b.stage))
            .then_with(|| a.interaction.target().cmp(&b.interaction.target()))
            .then(a.interaction.kind().cmp(&b.interaction.kind()))
    }
}

/// Builds E_0. Ex-post bundles need the derivation for the justification.
pub fn initial_explanans(bundle: &ExplanandumBundle, derivation: Option<&Derivation>) -> Result<Explanans, EsError> {
    let derivation = match (bundle.overview.mode, derivation) {
        (_, Some(d)) => d,
        (Mode::ExAnte, None) => &EMPTY_DERIVATION,
        (Mode::ExPost, None) => return Err(EsError::MissingDerivation),
    };
    Ok(ExplanatorySpace::new(bundle, derivation).initial_explanans())
}

pub fn step(
    bundle: &ExplanandumBundle,
    derivation: &Derivation,
    explanans: &Explanans,
    interaction: &Interaction,
) -> Result<Explanans, EsError> {
    ExplanatorySpace::new(bundle, derivation).step(explanans, interaction)
}

pub fn available_actions(bundle: &ExplanandumBundle, derivation: &Derivation, explanans: &Explanans) -> Vec<CandidateAction> {
    ExplanatorySpace::new(bundle, derivation).available_actions(explanans)
}

pub fn relevance_score(bundle: &ExplanandumBundle, derivation: &Derivation, element: &ElementRef) -> u32 {
    ExplanatorySpace::new(bundle, derivation).relevance(element)
}

impl Stage {
    pub fn index(self) -> usize {
        Stage::ALL.iter().position(|s| *s == self).expect("stage is listed")
    }
}
