//! Brute-force reference for the defeasible proof conditions, plus a random
//! acyclic theory generator. Test support only.
//!
//! Each of the four tags is evaluated straight from its own proof condition
//! by recursion over the literals, with no shared tables and no ordering
//! pass. Team defeat is checked by enumerating subsets of applicable
//! supporting rules. The result is compared against [`crate::reasoner::derive`].

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use rand::Rng;

use crate::literal::Literal;
use crate::model::{Rule, RuleKind, Superiority, Theory};
use crate::reasoner::Conclusion;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Tag {
    PlusDelta,
    MinusDelta,
    PlusPartial,
    MinusPartial,
}

pub struct Oracle<'a> {
    theory: &'a Theory,
    facts: &'a BTreeSet<Literal>,
    memo: RefCell<HashMap<(Tag, Literal), bool>>,
}

/// Tags from the oracle: `(+Δ, −Δ, +∂, −∂)` per literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleTags {
    pub plus_delta: bool,
    pub minus_delta: bool,
    pub plus_partial: bool,
    pub minus_partial: bool,
}

impl OracleTags {
    /// Exactly one tag of each pair holds.
    pub fn is_coherent(&self) -> bool {
        self.plus_delta != self.minus_delta && self.plus_partial != self.minus_partial
    }

    pub fn matches(&self, c: Conclusion) -> bool {
        self.is_coherent() && self.plus_delta == c.definite && self.plus_partial == c.defeasible
    }
}

impl<'a> Oracle<'a> {
    pub fn new(theory: &'a Theory, facts: &'a BTreeSet<Literal>) -> Self {
        Oracle {
            theory,
            facts,
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn tags(&self, q: &Literal) -> OracleTags {
        OracleTags {
            plus_delta: self.eval(Tag::PlusDelta, q),
            minus_delta: self.eval(Tag::MinusDelta, q),
            plus_partial: self.eval(Tag::PlusPartial, q),
            minus_partial: self.eval(Tag::MinusPartial, q),
        }
    }

    fn rules_for<'b>(&'b self, q: &'b Literal) -> impl Iterator<Item = &'a Rule> + 'b {
        self.theory.rules.iter().filter(move |r| &r.consequent == q)
    }

    fn superior(&self, t: &Rule, s: &Rule) -> bool {
        self.theory
            .superiority
            .iter()
            .any(|p| p.winner == t.id && p.loser == s.id)
    }

    fn eval(&self, tag: Tag, q: &Literal) -> bool {
        let key = (tag, q.clone());
        if let Some(v) = self.memo.borrow().get(&key) {
            return *v;
        }
        let v = match tag {
            Tag::PlusDelta => self.plus_delta(q),
            Tag::MinusDelta => self.minus_delta(q),
            Tag::PlusPartial => self.plus_partial(q),
            Tag::MinusPartial => self.minus_partial(q),
        };
        self.memo.borrow_mut().insert(key, v);
        v
    }

    fn all(&self, tag: Tag, rule: &Rule) -> bool {
        rule.antecedents.iter().all(|a| self.eval(tag, a))
    }

    fn any(&self, tag: Tag, rule: &Rule) -> bool {
        rule.antecedents.iter().any(|a| self.eval(tag, a))
    }

    // +Δq: q ∈ F, or some strict rule for q has every antecedent +Δ.
    fn plus_delta(&self, q: &Literal) -> bool {
        self.facts.contains(q)
            || self
                .rules_for(q)
                .any(|r| r.kind == RuleKind::Strict && self.all(Tag::PlusDelta, r))
    }

    // −Δq: q ∉ F, and every strict rule for q has an antecedent −Δ.
    fn minus_delta(&self, q: &Literal) -> bool {
        !self.facts.contains(q)
            && self
                .rules_for(q)
                .filter(|r| r.kind == RuleKind::Strict)
                .all(|r| self.any(Tag::MinusDelta, r))
    }

    // +∂q: +Δq, or
    //   some strict/defeasible rule for q has every antecedent +∂, and
    //   −Δ~q, and
    //   some team T of applicable strict/defeasible rules for q beats every
    //   rule s for ~q that is not discarded (an antecedent −∂).
    fn plus_partial(&self, q: &Literal) -> bool {
        if self.eval(Tag::PlusDelta, q) {
            return true;
        }
        let nq = q.complement();
        if !self.eval(Tag::MinusDelta, &nq) {
            return false;
        }
        let team_pool: Vec<&Rule> = self
            .rules_for(q)
            .filter(|r| r.kind.supports() && self.all(Tag::PlusPartial, r))
            .collect();
        if team_pool.is_empty() {
            return false;
        }
        let attackers: Vec<&Rule> = self
            .rules_for(&nq)
            .filter(|s| !self.any(Tag::MinusPartial, s))
            .collect();
        // enumerate every nonempty team
        let n = team_pool.len();
        (1u32..(1u32 << n)).any(|mask| {
            let team: Vec<&Rule> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| team_pool[i])
                .collect();
            attackers
                .iter()
                .all(|s| team.iter().any(|t| self.superior(t, s)))
        })
    }

    // −∂q: −Δq, and one of
    //   every strict/defeasible rule for q has an antecedent −∂;
    //   +Δ~q;
    //   some rule s for ~q has every antecedent +∂ and no strict/defeasible
    //   rule t for q both has every antecedent +∂ and is superior to s.
    fn minus_partial(&self, q: &Literal) -> bool {
        if !self.eval(Tag::MinusDelta, q) {
            return false;
        }
        let nq = q.complement();
        let unsupported = self
            .rules_for(q)
            .filter(|r| r.kind.supports())
            .all(|r| self.any(Tag::MinusPartial, r));
        if unsupported || self.eval(Tag::PlusDelta, &nq) {
            return true;
        }
        let undefeated_attacker = self.rules_for(&nq).any(|s| {
            self.all(Tag::PlusPartial, s)
                && self.rules_for(q).filter(|t| t.kind.supports()).all(|t| {
                    self.any(Tag::MinusPartial, t) || !self.superior(t, s)
                })
        });
        undefeated_attacker
    }
}

/// Every literal the theory and facts mention, with complements.
pub fn literal_universe(theory: &Theory, facts: &BTreeSet<Literal>) -> BTreeSet<Literal> {
    theory
        .literals()
        .into_iter()
        .chain(facts.iter().cloned())
        .flat_map(|l| [l.complement(), l])
        .collect()
}

/// A random acyclic propositional theory over `a0..a{n-1}` with at most
/// `max_atoms` atoms, `max_rules` rules and `max_pairs` superiority pairs.
/// Antecedents always use lower-numbered atoms than the head.
pub fn random_theory<R: Rng>(
    rng: &mut R,
    max_atoms: usize,
    max_rules: usize,
    max_pairs: usize,
) -> (Theory, BTreeSet<Literal>) {
    let atoms = rng.random_range(1..=max_atoms);
    let atom = |i: usize, neg: bool| {
        let l = Literal::new(format!("a{i}"), vec![]);
        if neg {
            l.complement()
        } else {
            l
        }
    };
    let rule_count = rng.random_range(0..=max_rules);
    let mut rules = Vec::with_capacity(rule_count);
    for i in 0..rule_count {
        let head = rng.random_range(0..atoms);
        let mut ante: Vec<Literal> = Vec::new();
        if head > 0 {
            let k = rng.random_range(0..=head.min(3));
            let mut used = BTreeSet::new();
            for _ in 0..k {
                let a = rng.random_range(0..head);
                if used.insert(a) {
                    ante.push(atom(a, rng.random_bool(0.3)));
                }
            }
        }
        let kind = match rng.random_range(0..10) {
            0..=1 => RuleKind::Strict,
            2..=7 => RuleKind::Defeasible,
            _ => RuleKind::Defeater,
        };
        rules.push(Rule::new(format!("r{i}"), kind, ante, atom(head, rng.random_bool(0.4))));
    }

    let mut conflicts: Vec<(usize, usize)> = Vec::new();
    for (i, r) in rules.iter().enumerate() {
        for (j, s) in rules.iter().enumerate() {
            if i != j && r.consequent.complement() == s.consequent {
                conflicts.push((i, j));
            }
        }
    }
    let mut superiority: Vec<Superiority> = Vec::new();
    let pairs = rng.random_range(0..=max_pairs);
    for _ in 0..pairs {
        if conflicts.is_empty() {
            break;
        }
        let (i, j) = conflicts.swap_remove(rng.random_range(0..conflicts.len()));
        conflicts.retain(|&(a, b)| !(a == j && b == i));
        superiority.push(Superiority {
            winner: rules[i].id.clone(),
            loser: rules[j].id.clone(),
            annotation: None,
        });
    }

    let mut facts = BTreeSet::new();
    for i in 0..atoms {
        if rng.random_bool(0.3) {
            facts.insert(atom(i, rng.random_bool(0.3)));
        }
        if rng.random_bool(0.03) {
            facts.insert(atom(i, true));
            facts.insert(atom(i, false));
        }
    }
    (Theory { rules, superiority }, facts)
}
