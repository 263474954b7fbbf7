use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sagex_core::literal::Literal;
use sagex_core::model::{Rule, RuleKind, Superiority, Theory};
use sagex_core::oracle::{literal_universe, random_theory, Oracle};
use sagex_core::reasoner::{derive, ReasonerError};

fn lit(s: &str) -> Literal {
    s.parse().unwrap()
}

fn check_against_oracle(theory: &Theory, facts: &BTreeSet<Literal>) -> Result<(), String> {
    let d = derive(theory, facts).map_err(|e| e.to_string())?;
    let oracle = Oracle::new(theory, facts);
    for q in literal_universe(theory, facts) {
        let tags = oracle.tags(&q);
        let got = d.conclusion(&q);
        if !tags.matches(got) {
            return Err(format!("{q}: reasoner {got:?}, oracle {tags:?}\n{theory:?}\nfacts {facts:?}"));
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn derive_matches_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (theory, facts) = random_theory(&mut rng, 8, 12, 4);
        if let Err(e) = check_against_oracle(&theory, &facts) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn defeasible_conclusions_are_consistent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (theory, facts) = random_theory(&mut rng, 8, 12, 4);
        let d = derive(&theory, &facts).unwrap();
        for q in literal_universe(&theory, &facts) {
            let c = d.conclusion(&q);
            let nc = d.conclusion(&q.complement());
            if c.defeasible && nc.defeasible {
                prop_assert!(c.definite && nc.definite, "{} and its complement both +∂", q);
            }
            prop_assert!(!c.definite || c.defeasible, "{} is +Δ but not +∂", q);
        }
    }

    #[test]
    fn every_chain_step_is_a_positive_conclusion(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (theory, facts) = random_theory(&mut rng, 8, 12, 4);
        let d = derive(&theory, &facts).unwrap();
        for (i, f) in d.causal_chain.iter().enumerate() {
            prop_assert_eq!(f.step, i + 1);
            prop_assert!(d.is_provable(&f.consequent));
            for a in &f.satisfied {
                prop_assert!(d.is_provable(a));
            }
        }
    }

    // Adding a pair (r, s) between two mutually blocking rules settles the
    // conflict in r's favour.
    #[test]
    fn superiority_settles_a_blocked_conflict(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (theory, facts) = random_theory(&mut rng, 8, 12, 0);
        let d = derive(&theory, &facts).unwrap();
        for r in theory.rules.iter().filter(|r| r.kind == RuleKind::Defeasible) {
            let q = &r.consequent;
            let nq = q.complement();
            let attackers: Vec<&Rule> = theory.rules.iter().filter(|s| s.consequent == nq).collect();
            let [s] = attackers.as_slice() else { continue };
            if s.kind != RuleKind::Defeasible
                || theory.rules.iter().filter(|t| &t.consequent == q).count() != 1
                || d.conclusion(q).defeasible
                || d.conclusion(&nq).defeasible
                || !r.antecedents.iter().chain(&s.antecedents).all(|a| d.is_provable(a))
                || d.conclusion(q).definite
                || d.conclusion(&nq).definite
                || facts.contains(q)
                || facts.contains(&nq)
            {
                continue;
            }
            let mut with_pair = theory.clone();
            with_pair.superiority.push(Superiority {
                winner: r.id.clone(),
                loser: s.id.clone(),
                annotation: None,
            });
            let after = derive(&with_pair, &facts).unwrap();
            prop_assert!(after.conclusion(q).defeasible, "{} not +∂ after adding ({}, {})", q, r.id, s.id);
            prop_assert!(!after.conclusion(&nq).defeasible);
        }
    }
}

#[test]
fn fixed_seed_sweep_has_no_mismatches() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..200 {
        let (theory, facts) = random_theory(&mut rng, 8, 12, 4);
        check_against_oracle(&theory, &facts).unwrap();
    }
}

#[test]
fn cycle_is_reported_with_its_members() {
    let theory = Theory::new(vec![
        Rule::new("r1", RuleKind::Defeasible, vec![lit("p")], lit("q")),
        Rule::new("r2", RuleKind::Defeasible, vec![lit("q")], lit("~p")),
    ]);
    let err = derive(&theory, &BTreeSet::new()).unwrap_err();
    let ReasonerError::CyclicDependency { cycle } = err else {
        panic!("expected a cycle error");
    };
    let names: BTreeSet<String> = cycle.iter().map(|l| l.atom.clone()).collect();
    assert_eq!(names, ["p", "q"].into_iter().map(String::from).collect());
    assert_eq!(cycle.first(), cycle.last());
}

#[test]
fn ambiguity_propagates_blocking_not_support() {
    // p and ~p block each other, so r3 never becomes applicable.
    let theory = Theory::new(vec![
        Rule::new("r1", RuleKind::Defeasible, vec![], lit("p")),
        Rule::new("r2", RuleKind::Defeasible, vec![], lit("~p")),
        Rule::new("r3", RuleKind::Defeasible, vec![lit("p")], lit("s")),
    ]);
    let d = derive(&theory, &BTreeSet::new()).unwrap();
    assert!(!d.is_provable(&lit("p")));
    assert!(!d.is_provable(&lit("~p")));
    assert!(!d.is_provable(&lit("s")));
    assert!(!d.is_provable(&lit("~s")));
    assert!(d.causal_chain.is_empty());
}
