use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sagex_core::counterfactual::parse_mutations;
use sagex_core::es::{
    initial_explanans, stage_of, ElementRef, EsError, Explanans, ExplanatorySpace, HeuristicOrder, Interaction,
    Stage, SubjectKind,
};
use sagex_core::model::{ExplanandumBundle, Mode};
use sagex_core::narrative::{ArgumentTarget, Stance};
use sagex_core::reasoner::{derive, Derivation};
use sagex_core::reference::gdpr_art8;

fn setup() -> (ExplanandumBundle, Derivation) {
    let b = gdpr_art8();
    let d = derive(b.theory(), &b.grounded_facts()).unwrap();
    (b, d)
}

fn expand(target: &str) -> Interaction {
    Interaction::Expand { target: target.into() }
}

fn check_nodes(e: &Explanans) {
    let mut ids = BTreeSet::new();
    assert_eq!(e.nodes.len(), e.provenance.len());
    for n in &e.nodes {
        assert_eq!(n.stage, stage_of(n.kind), "{}", n.id);
        assert!(Stage::ALL.contains(&n.stage));
        assert!(ids.insert(n.id.clone()), "duplicate node {}", n.id);
        assert_eq!(n.id, n.subject.to_string());
    }
}

/// One random interaction: mostly a listed candidate, sometimes a mark,
/// a what-if, or something illegal.
fn random_interaction(rng: &mut ChaCha8Rng, space: &ExplanatorySpace, e: &Explanans) -> Interaction {
    let candidates = space.available_actions(e);
    let node = &e.nodes[rng.random_range(0..e.nodes.len())].id;
    match rng.random_range(0..10) {
        0..=5 if !candidates.is_empty() => candidates[rng.random_range(0..candidates.len())].interaction.clone(),
        6 => Interaction::Mark {
            target: node.clone(),
            stance: if rng.random_bool(0.5) { Stance::Supports } else { Stance::Attacks },
            claim: if rng.random_bool(0.9) { "a claim".into() } else { " ".into() },
            argument_target: if rng.random_bool(0.7) {
                ArgumentTarget::Decision
            } else {
                ArgumentTarget::Argument(format!("a{}", rng.random_range(1..4)))
            },
        },
        7 => {
            let age = rng.random_range(10..20);
            let place = ["italy", "france", "marco"][rng.random_range(0..3)];
            Interaction::WhatIf {
                target: None,
                mutations: parse_mutations(&format!("age(marco)={age},jurisdiction(marco)={place}")).unwrap(),
            }
        }
        8 => Interaction::Ground { target: node.clone() },
        _ => Interaction::Source { target: node.clone() },
    }
}

fn run_sequence(seed: u64, len: usize) -> (Explanans, Vec<Interaction>) {
    let (b, d) = setup();
    let space = ExplanatorySpace::new(&b, &d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = space.initial_explanans();
    let mut applied = Vec::new();
    for _ in 0..len {
        let i = random_interaction(&mut rng, &space, &e);
        let candidates = space.available_actions(&e);
        for w in candidates.windows(2) {
            assert!(space.compare(&w[0], &w[1]).is_le(), "candidates out of order");
        }
        match space.step(&e, &i) {
            Ok(next) => {
                assert_eq!(&next.nodes[..e.len()], &e.nodes[..]);
                assert_eq!(&next.provenance[..e.len()], &e.provenance[..]);
                assert_eq!(next.interactions.len(), e.interactions.len() + 1);
                if let Some(c) = candidates.iter().find(|c| c.interaction == i) {
                    let added: Vec<&str> = next.nodes[e.len()..].iter().map(|n| n.id.as_str()).collect();
                    assert_eq!(added, c.appends);
                }
                e = next;
                applied.push(i);
            }
            Err(_) => {
                assert!(candidates.iter().all(|c| c.interaction != i), "listed candidate failed: {i}");
            }
        }
        check_nodes(&e);
    }
    (e, applied)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_walks_keep_the_invariants(seed in any::<u64>(), len in 0usize..=30) {
        let (first, applied) = run_sequence(seed, len);
        let (second, _) = run_sequence(seed, len);
        prop_assert_eq!(
            serde_json::to_string(&first).unwrap(),
            serde_json::to_string(&second).unwrap()
        );
        // replaying only the accepted interactions gives the same explanans
        let (b, d) = setup();
        let space = ExplanatorySpace::new(&b, &d);
        let mut replay = space.initial_explanans();
        for i in &applied {
            replay = space.step(&replay, i).unwrap();
        }
        prop_assert_eq!(replay, first);
    }
}

#[test]
fn greedy_exploration_saturates() {
    let (b, d) = setup();
    for order in ["relevance,abstraction,simplicity", "simplicity,abstraction,relevance"] {
        let space = ExplanatorySpace::with_order(&b, &d, order.parse().unwrap());
        let mut e = space.initial_explanans();
        let bound = space.elements().count() * 3;
        let mut steps = 0;
        while let Some(top) = space.available_actions(&e).into_iter().next() {
            e = space.step(&e, &top.interaction).unwrap();
            steps += 1;
            assert!(steps <= bound, "no saturation after {steps} steps");
        }
        check_nodes(&e);
        // everything reachable from the incipit was shown
        for el in space.elements() {
            if space.relevance(el) != sagex_core::es::UNREACHABLE {
                assert!(e.contains(el), "{el} reachable but never shown");
            }
        }
    }
}

#[test]
fn incipit_of_the_reference_case() {
    let (b, d) = setup();
    let e = initial_explanans(&b, Some(&d)).unwrap();
    let ids: Vec<&str> = e.nodes.iter().map(|n| n.id.as_str()).collect();
    assert_eq!(
        ids,
        ["incipit:purpose", "incipit:overview", "incipit:justification", "incipit:hint"]
    );
    assert!(e.nodes.iter().all(|n| n.stage == Stage::Incipit));
    let j = &e.nodes[2].rendering;
    assert!(j.contains("Italian decree 101/2018"), "{j}");
    assert!(j.contains("(r_it) applies and prevails over"), "{j}");
    assert!(j.contains("Lex specialis derogat generali"), "{j}");
    assert_eq!(d.deciding_rule(b.overview.decision.as_ref().unwrap()), Some("r_it"));

    assert_eq!(initial_explanans(&b, None).unwrap_err(), EsError::MissingDerivation);
    let mut ex_ante = b.clone();
    ex_ante.overview.mode = Mode::ExAnte;
    let e = initial_explanans(&ex_ante, None).unwrap();
    assert_eq!(e.len(), 3);
    assert!(e.node("incipit:justification").is_none());
}

#[test]
fn relevance_follows_the_link_graph() {
    let (b, d) = setup();
    let space = ExplanatorySpace::new(&b, &d);
    assert_eq!(space.relevance(&ElementRef::Rule("r_it".into())), 0);
    assert_eq!(space.relevance(&ElementRef::Rule("r_gdpr".into())), 1);
    assert_eq!(space.relevance(&ElementRef::Entity("marco".into())), 0);
    assert_eq!(space.kind_of(&ElementRef::Rule("r_gdpr".into())), Some(SubjectKind::UnfiredRule));
    assert_eq!(space.kind_of(&ElementRef::Rule("r_it".into())), Some(SubjectKind::FiredRule));
    assert_eq!(space.kind_of(&ElementRef::Entity("france".into())), Some(SubjectKind::ContextEntity));
    // deeper concepts are less abstract
    assert_eq!(space.abstraction(&ElementRef::Rule("r_it".into())), 2);
    assert_eq!(space.abstraction(&ElementRef::Rule("r_gdpr".into())), 1);
    assert_eq!(space.abstraction(&ElementRef::Concept("LegalNorm".into())), 0);
}

#[test]
fn direct_information_is_offered_before_the_defeated_rule() {
    let (b, d) = setup();
    let space = ExplanatorySpace::new(&b, &d);
    let e = space.initial_explanans();
    let e = space.step(&e, &expand("incipit:justification")).unwrap();
    let e = space.step(&e, &expand("rule:r_it")).unwrap();
    let actions = space.available_actions(&e);
    let position = |target: &str| {
        actions
            .iter()
            .position(|a| a.interaction.target() == Some(target))
            .unwrap_or_else(|| panic!("no action on {target}"))
    };
    let indirect = position("rule:r_gdpr").min(position("rebuttal:r_it"));
    for direct in ["rule:r_it", "conclusion:valid_consent(marco)", "entity:marco"] {
        assert!(position(direct) < indirect, "{direct} ranked after the defeated rule");
    }
}

#[test]
fn stages_of_the_reference_elements() {
    let (b, d) = setup();
    let space = ExplanatorySpace::new(&b, &d);
    let e = space.initial_explanans();
    let e = space.step(&e, &expand("incipit:justification")).unwrap();
    let e = space.step(&e, &expand("rule:r_it")).unwrap();
    assert_eq!(e.node("rule:r_gdpr").unwrap().stage, Stage::MarginalInformation);
    assert_eq!(e.node("rule:r_it").unwrap().stage, Stage::CoreInformation);
    let e = space.step(&e, &Interaction::Ground { target: "rule:r_it".into() }).unwrap();
    let g = e.node("ground:r_it").unwrap();
    assert_eq!(g.stage, Stage::Ground);
    match &g.detail {
        Some(sagex_core::es::NodeDetail::Ground { fragment }) => {
            assert_eq!(fragment.text.as_bytes(), b.ground["r_it"].text.as_bytes());
            assert_eq!(fragment.format, "LegalRuleML");
        }
        other => panic!("unexpected detail {other:?}"),
    }
    assert!(g.rendering.ends_with(&b.ground["r_it"].text));
    let e = space.step(&e, &Interaction::Source { target: "rule:r_it".into() }).unwrap();
    assert_eq!(e.node("source:s_decree_101").unwrap().stage, Stage::Sources);
}

#[test]
fn illegal_interactions_are_rejected() {
    let (b, d) = setup();
    let space = ExplanatorySpace::new(&b, &d);
    let e = space.initial_explanans();
    let err = |i: Interaction| space.step(&e, &i).unwrap_err().code();
    assert_eq!(err(expand("incipit:purpose")), "nothing_to_expand");
    assert_eq!(err(expand("rule:r_it")), "unknown_target");
    assert_eq!(err(Interaction::Ground { target: "incipit:hint".into() }), "not_applicable");
    assert_eq!(err(Interaction::Source { target: "incipit:purpose".into() }), "not_applicable");
    assert_eq!(
        err(Interaction::WhatIf { target: None, mutations: vec![] }),
        "malformed_arguments"
    );
    assert_eq!(
        err(Interaction::WhatIf { target: None, mutations: parse_mutations("uses(marco,whatsapp)=3").unwrap() }),
        "type_mismatch"
    );
    let mark = |claim: &str, to: ArgumentTarget| Interaction::Mark {
        target: "incipit:justification".into(),
        stance: Stance::Supports,
        claim: claim.into(),
        argument_target: to,
    };
    assert_eq!(err(mark("", ArgumentTarget::Decision)), "malformed_arguments");
    assert_eq!(err(mark("x", ArgumentTarget::Argument("a1".into()))), "malformed_arguments");
    let e2 = space.step(&e, &mark("x", ArgumentTarget::Decision)).unwrap();
    assert_eq!(e2.nodes, e.nodes);
    space.step(&e2, &mark("y", ArgumentTarget::Argument("a1".into()))).unwrap();

    let e3 = space.step(&e, &Interaction::Source { target: "incipit:justification".into() }).unwrap();
    assert_eq!(
        space.step(&e3, &Interaction::Source { target: "incipit:justification".into() }).unwrap_err().code(),
        "already_shown"
    );
}

#[test]
fn heuristic_order_changes_the_ranking() {
    let (b, d) = setup();
    let default = ExplanatorySpace::new(&b, &d);
    let simple_first = ExplanatorySpace::with_order(&b, &d, "simplicity,relevance,abstraction".parse::<HeuristicOrder>().unwrap());
    let e = default.initial_explanans();
    let e = default.step(&e, &expand("incipit:justification")).unwrap();
    let e = default.step(&e, &expand("rule:r_it")).unwrap();
    let a = default.available_actions(&e);
    let s = simple_first.available_actions(&e);
    assert_eq!(a.len(), s.len());
    assert_ne!(a, s);
    for w in s.windows(2) {
        assert!(w[0].scores.simplicity <= w[1].scores.simplicity);
    }
}

#[test]
fn what_if_nodes_are_counterfactual() {
    let (b, d) = setup();
    let space = ExplanatorySpace::new(&b, &d);
    let e = space.initial_explanans();
    let i = Interaction::WhatIf { target: None, mutations: parse_mutations("age(marco)=13").unwrap() };
    let e = space.step(&e, &i).unwrap();
    let e = space.step(&e, &i).unwrap();
    let n1 = e.node("whatif:1").unwrap();
    assert_eq!(n1.stage, Stage::Counterfactuals);
    assert!(n1.rendering.contains("changes from +∂ to −∂"), "{}", n1.rendering);
    assert!(e.node("whatif:2").is_some());
}
