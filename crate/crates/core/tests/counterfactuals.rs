use proptest::prelude::*;
use sagex_core::counterfactual::{parse_mutations, whatif, CounterfactualError, Mutation};
use sagex_core::literal::{Literal, Value};
use sagex_core::model::ExplanandumBundle;
use sagex_core::reasoner::{derive, Derivation, ProofTag};
use sagex_core::reference::gdpr_art8;

fn setup() -> (ExplanandumBundle, Derivation) {
    let b = gdpr_art8();
    let d = derive(b.theory(), &b.grounded_facts()).unwrap();
    (b, d)
}

fn lit(s: &str) -> Literal {
    s.parse().unwrap()
}

#[test]
fn younger_than_fourteen_flips_the_decision() {
    let (b, d) = setup();
    let r = whatif(&b, &d, &parse_mutations("age(marco)=13").unwrap()).unwrap();
    assert!(r.decision_changed);
    assert!(!r.new_derivation.is_provable(&lit("reject_parent_deletion(giulio,marco)")));
    assert!(r.new_derivation.is_provable(&lit("~valid_consent(marco)")));
    assert!(r.new_derivation.is_provable(&lit("~reject_parent_deletion(giulio,marco)")));
    let flip = r
        .diff
        .flipped
        .iter()
        .find(|f| f.literal == lit("valid_consent(marco)"))
        .unwrap();
    assert_eq!((flip.before, flip.after), (ProofTag::DefeasiblyProvable, ProofTag::DefeasiblyRefuted));
    assert_eq!(r.diff.newly_fired, ["r_gdpr", "r_grant"]);
    assert_eq!(r.diff.no_longer_fired, ["r_it", "r_rej"]);
}

#[test]
fn a_non_derogating_member_state_flips_the_decision() {
    let (b, d) = setup();
    let r = whatif(&b, &d, &parse_mutations("jurisdiction(marco)=france").unwrap()).unwrap();
    assert!(r.decision_changed);
    let outcome = r.decision.unwrap();
    assert_eq!(outcome.before.defeasible_tag(), ProofTag::DefeasiblyProvable);
    assert_eq!(outcome.after.defeasible_tag(), ProofTag::DefeasiblyRefuted);
}

#[test]
fn sixteen_keeps_the_decision_through_the_general_rule() {
    let (b, d) = setup();
    let r = whatif(&b, &d, &parse_mutations("age(marco)=16").unwrap()).unwrap();
    assert!(!r.decision_changed);
    assert!(r.diff.newly_fired.contains(&"r_gdpr_adult".to_string()));
}

#[test]
fn identity_mutation_changes_nothing() {
    let (b, d) = setup();
    for m in ["age(marco)=14", "jurisdiction(marco)=italy", "parent(giulio,marco)=true"] {
        let r = whatif(&b, &d, &parse_mutations(m).unwrap()).unwrap();
        assert!(r.diff.is_empty(), "{m}: {:?}", r.diff);
        assert!(!r.decision_changed);
        assert_eq!(r.new_derivation, d);
    }
}

#[test]
fn mutations_are_checked() {
    let (b, d) = setup();
    let err = |m: &str| whatif(&b, &d, &parse_mutations(m).unwrap()).unwrap_err();
    assert!(matches!(err("valid_consent(marco)=true"), CounterfactualError::NotAPremise(_)));
    assert!(matches!(err("age(marco)=old"), CounterfactualError::TypeMismatch { .. }));
    assert!(matches!(err("jurisdiction(marco)=giulio"), CounterfactualError::TypeMismatch { .. }));
    assert!(matches!(err("jurisdiction(marco)=atlantis"), CounterfactualError::TypeMismatch { .. }));
    assert!(matches!(err("age(marco)=13,age(marco)=12"), CounterfactualError::Repeated(_)));
    assert!(parse_mutations("age(marco)>13").is_err());
}

proptest! {
    #[test]
    fn mutating_and_reverting_restores_the_derivation(age in 0i64..30, italy in any::<bool>()) {
        let (b, d) = setup();
        let place = if italy { "italy" } else { "france" };
        let forward = vec![
            Mutation { premise: lit("age(marco)"), value: Value::Int(age) },
            Mutation { premise: lit("jurisdiction(marco)"), value: Value::Entity(place.into()) },
        ];
        let there = whatif(&b, &d, &forward).unwrap();
        let expected = age >= 14 && italy || age >= 16;
        prop_assert_eq!(there.new_derivation.is_provable(&lit("valid_consent(marco)")), expected);
        prop_assert_eq!(there.decision_changed, !expected);
        let back = whatif(&b, &there.new_derivation, &parse_mutations("age(marco)=14,jurisdiction(marco)=italy").unwrap()).unwrap();
        prop_assert_eq!(back.new_derivation, d);
    }
}
