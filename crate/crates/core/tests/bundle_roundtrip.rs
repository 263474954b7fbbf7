use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sagex_core::format::{parse_bundle, to_document, BundleError};
use sagex_core::oracle::random_theory;
use sagex_core::reference::{gdpr_art8, GDPR_ART8_JSON};
use serde_json::{json, Value};

/// A random but well-formed bundle document.
fn random_document(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (theory, facts) = random_theory(&mut rng, 8, 12, 4);
    let sources: Vec<Value> = (0..rng.random_range(1..4))
        .map(|i| json!({"id": format!("s{i}"), "title": format!("Source {i}")}))
        .collect();
    let pick_sources = |rng: &mut ChaCha8Rng| -> Vec<String> {
        (0..sources.len())
            .filter(|_| rng.random_bool(0.5))
            .map(|i| format!("s{i}"))
            .collect()
    };
    let rules: Vec<Value> = theory
        .rules
        .iter()
        .map(|r| {
            json!({
                "id": r.id,
                "kind": r.kind,
                "if": r.antecedents.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "then": r.consequent.to_string(),
                "sources": pick_sources(&mut rng),
            })
        })
        .collect();
    let mut seen = BTreeSet::new();
    let mut fact_docs = Vec::new();
    for (i, f) in facts.iter().enumerate() {
        if !seen.insert(f.atom.clone()) {
            continue;
        }
        fact_docs.push(json!({"id": format!("f{i}"), "literal": f.to_string(), "sources": pick_sources(&mut rng)}));
    }
    fact_docs.push(json!({"id": "f_score", "literal": "score(x)", "value": rng.random_range(-50..50)}));
    fact_docs.push(json!({"id": "f_place", "literal": "place(x)", "value": "here"}));
    json!({
        "rules": rules,
        "superiority": theory.superiority,
        "facts": fact_docs,
        "sources": sources,
        "ontology": {
            "concepts": [{"id": "Thing"}, {"id": "Place", "parent": "Thing"}],
            "entities": {"x": ["Thing"], "here": ["Place"]}
        },
        "overview": {"mode": if rng.random_bool(0.5) { "ex-ante" } else { "ex-post" }, "purpose": "test"}
    })
    .to_string()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parse_of_serialize_is_identity(seed in any::<u64>()) {
        let doc = random_document(seed);
        let b = parse_bundle(&doc).unwrap();
        let again = parse_bundle(&to_document(&b)).unwrap();
        prop_assert_eq!(again, b);
    }
}

#[test]
fn reference_bundle_round_trips() {
    let b = gdpr_art8();
    assert_eq!(parse_bundle(&to_document(&b)).unwrap(), b);
}

#[test]
fn reference_bundle_shape() {
    let b = gdpr_art8();
    assert_eq!(b.id, "gdpr-art8-marco");
    assert_eq!(b.theory().rules.len(), 5);
    assert_eq!(b.theory().superiority.len(), 1);
    let pair = &b.theory().superiority[0];
    assert_eq!((pair.winner.as_str(), pair.loser.as_str()), ("r_it", "r_gdpr"));
    assert_eq!(pair.annotation.as_deref(), Some("Lex specialis derogat generali"));
    assert_eq!(b.premises().len(), 5);
}

#[test]
fn unnamed_bundles_get_a_content_hash_id() {
    let doc = r#"{"rules": [{"id": "r", "kind": "defeasible", "then": "p"}]}"#;
    let a = parse_bundle(doc).unwrap();
    assert!(a.id.starts_with("bundle-"));
    assert_eq!(a.id.len(), "bundle-".len() + 12);
    assert_eq!(parse_bundle(doc).unwrap().id, a.id);
}

#[test]
fn errors_name_their_location() {
    let mut broken: Value = serde_json::from_str(GDPR_ART8_JSON).unwrap();
    broken["rules"][2]["sources"] = json!(["s_missing"]);
    match parse_bundle(&broken.to_string()).unwrap_err() {
        BundleError::DanglingReference { from, missing } => {
            assert!(from.contains("r_it"), "{from}");
            assert_eq!(missing, "s_missing");
        }
        other => panic!("unexpected {other:?}"),
    }
    let err = parse_bundle("{\n  \"rules\": [\n    {\"id\": \"r\",, }\n  ]\n}").unwrap_err();
    assert_eq!(err.code(), "syntax_error");
    assert_eq!(err.position().map(|(line, _)| line), Some(3));
}
