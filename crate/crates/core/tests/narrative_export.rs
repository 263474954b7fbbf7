use sagex_core::es::Interaction;
use sagex_core::exploration::Exploration;
use sagex_core::narrative::{mark, sections, ArgumentTarget, ExportFormat, NarrativeError, SectionKind, Stance};
use sagex_core::reference::gdpr_art8;
use sagex_core::script::parse_script;

const WALK: &str = r#"expand incipit:justification
expand rule:r_it
mark rebuttal:r_it supports "decision lawful under Italian law"
ground rule:r_it
source rule:r_it
"#;

fn walk(extra: &str) -> Exploration {
    let mut x = Exploration::start(gdpr_art8(), None, Default::default()).unwrap();
    for line in parse_script(&format!("{WALK}{extra}")).unwrap() {
        x.apply(&line.interaction).unwrap();
    }
    x
}

#[test]
fn marking_records_an_argument_with_its_evidence() {
    let x = walk("");
    let args = &x.narrative().arguments;
    assert_eq!(args.len(), 1);
    assert_eq!(args[0].id, "a1");
    assert_eq!(args[0].stance, Stance::Supports);
    assert_eq!(args[0].target, ArgumentTarget::Decision);
    assert_eq!(args[0].evidence, ["rebuttal:r_it"]);
    assert_eq!(args[0].claim, "decision lawful under Italian law");
    assert_eq!(x.narrative().metadata.decision.as_deref(), Some("reject_parent_deletion(giulio,marco)"));
}

#[test]
fn mark_validates_its_inputs() {
    let x = walk("");
    let (n, e) = (x.narrative(), x.explanans());
    assert_eq!(
        mark(n, e, "rule:r_grant", Stance::Attacks, "x", ArgumentTarget::Decision).unwrap_err(),
        NarrativeError::UnknownNode("rule:r_grant".into())
    );
    assert_eq!(
        mark(n, e, "rule:r_it", Stance::Attacks, "  ", ArgumentTarget::Decision).unwrap_err(),
        NarrativeError::EmptyClaim
    );
    assert_eq!(
        mark(n, e, "rule:r_it", Stance::Attacks, "x", ArgumentTarget::Argument("a7".into())).unwrap_err(),
        NarrativeError::UnknownArgument("a7".into())
    );
    let n2 = mark(n, e, "rule:r_gdpr", Stance::Attacks, "the general rule", ArgumentTarget::Argument("a1".into())).unwrap();
    assert_eq!(n2.arguments.len(), 2);
    assert_eq!(n.arguments.len(), 1, "mark returns a new narrative");
}

#[test]
fn sections_follow_the_stages_reached() {
    let x = walk("");
    let s = sections(x.explanans());
    let count = |k| s.iter().filter(|s| s.kind == k).count();
    assert_eq!(count(SectionKind::Justificatory), 1);
    assert_eq!(count(SectionKind::Descriptive), 3);
    assert_eq!(count(SectionKind::Causal), 0);

    let x = walk("whatif age(marco)=13\n");
    let s = sections(x.explanans());
    assert_eq!(s.iter().filter(|s| s.kind == SectionKind::Causal).count(), 1);

    let fresh = Exploration::start(gdpr_art8(), None, Default::default()).unwrap();
    let s = sections(fresh.explanans());
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].nodes.len(), 4);
}

#[test]
fn export_is_deterministic() {
    let a = walk("whatif age(marco)=13\n");
    let b = walk("whatif age(marco)=13\n");
    for f in [ExportFormat::Json, ExportFormat::Markdown] {
        assert_eq!(a.export(f), b.export(f));
    }
    let json: serde_json::Value = serde_json::from_str(&a.export(ExportFormat::Json)).unwrap();
    assert_eq!(json["path"].as_array().unwrap().len(), 6);
    assert_eq!(json["arguments"][0]["evidence"][0], "rebuttal:r_it");
    let md = a.export(ExportFormat::Markdown);
    assert!(md.contains("## Counterfactuals (causal)"));
    assert!(md.contains("- **a1** supports decision: decision lawful under Italian law"));
}

#[test]
fn failed_interactions_leave_the_exploration_untouched() {
    let mut x = walk("");
    let before = x.explanans().clone();
    assert!(x.apply(&Interaction::Expand { target: "rule:nope".into() }).is_err());
    assert_eq!(x.explanans(), &before);
}
