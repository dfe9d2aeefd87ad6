use std::path::Path;

use rarita::curvature::RuleTable;
use rarita::derivations::{check_names, replay, run_check, run_checks, verify_all, Report, VerifyDocument};
use rarita::Error;

#[test]
fn every_check_passes_on_the_default_table() {
    let table = RuleTable::default();
    for name in check_names() {
        let r = run_check(name, &table).unwrap();
        assert!(r.passed(), "{name}: {:?} {}", r.error, r.residual);
        assert_eq!(r.residual, "0");
    }
}

#[test]
fn suite_has_ten_checks_in_fixed_order() {
    assert_eq!(
        check_names(),
        [
            "check_clifford",
            "check_gamma2",
            "translate_rs",
            "check_irreducible_split",
            "check_gauge_m0",
            "check_gauge_m1",
            "check_space_split",
            "check_constraint_propagation",
            "derive_buchdahl",
            "check_conclusions",
        ]
    );
}

#[test]
fn unknown_check_is_rejected() {
    let e = run_check("nosuch", &RuleTable::default()).unwrap_err();
    assert_eq!(e, Error::UnknownCheck("nosuch".into()));
}

#[test]
fn traces_replay_byte_identically() {
    let table = RuleTable::default();
    let doc = verify_all(&table, "default");
    for r in doc.checks.values() {
        assert_eq!(replay(r, &table).unwrap(), None, "{}", r.check);
    }
}

#[test]
fn serialized_document_round_trips_and_replays() {
    let table = RuleTable::default();
    let doc = verify_all(&table, "default");
    let text = serde_json::to_string(&doc).unwrap();
    let back: VerifyDocument = serde_json::from_str(&text).unwrap();
    assert!(back.all_passed);
    assert_eq!(back.checks.len(), 10);
    for r in back.checks.values() {
        assert_eq!(replay(r, &table).unwrap(), None, "{}", r.check);
    }
}

#[test]
fn merge_order_is_by_name() {
    let table = RuleTable::default();
    let a = run_checks(&["translate_rs", "check_clifford"], &table).unwrap();
    let b = run_checks(&["check_clifford", "translate_rs"], &table).unwrap();
    let ka: Vec<_> = a.keys().collect();
    assert_eq!(ka, b.keys().collect::<Vec<_>>());
    assert_eq!(ka, ["check_clifford", "translate_rs"]);
}

#[test]
fn shipped_flipped_table_fails_verification() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tables/flipped-sign.tbl");
    let table = RuleTable::load(&path).unwrap();
    let doc = verify_all(&table, "flipped");
    assert!(!doc.all_passed);
    assert!(!doc.checks["derive_buchdahl"].passed());
}

#[test]
fn table_text_round_trips() {
    let t = RuleTable::default();
    assert_eq!(RuleTable::parse(&t.to_text()).unwrap(), t);
}

#[test]
fn table_missing_a_key_is_rejected() {
    let text: String = RuleTable::default().to_text().lines().filter(|l| !l.starts_with("metric")).map(|l| format!("{l}\n")).collect();
    assert!(RuleTable::parse(&text).is_err());
}

#[test]
fn each_sign_flip_breaks_one_of_the_sensitive_checks() {
    let names = ["check_clifford", "translate_rs", "derive_buchdahl"];
    for (label, t) in RuleTable::default().single_sign_flips() {
        let reports = run_checks(&names, &t).unwrap();
        assert!(reports.values().any(|r: &Report| !r.passed()), "flip {label} undetected");
    }
}

fn report(name: &str) -> Report {
    run_check(name, &RuleTable::default()).unwrap()
}

#[test]
fn curvature_form_records_the_charge_term_reading() {
    let r = report("derive_buchdahl");
    assert!(r.metadata.contains_key("literal_charge_term"));
    let x20 = r.trace.iter().find(|t| t.name == "X20").unwrap();
    assert!(x20.expr.contains("Lambda"));
    assert!(r.assertions.iter().any(|a| a.what == "no Psi in X20" && a.passed));
}

#[test]
fn gauge_checks_record_mass_modes() {
    assert_eq!(report("check_gauge_m0").metadata["mass"], "zero");
    assert_eq!(report("check_gauge_m1").metadata["mass"], "nonzero");
}

#[test]
fn literal_gauge_transform_is_recorded_as_inconsistent() {
    let r = report("check_gauge_m0");
    let lt = r.assertions.iter().find(|a| a.what.starts_with("LT")).unwrap();
    assert!(lt.passed && lt.residual != "0");
}
