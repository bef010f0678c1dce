//! End-to-end checks of the binary: exit codes, CSV shape, determinism,
//! and the JSON report contract.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eccensus"))
}

#[test]
fn even_order_is_rejected() {
    let out = bin().args(["census", "--order", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_config_error() {
    let out = bin().args(["census", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn census_csv_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        let out = bin()
            .args(["census", "--order", "7", "--m", "1"])
            .args(["--cache-dir", dir.path().to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout).unwrap()
    };
    let first = run();
    let mut lines = first.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,n1,n2,m,p,weighted_num,weighted_den,class_num,class_den,matches"
    );
    // window of N=7 is (p-6)^2 < 4p: primes 5, 7, 11, 13
    let ps: Vec<&str> = first.lines().skip(1).map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(ps, vec!["5", "7", "11", "13"]);
    assert!(first.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(first.ends_with('\n') && !first.contains('\r'));
    // byte-identical on a second run (now served from the disk cache)
    assert_eq!(first, run());
}

#[test]
fn group_census_matches_sieve_route() {
    let out = bin()
        .args(["census", "--group", "3x9", "--format", "json"])
        .env("ECCENSUS_CACHE", tempfile::tempdir().unwrap().path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert!(!rows.is_empty());
    for r in rows {
        assert_eq!(r["n"], 27);
        assert_eq!(r["matches"], true);
    }
}

#[test]
fn verify_report_contract() {
    let out = bin().args(["verify", "gl2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["suite", "variant", "total_cases", "failures", "passed", "cases"] {
        assert!(report.get(key).is_some(), "missing key {key}");
    }
    assert_eq!(report["suite"], "gl2");
    assert_eq!(report["passed"], true);
    for case in report["cases"].as_array().unwrap() {
        assert!(case.get("pass").is_some());
    }
}

#[test]
fn verify_failure_exits_three() {
    // the original lemma-14 variant is known to fail configurations
    let out = bin()
        .args(["verify", "lemma14", "--variant", "original", "--nmax", "99"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], false);
    assert!(report["failures"].as_u64().unwrap() > 0);
}

#[test]
fn constants_kg_both_variants() {
    let out = bin()
        .args(["constants", "kg", "--group", "3x3", "--variant", "both"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n1,n2,variant,finite_num,finite_den,tail,value,differs");
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 2);
    assert!(body[0].starts_with("3,1,erratum,8,9,"));
    assert!(body[1].starts_with("3,1,original,20,27,"));
    assert!(body.iter().all(|l| l.ends_with(",true"))); // variants differ
}

#[test]
fn constants_factor_table_columns() {
    let out = bin()
        .args(["constants", "factors", "--order", "9", "--m", "3", "--ell-cutoff", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "ell,kind,variant,numerator,denominator");
    assert!(text.lines().any(|l| l == "3,knm_local,erratum,18,17"));
    assert!(text.lines().any(|l| l == "2,kn_generic,erratum,2,3"));
}

#[test]
fn constants_k0_reports_gap() {
    let out = bin()
        .args(["constants", "k0", "--n", "9", "--m", "3", "--u", "50", "--v", "3", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &rows.as_array().unwrap()[0];
    assert_eq!(row["euler"]["finite_num"], "1");
    assert_eq!(row["euler"]["finite_den"], "6");
    assert!(row["gap"].as_f64().unwrap().is_finite());
}
