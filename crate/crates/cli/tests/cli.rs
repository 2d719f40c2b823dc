use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_charsum-lab")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn expsum_kinds_agree_with_brute_force() {
    let cases: [&[&str]; 4] = [
        &["expsum", "--kind", "tk", "--k", "4", "--modulus", "21", "--ell", "2", "--check-factored"],
        &["expsum", "--kind", "kk", "--v1", "1", "--v2", "1", "--ell", "1", "--r", "3", "--s1", "5", "--s2", "7", "--check-factored"],
        &["expsum", "--kind", "hk", "--k", "3", "--modulus", "7", "--ell", "1", "--check-factored"],
        &["expsum", "--kind", "epi", "--pi", "sym3-delta", "--modulus", "5", "--ell", "1", "--check-factored"],
    ];
    for args in cases {
        let out = lab(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert!(v["discrepancy"].as_f64().unwrap() < 1e-7, "{args:?}: {v}");
    }
}

#[test]
fn classical_kloosterman_value() {
    let v = json(&lab(&["expsum", "--kind", "hk", "--k", "2", "--modulus", "5", "--ell", "1"]));
    let expected = (2.0 * (4.0 * std::f64::consts::PI / 5.0).cos() + 2.0) / 5f64.sqrt();
    assert!((v["value_re"].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn lvalue_csv_has_one_row_per_primitive_character() {
    let out = lab(&["lvalue", "--pi", "sym3-delta", "--q", "5", "--all-primitive", "--out", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 10);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let eps = (row[6].parse::<f64>().unwrap(), row[7].parse::<f64>().unwrap());
        assert!(((eps.0 * eps.0 + eps.1 * eps.1).sqrt() - 1.0).abs() < 1e-9);
    }
    // conjugate characters give conjugate values
    assert_eq!(rows[0][5][..8], rows[2][5][..8]);
}

#[test]
fn moduli_profiles() {
    let v = json(&lab(&["moduli", "--profile", "pair-15-21"]));
    let members: Vec<u64> = v["members"].as_array().unwrap().iter().map(|m| m["q"].as_u64().unwrap()).collect();
    assert_eq!(members, [15, 21]);
    let desk = json(&lab(&["moduli", "--profile", "desk"]));
    assert!(desk["members"].as_array().unwrap().len() >= 20);
}

#[test]
fn census_is_reproducible_and_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs");
    let runs = runs.to_str().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = ["census", "--pi", "sym3-delta", "--profile", "pair-15-21", "--parity", "both", "--run-id", "t", "--runs-dir", runs, "--out"];
    for out in [&a, &b] {
        let mut args = base.to_vec();
        args.push(out.to_str().unwrap());
        let o = lab(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(dir.path().join("runs/t/q15.json").exists());
}

#[test]
fn census_on_empty_moduli_set_is_an_error() {
    // both members share a factor with 105
    let o = lab(&["census", "--pi", "sym3-delta", "--profile", "pair-15-21", "--coprime-to", "105", "--expect-nonvanishing"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty moduli set"));
}

#[test]
fn forced_zero_fails_the_nonvanishing_expectation() {
    // the only odd primitive character mod 15 has root number -1
    let o = lab(&["census", "--pi", "sym3-delta", "--profile", "singleton-15", "--parity", "odd", "--expect-nonvanishing"]);
    assert_eq!(o.status.code(), Some(1));
    let rows = String::from_utf8(o.stdout).unwrap();
    assert_eq!(rows.lines().skip(1).filter(|l| l.contains(",zero-ish,")).count(), 1);
}

#[test]
fn verify_reports_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("ledger.json");
    let o = lab(&["verify", "--suite", "quick", "--only", "arith.crt-roundtrip,moduli.c-multiplicativity", "--ledger", ledger.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 2);
    let l: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&ledger).unwrap()).unwrap();
    assert_eq!(l["results"].as_array().unwrap().len(), 2);
    assert_eq!(lab(&["verify", "--only", "no.such-check"]).status.code(), Some(2));
    let list = String::from_utf8(lab(&["verify", "--list"]).stdout).unwrap();
    assert!(list.lines().count() >= 33);
}

#[test]
fn bad_input_exits_with_code_two() {
    assert_eq!(lab(&["expsum", "--kind", "tk", "--modulus", "12", "--ell", "1"]).status.code(), Some(2));
    assert_eq!(lab(&["moduli", "--profile", "/no/such/file.toml"]).status.code(), Some(2));
}
