use std::path::PathBuf;
use std::process::Command;

use indiff::{fixtures, indifference_price, optimal_quantity, quantity_scaling};
use indiff_cli::{fmt_sig, parse_market_spec, run_command, MarketSpecFile, Outcome};
use proptest::prelude::*;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Outcome {
    run_command(std::iter::once("indiff").chain(args.iter().copied()))
}

/// Data rows of a CSV document as string fields.
fn rows(out: &Outcome) -> Vec<Vec<String>> {
    assert_eq!(out.code, 0, "{}", out.stderr);
    let mut r = csv::Reader::from_reader(out.stdout.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn write_spec(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("spec.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn worked_examples() {
    let g1 = fixture("g1.json");
    let p1 = fixture("p1.json");
    let out = run(&["price", "--market", &g1, "--n", "3", "--q", "1"]);
    assert_eq!(out.stdout, "n,q,hedgeable,offset,total\n3,1,0,-0.0625,-0.0625\n");
    let out = run(&["optimal-qty", "--market", &p1, "--n", "2", "--price", "0.85"]);
    assert_eq!(rows(&out)[0][2], "0.916290732");
    let out = run(&["price", "--market", &p1, "--n", "2", "--q", "0"]);
    assert_eq!(rows(&out)[0][4], "1");
}

#[test]
fn fixture_files_match_the_library_fixtures() {
    for (file, lib) in [("g1.json", fixtures::g1()), ("p1.json", fixtures::p1())] {
        let m = parse_market_spec(fixture(file)).unwrap();
        for n in [0, 3, 20] {
            for q in [-2.0, 0.5, 3.0] {
                let a = indifference_price(&m, n, q).unwrap().total;
                let b = indifference_price(&lib, n, q).unwrap().total;
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}

#[test]
fn round_trip_is_the_identity() {
    for file in ["g1.json", "p1.json"] {
        let spec = MarketSpecFile::load(fixture(file)).unwrap();
        let again = MarketSpecFile::from_json(&spec.to_json()).unwrap();
        assert_eq!(again, spec);
        assert_eq!(MarketSpecFile::from_json(&again.to_json()).unwrap(), spec);
    }
}

#[test]
fn numbers_match_the_library() {
    let p1m = fixtures::p1();
    let p1 = fixture("p1.json");
    let qs = [-3.0, -0.25, 0.0, 1.0, 7.5];
    let q_arg = qs.map(|q| q.to_string()).join(",");
    let out = run(&["price", "--market", &p1, "--n", "4", "--q", &q_arg]);
    for (row, q) in rows(&out).iter().zip(qs) {
        let p = indifference_price(&p1m, 4, q).unwrap();
        assert_eq!(row[2..], [fmt_sig(p.hedgeable), fmt_sig(p.offset), fmt_sig(p.total)]);
    }

    let out = run(&["optimal-qty", "--market", &p1, "--n", "3", "--price", "0.9,1,1.5"]);
    for (row, price) in rows(&out).iter().zip([0.9, 1.0, 1.5]) {
        let s = optimal_quantity(&p1m, 3, price).unwrap();
        assert_eq!(row[2..], [fmt_sig(s.q_hat), fmt_sig(s.residual), s.iterations.to_string()]);
    }

    let g1 = fixture("g1.json");
    let out = run(&["scaling", "--market", &g1, "--p-offset", "-0.05", "--n-list", "4-8,12"]);
    let table = quantity_scaling(&fixtures::g1(), -0.05, &[4, 5, 6, 7, 8, 12]).unwrap();
    let got = rows(&out);
    assert_eq!(got.len(), 6);
    for (row, lib) in got.iter().zip(&table.rows) {
        assert_eq!(row, &[lib.n.to_string(), fmt_sig(lib.q_hat), fmt_sig(lib.r_n), fmt_sig(lib.ratio)]);
    }

    let out = run(&["--format", "json", "price", "--market", &p1, "--n", "2", "--q", "1"]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let total = v[0]["total"].as_f64().unwrap();
    let lib = indifference_price(&p1m, 2, 1.0).unwrap().total;
    assert_eq!(total, fmt_sig(lib).parse::<f64>().unwrap());
}

#[test]
fn bounds_and_infinities() {
    let out = run(&["bounds", "--market", &fixture("p1.json"), "--n", "2"]);
    assert_eq!(rows(&out), vec![vec!["2", "0.75", "inf"]]);
    let out = run(&["--format", "json", "bounds", "--market", &fixture("g1.json"), "--n", "1"]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v[0]["lower"], "-inf");
    assert_eq!(v[0]["upper"], "inf");
}

#[test]
fn regime_tables() {
    let p1 = fixture("p1.json");
    let out = run(&["regime", "--market", &p1, "--l=-1", "--n-list", "10,20"]);
    assert!(rows(&out).iter().all(|r| r[6] == "uncovered-boundary"));
    let out = run(&["regime", "--market", &p1, "--l", "0.5", "--n-list", "40"]);
    assert_eq!(rows(&out)[0][6], "0");
    let out = run(&["regime", "--market", &fixture("g1.json"), "--l", "2", "--n-list", "20"]);
    let r = &rows(&out)[0];
    assert_eq!((r[3].as_str(), r[4].as_str(), r[6].as_str()), ("-1", "r2", "-1"));
    let out = run(&["regime", "--market", &p1, "--q", "0.001", "--n-list", "10"]);
    assert_eq!(rows(&out)[0][4], "r1");
}

#[test]
fn ldp_check_reports_the_bounds() {
    let out = run(&["ldp-check", "--market", &fixture("g1.json"), "--n-list", "10,15,20"]);
    let table = rows(&out);
    let get = |k: &str| table.iter().find(|r| r[0] == k).unwrap()[2].clone();
    assert_eq!(get("convergence"), "holds");
    assert_eq!(get("m_upper"), "inf");
    let gamma: Vec<_> = table.iter().filter(|r| r[0] == "gamma").collect();
    assert_eq!(gamma.len(), 6);
    for r in gamma {
        let l: f64 = r[1].parse().unwrap();
        let g: f64 = r[2].parse().unwrap();
        assert!((g - 0.5 * l * l).abs() <= 1e-6, "{r:?}");
    }
}

#[test]
fn mc_validate_is_seeded() {
    let p1 = fixture("p1.json");
    let args = ["mc-validate", "--market", &p1, "--n", "2", "--samples", "20000", "--seed", "7"];
    let a = run(&args);
    let b = run(&[&args[..], &["--workers", "3"]].concat());
    assert_eq!(rows(&a), rows(&b));
    let c = run(&["mc-validate", "--market", &p1, "--n", "2", "--samples", "20000", "--seed", "8"]);
    assert_ne!(rows(&a), rows(&c));
    let table = rows(&a);
    assert_eq!(table.len(), 15);
    for r in &table {
        let z: f64 = r[5].parse().unwrap();
        assert!(z.abs() <= 5.0, "{r:?}");
    }
    let seeded_price = run(&["price", "--market", &p1, "--n", "2", "--q", "1", "--seed", "1"]);
    assert_eq!(seeded_price.code, 2);
}

#[test]
fn invalid_market_files_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(fixture("g1.json")).unwrap();

    let bad_ratio = write_spec(&dir, &base.replace("\"rho\": 0.5", "\"rho\": 1.0"));
    let out = run(&["price", "--market", &bad_ratio, "--n", "1", "--q", "1"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("tail.rho") && out.stderr.contains("not summable"), "{}", out.stderr);

    let variance = base.replace(
        "\"components\": []",
        "\"components\": [{\"family\": \"gaussian\", \"variance\": 1.0}, {\"family\": \"gaussian\", \"variance\": 0.0}]",
    );
    let out = run(&["price", "--market", &write_spec(&dir, &variance), "--n", "1", "--q", "1"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("components[1].variance"), "{}", out.stderr);

    let typo = write_spec(&dir, &base.replace("risk_aversion", "risk_aversoin"));
    let out = run(&["price", "--market", &typo, "--n", "1", "--q", "1"]);
    assert_eq!(out.code, 2);

    let mu = write_spec(&dir, &base.replace("[0.0, 0.0, ", "["));
    let out = run(&["price", "--market", &mu, "--n", "1", "--q", "1"]);
    assert!(out.code == 2 && out.stderr.contains("at mu:"), "{}", out.stderr);

    let cov = base
        .replace("\"identity 64\"", "[[1.0, 2.0], [2.0, 1.0]]")
        .replace(&format!("[{}]", ["0.0"; 64].join(", ")), "[0.0, 0.0]");
    let out = run(&["price", "--market", &write_spec(&dir, &cov), "--n", "1", "--q", "1"]);
    assert!(out.code == 2 && out.stderr.contains("sigma_cov"), "{}", out.stderr);

    let out = run(&["price", "--market", "/nonexistent.json", "--n", "1", "--q", "1"]);
    assert_eq!(out.code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
}

#[test]
fn domain_errors_exit_with_code_three() {
    let out = run(&["optimal-qty", "--market", &fixture("p1.json"), "--n", "2", "--price", "0.5"]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.starts_with("error: price-not-arbitrage-free:"), "{}", out.stderr);
    let out = run(&["price", "--market", &fixture("g1.json"), "--n", "65", "--q", "1"]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("missing-hedge-representation"), "{}", out.stderr);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_indiff");
    let ok = Command::new(bin)
        .args(["price", "--market", &fixture("g1.json"), "--n", "3", "--q", "1"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8(ok.stdout).unwrap(), "n,q,hedgeable,offset,total\n3,1,0,-0.0625,-0.0625\n");
    let domain = Command::new(bin)
        .args(["optimal-qty", "--market", &fixture("p1.json"), "--n", "2", "--price", "0.75"])
        .output()
        .unwrap();
    assert_eq!(domain.status.code(), Some(3));
    let usage = Command::new(bin).args(["price"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn significant_digit_formatting() {
    assert_eq!(fmt_sig(0.9080301397071394), "0.90803014");
    assert_eq!(fmt_sig(-0.0625), "-0.0625");
    assert_eq!(fmt_sig(1e-5), "1e-05");
    assert_eq!(fmt_sig(123456789.0), "123456789");
    assert_eq!(fmt_sig(1234567890.0), "1.23456789e+09");
    assert_eq!(fmt_sig(f64::INFINITY), "inf");
    assert_eq!(fmt_sig(f64::NEG_INFINITY), "-inf");
    assert_eq!(fmt_sig(0.0), "0");
}

proptest! {
    #[test]
    fn formatting_keeps_nine_significant_digits(m in -1.0f64..1.0, e in -300i32..300) {
        let x = m * 10f64.powi(e);
        let s = fmt_sig(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-9 * x.abs(), "{} -> {}", x, s);
        let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect::<String>();
        prop_assert!(digits.trim_start_matches('0').len() <= 9, "{}", s);
    }
}
