use std::fs;
use std::process::{Command, Output};

use gcdsum::analytic::{parse_scan_csv, SummatoryReport};

fn gcdsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcdsum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn exit_0_on_success() {
    let out = gcdsum(&["eval", "A", "--n", "2", "--r", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "7/4\n");
}

#[test]
fn exit_1_on_verification_failure() {
    // r = 5 is far too small for A_r(n) to be within 1/1000 of n
    let out = gcdsum(&["verify", "limit", "--nmax", "10", "--rmax", "5"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.starts_with("FAIL 1/10"), "{text}");
    assert!(text.contains("n=2, r=5"), "{text}");
}

#[test]
fn exit_2_on_usage_error() {
    assert_eq!(code(&gcdsum(&["eval", "A", "--n", "2"])), 2);
    assert_eq!(code(&gcdsum(&["eval", "A", "--n", "2", "--r", "1", "--bogus", "3"])), 2);
    assert_eq!(code(&gcdsum(&["verify", "no-such-suite"])), 2);
    assert_eq!(code(&gcdsum(&["eval", "A", "--n", "-4", "--r", "1"])), 2);
}

#[test]
fn exit_3_on_domain_error() {
    let out = gcdsum(&["eval", "B", "--n", "4", "--r", "0"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain error"));
    assert_eq!(code(&gcdsum(&["eval", "menon", "--n", "6", "--a", "2"])), 3);
    assert_eq!(code(&gcdsum(&["igusa", "--n", "2", "--s", "1"])), 3);
}

#[test]
fn exit_4_on_resource_guard() {
    let out = gcdsum(&["eval", "A", "--n", "100000", "--r", "3", "--method", "brute"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("needs 1000000000000000 units"));
    assert_eq!(code(&gcdsum(&["scan", "A", "--r", "1", "--xmax", "5000000000"])), 4);
}

#[test]
fn eval_examples() {
    assert_eq!(stdout(&gcdsum(&["eval", "B", "--n", "4", "--r", "1"])), "6\n");
    assert_eq!(stdout(&gcdsum(&["eval", "fr", "--r", "2", "--k", "1"])), "-3u + u^2\n");
    assert_eq!(stdout(&gcdsum(&["eval", "tau", "--k", "3", "--n", "12"])), "18\n");
    assert_eq!(stdout(&gcdsum(&["eval", "menon", "--n", "12", "--a", "-1"])), "24\n");
    for m in ["local", "recursion", "brute"] {
        assert_eq!(stdout(&gcdsum(&["eval", "A", "--n", "12", "--r", "3", "--method", m])), "845/108\n");
    }
}

#[test]
fn json_rationals_are_strings() {
    let out = gcdsum(&["--format", "json", "eval", "A", "--n", "12", "--r", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"], serde_json::json!("845/108"));
    assert_eq!(v["n"], serde_json::json!(12));
}

#[test]
fn verify_examples() {
    assert_eq!(stdout(&gcdsum(&["verify", "menon", "--nmax", "200"])), "PASS 200/200\n");
    assert!(stdout(&gcdsum(&["verify", "a-threeway", "--nmax", "60", "--rmax", "3"])).starts_with("PASS"));
    assert!(stdout(&gcdsum(&["verify", "fr-vanishing", "--rmax", "5", "--kmax", "12"])).starts_with("PASS"));
    let out = gcdsum(&["--format", "json", "verify", "multiplicative", "--samples", "50", "--seed", "7"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["passed"], serde_json::json!(50));
    assert!(v["counterexample"].is_null());
}

#[test]
fn igusa_examples() {
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&gcdsum(&["igusa", "--n", "2", "--s", "2", "--method", "hurwitz"]))).unwrap();
    let target = 5.0 * std::f64::consts::PI.powi(2) / 24.0;
    assert!((v["value"].as_f64().unwrap() - target).abs() < 1e-9);
    let v: serde_json::Value = serde_json::from_str(&stdout(&gcdsum(&["igusa", "--n", "1", "--s", "2"]))).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.6449341).abs() < 1e-7);
    let out = gcdsum(&["igusa", "--n", "4", "--s", "2,2", "--method", "direct", "--trunc", "300"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in ["n", "s", "method", "value", "tail_bound", "terms_evaluated"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["terms_evaluated"], serde_json::json!(90000));
}

#[test]
fn scan_csv_parses_back_into_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let json = dir.path().join("out.json");
    let out = gcdsum(&[
        "scan", "A", "--r", "1", "--xmax", "200000",
        "--csv", csv.to_str().unwrap(), "--json", json.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("residual exponent"));
    let report: SummatoryReport = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert!(report.elapsed_secs.is_none());
    let rows = parse_scan_csv(&fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), report.checkpoints.len());
    let fit = report.fitted_poly.as_ref().unwrap();
    for (row, cp) in rows.iter().zip(&report.checkpoints) {
        assert_eq!(row.x, cp.x);
        assert_eq!(row.sum.to_bits(), cp.sum.to_bits());
        assert_eq!(row.main_term.unwrap().to_bits(), fit.main_term(cp.x as f64).to_bits());
    }
    let leading = fit.leading();
    assert!((leading - 0.6079).abs() < 1e-3, "{leading}");
}

#[test]
fn timing_flag_adds_elapsed() {
    let out = gcdsum(&["--format", "json", "scan", "tau", "--k", "2", "--xmax", "10000", "--timing"]);
    let report: SummatoryReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.elapsed_secs.is_some());
}

#[test]
fn scan_extremal_reports_statistic() {
    let out = gcdsum(&["--format", "json", "scan", "extremal", "--r", "1", "--x", "100000"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["statistic"].as_f64().unwrap() - 2f64.ln()).abs() < 0.15);
}

#[test]
fn fr_table_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fr.csv");
    let out = gcdsum(&["--output", path.to_str().unwrap(), "fr-table", "--rmax", "3", "--kmax", "5"]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,k,i,c_i"));
    let rows: Vec<(u32, u32, usize, i64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    assert!(rows.contains(&(2, 1, 1, -3)));
    assert!(rows.contains(&(2, 1, 2, 1)));
    // every (r, k) appears, and rows with k > r are identically zero
    for r in 1..=3 {
        for k in 1..=5 {
            assert!(rows.iter().any(|&(rr, kk, _, _)| rr == r && kk == k));
        }
    }
    assert!(rows.iter().filter(|&&(r, k, _, _)| k > r).all(|&(_, _, _, c)| c == 0));
}

#[test]
fn reruns_are_byte_identical() {
    let runs: [&[&str]; 4] = [
        &["--format", "json", "eval", "A", "--n", "720", "--r", "4"],
        &["verify", "multiplicative", "--samples", "100", "--seed", "99"],
        &["--format", "json", "scan", "tau", "--k", "3", "--xmax", "100000"],
        &["igusa", "--n", "6", "--s", "2,3", "--method", "direct", "--trunc", "2000"],
    ];
    for args in runs {
        let (a, b) = (gcdsum(args), gcdsum(args));
        assert_eq!(code(&a), 0, "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
