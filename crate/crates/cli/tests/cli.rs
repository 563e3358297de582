use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rfcw"))
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn parse(cell: &str) -> f64 {
    if cell == "inf" {
        f64::INFINITY
    } else {
        cell.parse().unwrap()
    }
}

/// Rows of a CSV body, header checked.
fn rows(csv: &str, header: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(header));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn rate_curve_constant_field_has_unique_zero() {
    let out = run(&["rate-curve", "--config", path_str(&repo_file("configs/rate_curve_constant.json"))]);
    assert!(out.status.success());
    let body = String::from_utf8(out.stdout).unwrap();
    let rows = rows(&body, "x,I,G,fstar");
    assert_eq!(rows.len(), 211);
    let zeros: Vec<f64> = rows.iter().filter(|r| parse(&r[1]) == 0.0).map(|r| parse(&r[0])).collect();
    assert_eq!(zeros, vec![0.0]);
    for r in &rows {
        let outside = parse(&r[0]).abs() > 1.0;
        assert_eq!(r[1] == "inf", outside);
        assert_eq!(r[3] == "inf", outside);
        assert!(parse(&r[2]).is_finite());
    }
}

#[test]
fn rate_curve_ordered_phase_has_two_symmetric_zeros() {
    let cfg = repo_file("configs/rate_curve_dichotomous.json");
    let out = run(&["rate-curve", "--config", path_str(&cfg)]);
    assert!(out.status.success());
    let body = String::from_utf8(out.stdout).unwrap();
    let rows = rows(&body, "x,I,G,fstar");
    let values: Vec<(f64, f64)> = rows.iter().map(|r| (parse(&r[0]), parse(&r[1]))).collect();
    // grid minima of I, one on each side of the origin
    let argmin =
        |side: f64| values.iter().filter(|(x, _)| x * side > 0.0).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    let (left, right) = (argmin(-1.0), argmin(1.0));
    assert!((left + right).abs() < 1e-12 && right > 0.5, "{left} {right}");
    let at_zero = values.iter().find(|(x, _)| *x == 0.0).unwrap().1;
    assert!(at_zero > 0.1);
    assert!(String::from_utf8(out.stderr).unwrap().contains("zeros of I at [-0."));
}

#[test]
fn runs_are_byte_identical_and_overrides_apply() {
    let cfg = repo_file("configs/rate_curve_constant.json");
    let a = run(&["rate-curve", "--config", path_str(&cfg), "--beta", "2.0"]);
    let b = run(&["rate-curve", "--config", path_str(&cfg), "--beta", "2.0"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let base = run(&["rate-curve", "--config", path_str(&cfg)]);
    assert_ne!(a.stdout, base.stdout);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let c = run(&["rate-curve", "--config", path_str(&cfg), "--beta", "2.0", "--out", path_str(&out)]);
    assert!(c.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
    let h = run(&["rate-curve", "--config", path_str(&cfg), "--h", "0.4"]);
    assert_ne!(h.stdout, base.stdout);
}

#[test]
fn dichotomous_phase_scan_regions() {
    let out = run(&["phase-scan", "--config", path_str(&repo_file("configs/phase_scan_dichotomous.json"))]);
    assert!(out.status.success());
    let body = String::from_utf8(out.stdout).unwrap();
    let rows = rows(&body, "beta,h,phase,n_minima,m_values,k_values,lambda_values");
    assert_eq!(rows.len(), 15 * 17 + 10);
    for r in &rows {
        if parse(&r[1]) >= 0.5 {
            assert_eq!(r[2], "paramagnetic", "{r:?}");
        }
        assert_ne!(r[2], "unclassified");
    }
}

#[test]
fn uniform_phase_scan_never_first_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.json");
    let res = run(&[
        "phase-scan",
        "--config",
        path_str(&repo_file("configs/phase_scan_uniform.json")),
        "--format",
        "json",
        "--out",
        path_str(&out),
    ]);
    assert!(res.status.success());
    let scan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let cells = scan["cells"].as_array().unwrap().iter().chain(scan["critical_line"].as_array().unwrap());
    let mut count = 0;
    for cell in cells {
        assert_ne!(cell["phase"], "first_order");
        count += 1;
    }
    assert!(count > 15 * 16);
    assert!(!scan["critical_line"].as_array().unwrap().is_empty());
}

#[test]
fn config_errors_exit_two() {
    let res = run(&["phase-scan", "--config", path_str(&fixture("phase_scan_empty_beta.json"))]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8(res.stderr).unwrap().contains("beta_range"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"model\": {\"variant\": \"constant\", \"h\": 0.0},\n  \"beta\": oops\n}").unwrap();
    let res = run(&["rate-curve", "--config", path_str(&bad)]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8(res.stderr).unwrap().contains("line 3"));

    let res = run(&["rate-curve", "--config", path_str(&dir.path().join("missing.json"))]);
    assert_eq!(res.status.code(), Some(2));

    let res = bin()
        .args(["rate-curve", "--config", path_str(&repo_file("configs/rate_curve_constant.json"))])
        .env("RFCW_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let cfg = repo_file("configs/phase_scan_uniform.json");
    let one = bin().args(["phase-scan", "--config", path_str(&cfg)]).env("RFCW_THREADS", "1").output().unwrap();
    let many = bin().args(["phase-scan", "--config", path_str(&cfg)]).env("RFCW_THREADS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn default_verify_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let res = run(&["verify", "--out", path_str(&out)]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let header = "n,seed,set_lo,set_hi,empirical_rate,theory_rate,deviation";
    // one report per case
    let first = std::fs::read_to_string(dir.path().join("report_0.csv")).unwrap();
    let second = std::fs::read_to_string(dir.path().join("report_1.csv")).unwrap();
    assert_eq!(rows(&first, header).len(), 30);
    assert_eq!(rows(&second, header).len(), 10);
    let notes = String::from_utf8(res.stderr).unwrap();
    assert_eq!(notes.matches("oracle").count(), 3);
    assert!(!notes.contains("VIOLATION"));
}

#[test]
fn wrong_theory_beta_is_a_violation() {
    let res = run(&["verify", "--config", path_str(&fixture("verify_wrong_theory_beta.json"))]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8(res.stderr).unwrap().contains("VIOLATION"));
}

#[test]
fn single_size_skips_monotonicity_with_warning() {
    let res = run(&["verify", "--config", path_str(&fixture("verify_single_n.json"))]);
    assert_eq!(res.status.code(), Some(0));
    let body = String::from_utf8(res.stdout).unwrap();
    assert_eq!(rows(&body, "n,seed,set_lo,set_hi,empirical_rate,theory_rate,deviation").len(), 2);
    assert!(String::from_utf8(res.stderr).unwrap().contains("warning: monotonicity check skipped"));
}

fn limit_columns(body: &str) -> Vec<(String, String, String, f64)> {
    rows(body, "model,n,seed,x,f_n,f_limit,abs_dev")
        .into_iter()
        .map(|r| (r[0].clone(), r[1].clone(), r[3].clone(), parse(&r[5])))
        .collect()
}

#[test]
fn markov_chain_and_table_share_limit() {
    let res = run(&["fields", "--config", path_str(&repo_file("configs/fields_markov_vs_table.json"))]);
    assert!(res.status.success());
    let cols = limit_columns(&String::from_utf8(res.stdout).unwrap());
    let chain: Vec<f64> = cols.iter().filter(|c| c.0 == "0_markov_chain").map(|c| c.3).collect();
    let table: Vec<f64> = cols.iter().filter(|c| c.0 == "1_finite_table").map(|c| c.3).collect();
    assert_eq!(chain.len(), table.len());
    assert_eq!(chain, table);
    let notes = String::from_utf8(res.stderr).unwrap();
    assert!(!notes.contains("not monotone"), "{notes}");
}

#[test]
fn rotation_and_uniform_limits_agree() {
    let res =
        run(&["fields", "--config", path_str(&repo_file("configs/fields_rotation_vs_uniform.json")), "--seed", "4"]);
    assert!(res.status.success());
    let cols = limit_columns(&String::from_utf8(res.stdout).unwrap());
    let rot: Vec<f64> = cols.iter().filter(|c| c.0 == "0_rotation").map(|c| c.3).collect();
    let uni: Vec<f64> = cols.iter().filter(|c| c.0 == "1_uniform").map(|c| c.3).collect();
    assert_eq!(rot.len(), 4 * 61);
    assert!(rot.iter().zip(&uni).all(|(a, b)| (a - b).abs() <= 1e-10));
    let notes = String::from_utf8(res.stderr).unwrap();
    assert!(!notes.contains("not monotone"), "{notes}");
}
