use std::process::{Command, Output};

use hyperortho::exactpoly::parse_rational;
use hyperortho::ladder::assoc_from_phi;
use hyperortho::polygen::{generate_phi, PolySystemSlice};
use hyperortho::schrodinger::fd::fd_eigensolve;
use hyperortho::schrodinger::PotentialModel;
use hyperortho::system::make_system;
use hyperortho::CaseTag;
use hyperortho_cli::{fmt_f64, run, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperortho")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn classify_reports_cutoff_and_interval() {
    let o = bin(&["classify", "--case", "s2", "--alpha", "-10/1", "--beta", "2/1"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let v = json(&o);
    assert_eq!(v["nu"], "11/2");
    assert_eq!(v["interval"], "(0,inf)");
    assert_eq!(v["admissible"], true);

    let o = bin(&["classify", "--case", "const", "--alpha", "-2", "--beta", "0"]);
    assert_eq!(json(&o)["nu"], "inf");
}

#[test]
fn inadmissible_and_malformed_arguments_exit_2() {
    let o = bin(&["classify", "--case", "s", "--alpha", "-1", "--beta", "0"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    assert!(stderr(&o).contains("requires beta>0"));

    for args in [
        &["classify", "--case", "const", "--alpha", "-0.5", "--beta", "0"][..],
        &["classify", "--case", "cubic", "--alpha", "-1", "--beta", "0"],
        &["classify", "--case", "const", "--alpha", "-1/0", "--beta", "0"],
        &["polys", "--case", "s2", "--alpha", "-4", "--beta", "2", "--lmax", "3"],
        &["assoc", "--case", "const", "--alpha", "-2", "--beta", "0", "--l", "1", "--m", "2"],
        &["check", "bogus"],
        &["frobnicate"],
        &["potential", "--case", "linear", "--alpha", "-2", "--beta", "3", "--xmin", "-1", "--xmax", "1"],
    ] {
        let o = bin(args);
        assert_eq!(o.status.code(), Some(EXIT_USAGE), "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn polys_rows_match_library() {
    let o = bin(&["polys", "--case", "const", "--alpha", "-2", "--beta", "0", "--lmax", "2"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let v = json(&o);
    let rows: Vec<Vec<String>> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["coeffs"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect())
        .collect();
    assert_eq!(rows, vec![vec!["1/1"], vec!["0/1", "1/1"], vec!["-1/2", "0/1", "1/1"]]);

    let o = bin(&["polys", "--case", "const", "--alpha", "-2", "--beta", "0", "--lmax", "0"]);
    assert_eq!(json(&o)["rows"].as_array().unwrap().len(), 1);

    let sys = make_system(CaseTag::OneMinusS2, (-7, 2), (1, 3)).unwrap();
    let o = bin(&["polys", "--case", "one_minus_s2", "--alpha", "-7/2", "--beta", "1/3", "--lmax", "5"]);
    for (l, row) in json(&o)["rows"].as_array().unwrap().iter().enumerate() {
        let lib = generate_phi(&sys, l).unwrap().to_strings();
        let cli: Vec<String> = serde_json::from_value(row["coeffs"].clone()).unwrap();
        assert_eq!(cli, lib);
    }
}

#[test]
fn polys_csv_samples_are_library_values() {
    let sys = make_system(CaseTag::Linear, (-1, 1), (3, 2)).unwrap();
    let o = bin(&["polys", "--case", "linear", "--alpha", "-1", "--beta", "3/2", "--lmax", "3", "--grid", "5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "l,lambda,c0,c1,c2,c3");
    let pts = sys.interior_points(5);
    for (i, line) in lines[6..].iter().enumerate() {
        let mut expected = vec![fmt_f64(pts[i])];
        expected.extend((0..=3).map(|l| fmt_f64(generate_phi(&sys, l).unwrap().eval_float(pts[i]))));
        assert_eq!(*line, expected.join(","));
    }
}

#[test]
fn assoc_is_half_power_derivative() {
    let o = bin(&["assoc", "--case", "const", "--alpha", "-2", "--beta", "0", "--l", "2", "--m", "2"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let v = json(&o);
    assert_eq!(v["m"], 2);
    assert_eq!(v["p"], serde_json::json!(["2/1"]));

    let sys = make_system(CaseTag::S2PlusOne, (-9, 1), (1, 2)).unwrap();
    let slice = PolySystemSlice::new(&sys, 3).unwrap();
    let lib = assoc_from_phi(&slice, 3, 1).unwrap();
    let o = bin(&["assoc", "--case", "s2_plus_one", "--alpha", "-9", "--beta", "1/2", "--l", "3", "--m", "1"]);
    let cli: Vec<String> = serde_json::from_value(json(&o)["p"].clone()).unwrap();
    assert_eq!(cli, lib.p.to_strings());
}

#[test]
fn check_suites_pass_and_report() {
    let o = bin(&["check", "ladder", "--case", "one_minus_s2", "--alpha", "-5", "--beta", "1", "--lmax", "6"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    let checks = v["systems"][0]["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["residual"] == "0/1"));

    let o = bin(&["check", "theorem2", "--case", "s2_plus_one", "--alpha", "-4", "--beta", "2", "--lmax", "1"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert!(v["systems"][0]["checks"][1]["detail"].as_str().unwrap().contains(" * i^1 * P_1"));
}

#[test]
fn check_whole_grid_with_seed() {
    let o = bin(&["--seed", "7", "check", "norms", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("case,alpha,beta,check,l,m,k,status,residual,detail\n"));
    assert!(!text.contains(",fail,"));
    for case in CaseTag::ALL {
        assert!(text.contains(&format!("\n{},", case.name())));
    }
}

#[test]
fn failing_suite_exits_1() {
    // An absurd relative tolerance makes the quadrature-based checks fail.
    let out = run(["hyperortho", "--tol-rel", "1e-300", "check", "norms", "--case", "const", "--alpha", "-2", "--beta", "0"]);
    assert_eq!(out.code, EXIT_FAILED);
    assert!(out.stderr.contains("failed"));
}

#[test]
fn potential_csv_matches_library_bits() {
    let o = bin(&["potential", "--case", "s2", "--alpha", "-6", "--beta", "4", "--m", "0", "--xmin", "-2", "--xmax", "12", "--n", "256"]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stderr(&o));
    let sys = make_system(CaseTag::S2, (-6, 1), (4, 1)).unwrap();
    let model = PotentialModel::new(&sys, 0).unwrap();
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,W,V"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 256);
    for r in &rows {
        assert_eq!(r[1].to_bits(), model.superpotential(r[0]).unwrap().to_bits());
        assert_eq!(r[2].to_bits(), model.potential(r[0]).unwrap().to_bits());
    }
    assert!((rows[255][2] - 12.25).abs() < 1e-3);

    // The mirrored parameter sign is not admissible for σ = s².
    let o = bin(&["potential", "--case", "s2", "--alpha", "-6", "--beta", "-4", "--m", "0", "--xmin", "-2", "--xmax", "12", "--n", "256"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
}

#[test]
fn eigen_matches_library_and_guards() {
    let o = bin(&["eigen", "--case", "const", "--alpha", "-2", "--beta", "0", "--m", "0", "--window", "-8:8", "--n", "2000"]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stderr(&o));
    let v = json(&o);
    let fd: Vec<f64> = serde_json::from_value(v["fd_eigenvalues"].clone()).unwrap();
    for (x, want) in fd.iter().zip([0.0, 2.0, 4.0]) {
        assert!((x - want).abs() < 1e-3, "{fd:?}");
    }
    let sys = make_system(CaseTag::Const, (-2, 1), (0, 1)).unwrap();
    let model = PotentialModel::new(&sys, 0).unwrap();
    let lib = fd_eigensolve(&model, 2000, (-8.0, 8.0), 3).unwrap();
    let expected = serde_json::to_string_pretty(&lib).unwrap() + "\n";
    assert_eq!(stdout(&o), expected);

    let o = bin(&["eigen", "--case", "const", "--alpha", "-2", "--beta", "0", "--window", "-2:2", "--n", "2000"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    assert!(stderr(&o).contains("WindowTooSmall"));

    let o = bin(&["eigen", "--case", "const", "--alpha", "-2", "--beta", "0", "--window", "-8:8", "--n", "100"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
}

#[test]
fn eigen_automatic_window_for_morse() {
    let o = bin(&["eigen", "--case", "s2", "--alpha", "-6", "--beta", "4", "--n", "4000", "--levels", "4"]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stderr(&o));
    let v = json(&o);
    let fd: Vec<f64> = serde_json::from_value(v["fd_eigenvalues"].clone()).unwrap();
    for (x, want) in fd.iter().zip([0.0, 6.0, 10.0, 12.0]) {
        assert!((x - want).abs() <= 1e-2 * want.max(1.0), "{fd:?}");
    }
    assert_eq!(v["continuum_edge"].as_f64(), Some(12.25));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("hyperortho-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("classify.json");
    let o = bin(&["classify", "--case", "s2", "--alpha", "-3", "--beta", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["nu"], "2/1");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn in_process_runner_matches_binary() {
    let args = ["classify", "--case", "s2_minus_one", "--alpha", "-8", "--beta", "10"];
    let o = bin(&args);
    let r = run(std::iter::once("hyperortho").chain(args));
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(r.stdout, stdout(&o));
    assert!(parse_rational(json(&o)["nu"].as_str().unwrap()).is_ok());
}
