use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biasshift"))
        .args(args)
        .output()
        .expect("spawn biasshift")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_self_comparison_is_zero() {
    let r = fixture("ref.csv");
    let out = run(&["analyze", "--ref", s(&r), "--gen", s(&r)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for rec in v["records"].as_array().unwrap() {
        assert_eq!(rec["bias_shift"].as_f64(), Some(0.0));
        assert_eq!(rec["emd"].as_f64(), Some(0.0));
    }
    assert_eq!(v["abs"]["overall"].as_f64(), Some(0.0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ABS overall 0.00%"));
}

#[test]
fn analyze_report_keeps_header_order_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = run(&[
        "analyze", "--ref", s(&fixture("ref.csv")), "--gen", s(&fixture("gen.csv")),
        "--out", s(&out_path), "--threshold", "eyeglasses=-3.4", "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let names: Vec<&str> = v["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["attribute"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["smiling", "eyeglasses", "wavy_hair"]);
    assert_eq!(v["records"][1]["threshold"].as_f64(), Some(-3.4));
    assert_eq!(v["metadata"]["seed"].as_u64(), Some(7));
    assert_eq!(v["metadata"]["replicates"].as_u64(), Some(100));
    assert_eq!(v["metadata"]["categorization_threshold"].as_f64(), Some(0.01));
    assert!(v["metadata"]["bandwidth_rule"].as_str().unwrap().contains("silverman"));
    for rec in v["records"].as_array().unwrap() {
        assert!(rec["ref_bandwidth"].as_f64().unwrap() > 0.0);
        assert!(rec["ci_half_width"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn analyze_csv_matches_json() {
    let dir = tempfile::tempdir().unwrap();
    let j = dir.path().join("r.json");
    let c = dir.path().join("r.csv");
    for (path, fmt) in [(&j, "json"), (&c, "csv")] {
        let out = run(&[
            "analyze", "--ref", s(&fixture("ref.csv")), "--gen", s(&fixture("gen.csv")),
            "--out", s(path), "--format", fmt,
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = biasshift_core::read_report(&j, biasshift_core::ReportFormat::Json).unwrap();
    let b = biasshift_core::read_report(&c, biasshift_core::ReportFormat::Csv).unwrap();
    assert_eq!(a, b);
}

#[test]
fn analyze_missing_attribute_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("gen.csv");
    std::fs::write(&g, "sample_id,smiling,eyeglasses\ng,0.1,0.2\ng2,0.3,-1\n").unwrap();
    let out = run(&["analyze", "--ref", s(&fixture("ref.csv")), "--gen", s(&g)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wavy_hair"));
}

#[test]
fn analyze_malformed_input_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("gen.csv");
    std::fs::write(&g, "sample_id,a\nx,1\ny,oops\n").unwrap();
    let out = run(&["analyze", "--ref", s(&fixture("four_ref.csv")), "--gen", s(&g)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gen.csv") && err.contains("row 2") && err.contains("column 2"), "{err}");

    let out = run(&["analyze", "--ref", "/nonexistent.csv", "--gen", s(&g)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_threshold_attribute_is_input_error() {
    let r = fixture("four_ref.csv");
    let out = run(&["analyze", "--ref", s(&r), "--gen", s(&r), "--threshold", "nope=1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_internal_error() {
    let r = fixture("four_ref.csv");
    let out = run(&["analyze", "--ref", s(&r), "--gen", s(&r), "--out", "/nonexistent/dir/x.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn plot_data_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("curves.csv");
    let out = run(&[
        "analyze", "--ref", s(&fixture("ref.csv")), "--gen", s(&fixture("gen.csv")),
        "--out", s(&dir.path().join("r.json")), "--plot-data", s(&p),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("attribute,split,threshold,x,density\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 256);
    assert!(text.contains("smiling,val,0,") && text.contains("wavy_hair,gen,0,"));
}

#[test]
fn categorize_lists_every_attribute() {
    let out = run(&["categorize", "--ref", s(&fixture("ref.csv"))]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "attribute,threshold,p_ref,bandwidth,boundary_density,category");
    assert!(lines[1].starts_with("smiling,") && lines[1].ends_with(",spectrum"));
    assert!(lines[2].starts_with("eyeglasses,") && lines[2].ends_with(",non_spectrum"));
    // A huge cut makes everything non-spectrum.
    let out = run(&["categorize", "--ref", s(&fixture("ref.csv")), "--cat-threshold", "10"]);
    assert!(!String::from_utf8(out.stdout).unwrap().contains(",spectrum"));
}

#[test]
fn sampling_error_full_population_row_is_zero() {
    let out = run(&[
        "sampling-error", "--ref", s(&fixture("coin.csv")), "--sizes", "100,20000", "--replicates", "10",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "size,mean_abs,std");
    assert_eq!(lines[2], "20000,0,0");
}

#[test]
fn sampling_error_oversize_exits_2() {
    let out = run(&["sampling-error", "--ref", s(&fixture("four_ref.csv")), "--sizes", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds population"));
}

#[test]
fn simulate_scenario_files() {
    let out = run(&[
        "simulate", "--scenario", s(&fixture("scenario_std.txt")), "--scenario",
        s(&fixture("scenario_null.txt")), "--n", "100000",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][0], "standard-normal");
    let analytic: f64 = rows[0][2].parse().unwrap();
    assert!((analytic - 0.191_462_461_274_013_1).abs() < 1e-12);
    assert_eq!(rows[1][0], "null");
    assert_eq!(rows[1][2], "0");
}

#[test]
fn simulate_rejects_bad_input() {
    let out = run(&["simulate", "--scenario", s(&fixture("scenario_bad.txt"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let out = run(&["simulate", "--builtin", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["simulate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_json_output() {
    let out = run(&["simulate", "--builtin", "fig1", "--n", "20000", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
    assert_eq!(v[0]["label"], "bimodal-high");
}

#[test]
fn help_lists_flags_with_defaults() {
    let expectations: [(&str, &[&str]); 4] = [
        ("analyze", &["--ref", "--gen", "--out", "--format", "--threshold", "--default-threshold",
            "[default: 0]", "--cat-threshold", "[default: 0.01]", "--seed", "--replicates", "[default: 100]"]),
        ("categorize", &["--ref", "--threshold", "--default-threshold", "--cat-threshold", "[default: 0.01]"]),
        ("sampling-error", &["--ref", "--sizes", "--replicates", "[default: 100]", "--seed", "[default: 0]"]),
        ("simulate", &["--builtin", "--scenario", "--n", "[default: 1000000]", "--seed", "[default: 0]"]),
    ];
    for (cmd, flags) in expectations {
        let out = run(&[cmd, "--help"]);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        for f in flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}:\n{text}");
        }
    }
}
