use std::process::{Command, Output};

use pt_forge_cli::config::document_from_csv;
use pt_forge_cli::{parse_config, Parsed};

fn pt_forge(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pt-forge"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("PT_FORGE_THREADS", t),
        None => cmd.env_remove("PT_FORGE_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn meta_value(csv: &str, key: &str) -> Option<f64> {
    let prefix = format!("# {key} = ");
    csv.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .map(|v| v.trim_matches('"').parse().unwrap())
}

#[test]
fn exit_codes() {
    assert_eq!(pt_forge(&[], None).status.code(), Some(1));
    assert_eq!(
        pt_forge(&["synth", "--gamma-ratio", "1.2"], None).status.code(),
        Some(1)
    );
    assert_eq!(pt_forge(&["synth", "--no-such-flag"], None).status.code(), Some(1));
    assert_eq!(pt_forge(&["pt2"], Some("zero")).status.code(), Some(1));
    assert_eq!(pt_forge(&["pt2", "--help"], None).status.code(), Some(0));
    let missing = pt_forge(&["pt2", "--config", "/nonexistent/run.toml"], None);
    assert_eq!(missing.status.code(), Some(2));
    let unwritable = pt_forge(&["pt2", "--output", "/nonexistent/dir/out.csv"], None);
    assert_eq!(unwritable.status.code(), Some(2));
    let infeasible = pt_forge(
        &[
            "feasibility",
            "--gamma-ratio",
            "0.9",
            "--omega-init-points",
            "3",
            "--omega03-points",
            "5",
        ],
        None,
    );
    assert_eq!(infeasible.status.code(), Some(3));
    let feasible = pt_forge(
        &[
            "feasibility",
            "--gamma-ratio",
            "0.5",
            "--omega-init-points",
            "3",
            "--omega03-points",
            "5",
        ],
        None,
    );
    assert_eq!(feasible.status.code(), Some(0));
}

#[test]
fn unknown_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "gamma_ratio = 0.5\nomega_int = 0.05\n").unwrap();
    let out = pt_forge(&["synth", "--config", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("omega_int"));
}

#[test]
fn synth_reports_breakdown_time() {
    let out = pt_forge(
        &[
            "synth",
            "--gamma-ratio",
            "0.5",
            "--omega-init-over-lambda",
            "0.05",
            "--omega03-over-lambda",
            "0",
            "--horizon-tau",
            "140",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("# verdict = \"Terminated\""));
    let tau_star = meta_value(&csv, "tau_star").unwrap();
    assert!((tau_star / std::f64::consts::PI / 41.09 - 1.0).abs() < 5e-3);
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("tau,omega01,omega23,delta0,delta3,re_phi0,im_phi0,re_phi3,im_phi3"));
    let last: f64 = csv.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(last < tau_star && last > tau_star - 0.02);
}

#[test]
fn emitted_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("synth.csv");
    let out = pt_forge(
        &[
            "synth",
            "--gamma-ratio",
            "0.3",
            "--theta",
            "0.7",
            "--horizon-tau",
            "12.5",
            "--omega03-grid",
            "lin:0:1:5",
            "--output",
            path.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&path).unwrap();
    let doc = document_from_csv(&csv);
    let Parsed::Run(again) = parse_config(["pt-forge", "synth"], Some(&doc)).unwrap() else {
        panic!()
    };
    let Parsed::Run(direct) = parse_config(
        [
            "pt-forge",
            "synth",
            "--gamma-ratio",
            "0.3",
            "--theta",
            "0.7",
            "--horizon-tau",
            "12.5",
            "--omega03-grid",
            "lin:0:1:5",
            "--output",
            path.to_str().unwrap(),
        ],
        None,
    )
    .unwrap() else {
        panic!()
    };
    assert_eq!(again, direct);

    // Re-running from the recovered document reproduces the file byte for byte.
    let cfg = dir.path().join("again.toml");
    std::fs::write(&cfg, &doc).unwrap();
    let rerun = pt_forge(&["synth", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(rerun.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), csv);
}

#[test]
fn scans_are_identical_across_pool_widths() {
    let args = [
        "breakdown-scan",
        "--gamma-list",
        "0.3,0.6",
        "--omega-init-grid",
        "log:0.02:0.5:5",
        "--omega03-over-lambda",
        "0.02",
        "--horizon-tau",
        "60",
    ];
    let one = pt_forge(&args, Some("1"));
    let four = pt_forge(&args, Some("4"));
    let default = pt_forge(&args, None);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, default.stdout);
    let csv = String::from_utf8(one.stdout).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 10);
}

#[test]
fn json_mirrors_csv() {
    let csv = String::from_utf8(pt_forge(&["pt2", "--horizon-tau", "1"], None).stdout).unwrap();
    let json = pt_forge(&["pt2", "--horizon-tau", "1", "--format", "json"], None);
    let j: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(j["columns"], serde_json::json!(["tau", "n", "w", "Phi", "p1", "p2"]));
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(j["rows"].as_array().unwrap().len(), rows.len());
    let first_n: f64 = rows[3].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(j["rows"][3][1].as_f64().unwrap(), first_n);
}

#[test]
fn threshold_reports_critical_recycling() {
    let out = pt_forge(
        &["threshold", "--gamma-ratio", "0.5", "--omega-init-over-lambda", "0.05"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let crit = meta_value(&csv, "omega03_crit_over_lambda").unwrap();
    assert!((crit / 0.01412 - 1.0).abs() < 0.05, "{crit}");
}

#[test]
fn every_subcommand_runs() {
    let quick: [&[&str]; 9] = [
        &["pt2"],
        &["synth", "--horizon-tau", "10"],
        &["emulate", "--horizon-tau", "10"],
        &["breakdown-scan", "--gamma-list", "0.5", "--omega-init-grid", "0.05,0.1"],
        &[
            "threshold",
            "--omega-init-over-lambda",
            "0.1",
            "--horizon-tau",
            "100",
            "--bisection-tol",
            "1e-3",
        ],
        &[
            "boundary",
            "--gamma-list",
            "0.5",
            "--omega-init-grid",
            "0.1",
            "--horizon-tau",
            "100",
            "--bisection-tol",
            "1e-3",
        ],
        &["feasibility", "--omega-init-points", "2", "--omega03-points", "2"],
        &[
            "detuning-range",
            "--omega-init-grid",
            "0.05",
            "--omega03-grid",
            "0.05",
            "--horizon-tau",
            "100",
        ],
        &["orbit", "--omega03-over-lambda", "0.05", "--horizon-tau", "40"],
    ];
    for args in quick {
        let out = pt_forge(args, Some("2"));
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.starts_with(b"# pt-forge"));
    }
}
