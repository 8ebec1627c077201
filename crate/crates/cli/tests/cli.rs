use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hopf_nfde::hopf_hopf::HopfHopfPoint;
use hopf_nfde_cli::report::{build_report, AnalyzeReport};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hopf-nfde"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn hopf-nfde")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn analyze_to(path: &Path) -> AnalyzeReport {
    stdout(&run(&["analyze", "--out", path.to_str().unwrap()]));
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_reports_via_case() {
    let report: AnalyzeReport = serde_json::from_str(&stdout(&run(&["analyze"]))).unwrap();
    assert_eq!(report.case.as_deref(), Some("VIa"));
    assert!((report.k0 - 4.834585253687429).abs() < 1e-6);
    assert!((report.b0 - 0.087454).abs() < 1e-5);
    assert_eq!(report.lines.len(), 8);
    assert!(report.nonresonant);
}

#[test]
fn cached_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let report = analyze_to(&path);
    let hh = report.hopf_hopf();
    assert_eq!(hh.k0.to_bits(), report.k0.to_bits());
    assert_eq!(hh.tau0.to_bits(), report.tau0.to_bits());

    let out = dir.path().join("sim");
    stdout(&run(&[
        "simulate",
        "--report",
        path.to_str().unwrap(),
        "--alpha1",
        "-0.1",
        "--alpha2",
        "0.1",
        "--t-end",
        "200",
        "--transient",
        "100",
        "--h-div",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out.join("classification.json")).unwrap())
            .unwrap();
    assert_eq!(summary["k"].as_f64().unwrap(), report.k0 - 0.1);
    assert_eq!(summary["tau"].as_f64().unwrap(), report.tau0 + 0.1);
    assert_eq!(summary["region"], "D7");
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        stdout(&run(&[
            "simulate",
            "--alpha1",
            "0.1",
            "--alpha2",
            "0.085",
            "--t-end",
            "300",
            "--transient",
            "100",
            "--h-div",
            "400",
            "--stride",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]));
        files.push(
            ["trajectory.csv", "section.csv", "classification.json"]
                .map(|f| fs::read(out.join(f)).unwrap()),
        );
    }
    assert_eq!(files[0], files[1]);
    let traj = String::from_utf8(files[0][0].clone()).unwrap();
    assert!(traj.starts_with("t,x,y,theta,y_delayed\n"));
    let sec = String::from_utf8(files[0][1].clone()).unwrap();
    assert!(sec.starts_with("t,x,y_delayed,direction\n"));
}

#[test]
fn empty_k_range_gives_header_only() {
    let text = stdout(&run(&["hopf-curves", "--k-range", "5:4:0.1"]));
    assert_eq!(text, "branch_sign,j,k,tau,omega\n");
}

#[test]
fn hopf_curves_csv_layout() {
    let text = stdout(&run(&[
        "hopf-curves",
        "--k-range",
        "4.8:4.9:0.05",
        "--j-max",
        "1",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3 * 2 * 2);
    assert!(lines[1].starts_with("plus,0,4.7999999999999998,"));
    for l in &lines[1..] {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 5);
        for v in &f[2..] {
            v.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# grid\nk-range = 4.8:4.8:1\nj_max = 0\n").unwrap();
    let text = stdout(&run(&["hopf-curves", "--config", cfg.to_str().unwrap()]));
    assert_eq!(text.lines().count(), 3);
    let text = stdout(&run(&[
        "hopf-curves",
        "--config",
        cfg.to_str().unwrap(),
        "--j-max",
        "1",
    ]));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn zero_initial_state_stays_at_rest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rest");
    stdout(&run(&[
        "simulate",
        "--x0",
        "0",
        "--y0",
        "0",
        "--t-end",
        "100",
        "--transient",
        "50",
        "--h-div",
        "100",
        "--out",
        out.to_str().unwrap(),
    ]));
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    for line in traj.lines().skip(1) {
        for v in line.split(',').skip(1) {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0);
        }
    }
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out.join("classification.json")).unwrap())
            .unwrap();
    assert_eq!(summary["label"], "equilibrium_like");
}

#[test]
fn errors_are_reported_as_json() {
    let out = run(&["analyze", "--epsilon", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "HypothesisViolated");
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("hypotheses"));

    let out = run(&["analyze", "--bracket", "4.9:5.2"]);
    assert_eq!(out.status.code(), Some(4));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "NoSignChange");

    let out = run(&["hopf-curves", "--k-range", "1:2"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "Input");

    let out = run(&[
        "simulate",
        "--report",
        "/nonexistent/report.json",
        "--out",
        "/tmp/x",
    ]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn resonant_point_is_flagged() {
    // omega1 / omega2 = 1/2 exactly; only the resonance fields are checked.
    let hh = HopfHopfPoint {
        k0: 4.834585253687429,
        tau0: 8.815987316591215,
        omega1: 0.45,
        omega2: 0.9,
        j_plus: 1,
        j_minus: 1,
    };
    if let Ok(report) = build_report(&hh, 0.1, 0.5) {
        assert!(!report.nonresonant);
        assert_eq!(report.nearest_resonance, (1, 2));
    }
    let res = hopf_nfde::hopf_hopf::resonance_check(0.45, 0.9, 1e-3);
    assert!(!res.nonresonant);
}
