use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use elastinet::analysis::THETA_LOWER_BOUND;
use elastinet::geometry::elastic_energy;
use elastinet::io::{self, ClassificationDoc, Loaded, MinimizeSummary};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elastinet"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn classify_reports_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let theta = fixture("theta.network.json");
    let o = run(&["classify", theta.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("verdict: Regular"));

    let counter = fixture("controesempio.graph.json");
    let o = run(
        &[
            "classify",
            counter.to_str().unwrap(),
            "--square-angle",
            "-o",
            "rep.json",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("rep.json")).unwrap();
    let doc: ClassificationDoc = serde_json::from_str(&text).unwrap();
    assert_eq!(doc.verdict, "StratifiedStraight");
    assert_eq!(
        doc.strata.as_ref().unwrap()[1],
        vec!["E1".to_string(), "E3".into()]
    );
    assert_eq!(
        doc.square_angle.as_ref().unwrap().verdict,
        "StratifiedNotStraight"
    );
    assert_eq!(io::to_json(&doc), text);

    let strstr = fixture("strstr.graph.json");
    let o = run(
        &[
            "classify",
            strstr.to_str().unwrap(),
            "--subgraph",
            "E3,E4,E5",
        ],
        dir.path(),
    );
    assert!(stdout(&o).contains("step: 2"));
    assert!(stdout(&o).contains("H1: E5"));
}

#[test]
fn minimize_theta_writes_network_log_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let g = fixture("theta.graph.json");
    let o = run(
        &[
            "minimize",
            g.to_str().unwrap(),
            "--alpha",
            "1",
            "--beta",
            "1",
            "--summary",
            "s.json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: MinimizeSummary = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(summary.converged);
    assert!(summary.energy >= THETA_LOWER_BOUND * 0.99);
    let Loaded::Network(n) = io::read_document(&dir.path().join("minimized.json")).unwrap() else {
        panic!("network expected")
    };
    assert!((elastic_energy(&n, 1.0, 1.0).total - summary.energy).abs() < 1e-12 * summary.energy);
    let log = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(log.lines().next(), Some("iteration,objective,residual"));
    assert!(log.lines().count() > 10);

    // same seed, same bytes
    let again = run(
        &[
            "minimize",
            g.to_str().unwrap(),
            "-o",
            "second.json",
            "--log",
            "second.csv",
        ],
        dir.path(),
    );
    assert_eq!(stdout(&again), stdout(&o));
    assert_eq!(
        std::fs::read(dir.path().join("second.json")).unwrap(),
        std::fs::read(dir.path().join("minimized.json")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let g = fixture("theta.graph.json");
    let o = run(
        &[
            "minimize",
            g.to_str().unwrap(),
            "--max-iter",
            "3",
            "--restarts",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(dir.path().join("minimized.json").exists());

    std::fs::write(
        dir.path().join("bad.json"),
        "{\"dimension\": 2, \"edges\": [",
    )
    .unwrap();
    for args in [
        vec!["classify", "bad.json"],
        vec!["classify", "missing.json"],
        vec!["classify", g.to_str().unwrap(), "--no-such-flag"],
        vec!["minimize", g.to_str().unwrap(), "--fixed-lengths", "1,2"],
        vec!["construct", "train-tracks", "--h", "3"],
        vec!["frobnicate"],
    ] {
        let o = run(&args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert_eq!(
            String::from_utf8_lossy(&o.stderr).trim().lines().count(),
            1,
            "{args:?}"
        );
    }
}

#[test]
fn train_tracks_roundtrip_through_analyze() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(
        &["construct", "train-tracks", "--h", "0.02", "-o", "tt.json"],
        dir.path()
    )
    .status
    .success());
    let o = run(
        &[
            "analyze",
            "tt.json",
            "--energy-csv",
            "e.csv",
            "--el-csv",
            "el.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
    let total: f64 = csv
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    let expected = 4.0 * f64::acos(0.99);
    assert!(
        (total - expected).abs() < 0.005 * expected,
        "{total} vs {expected}"
    );
}

#[test]
fn fan_and_desingularize_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["construct", "fan", "--r", "0.1", "--a", "0.01"],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(matches!(
        io::parse_document(&stdout(&o)).unwrap(),
        Loaded::Network(_)
    ));

    let deg = fixture("limitstrstr.network.json");
    let o = run(
        &[
            "construct",
            "desingularize",
            deg.to_str().unwrap(),
            "--eps",
            "0.05",
            "-o",
            "reg.json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["classify", "reg.json"], dir.path());
    assert_eq!(stdout(&o).lines().next(), Some("verdict: Regular"));

    let o = run(
        &["render", "reg.json", "-o", "reg.svg", "--scale", "50"],
        dir.path(),
    );
    assert!(o.status.success());
    let svg = std::fs::read_to_string(dir.path().join("reg.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.contains("<svg") && svg.contains("viewBox"));
    assert!(svg.contains("<polyline"));
}

#[test]
fn fixed_length_loop_is_circle_like() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"dimension": 2, "edges": [{"id": "C", "v0": "p", "v1": "p", "dir0_rad": 0, "dir1_rad": "pi"}]}"#;
    std::fs::write(dir.path().join("loop.json"), doc).unwrap();
    let lengths = format!("{}", 2.0 * PI);
    let o = run(
        &["minimize", "loop.json", "--fixed-lengths", &lengths],
        dir.path(),
    );
    assert!(o.status.success());
    let summary: MinimizeSummary = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((summary.energy - 2.0 * PI).abs() < 0.02 * 2.0 * PI);
}
