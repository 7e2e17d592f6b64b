use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gwf::gaussian::{gen_gaussian_ensemble, gen_signal, SignalModel};
use gwf::gwf::{dist, solve, SolverConfig};
use gwf::seed::{self, stream};
use gwf::{forward_correlate, io};

fn gwf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = gwf(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifests(dir: &Path) -> usize {
    fs::read_dir(dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name() == "manifest.json")
        .count()
}

#[test]
fn simulate_then_solve_matches_library() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    let sol = tmp.path().join("sol");
    ok(&["simulate", "--n", "16", "--m", "64", "--seed", "3", "--out", s(&sim)]);
    ok(&[
        "solve",
        "--ensemble", s(&sim.join("ensemble.ifn")),
        "--data", s(&sim.join("data.ifd")),
        "--truth", s(&sim.join("truth.ifs")),
        "--iters", "400",
        "--out", s(&sol),
    ]);
    let estimate = io::read_signal(&sol.join("estimate.ifs")).unwrap();

    let ens = gen_gaussian_ensemble(16, 64, seed::derive(3, &[stream::ENSEMBLE])).unwrap();
    let truth = gen_signal(&SignalModel::low_pass(16), seed::derive(3, &[stream::SIGNAL])).unwrap();
    assert_eq!(io::read_ensemble(&sim.join("ensemble.ifn")).unwrap(), ens);
    assert_eq!(io::read_signal(&sim.join("truth.ifs")).unwrap(), truth);
    let data = forward_correlate(&ens, &truth).unwrap();
    let cfg = SolverConfig { max_iters: 400, record_every: 10, ..SolverConfig::default() };
    let lib = solve(&ens, &data, &cfg, Some(&truth)).unwrap();
    assert_eq!(dist(&estimate, &lib.final_estimate).unwrap(), 0.0);

    let trace = fs::read_to_string(sol.join("trace.csv")).unwrap();
    assert!(trace.starts_with("k,objective,step,flops,dist,rel_err\n"));
    assert_eq!(trace.lines().count(), 1 + 41);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(sol.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["iterations"], 400);
    assert_eq!(manifests(&sim), 1);
    assert_eq!(manifests(&sol), 1);
}

#[test]
fn error_classes_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.ifn");
    let out = gwf(&["solve", "--ensemble", s(&missing), "--data", s(&missing), "--out", s(tmp.path())]);
    assert_eq!(code(&out), 2);

    let bad = tmp.path().join("bad.ifn");
    fs::write(&bad, b"NOPE and some more bytes").unwrap();
    let out = gwf(&["solve", "--ensemble", s(&bad), "--data", s(&bad), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 0"));

    assert_eq!(code(&gwf(&["gaussian", "--trials", "0", "--seed", "1", "--out", "x"])), 4);
    assert_eq!(code(&gwf(&["frobnicate"])), 4);
    assert_eq!(code(&gwf(&["theory", "--ric", "--out", s(tmp.path())])), 4);
    assert_eq!(code(&gwf(&["--help"])), 0);
    assert_eq!(code(&gwf(&["--version"])), 0);
}

#[test]
fn divergent_solve_exits_five_with_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    let sol = tmp.path().join("sol");
    ok(&["simulate", "--n", "8", "--m", "32", "--seed", "1", "--out", s(&sim)]);
    let cfg = tmp.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"max_iters": 5000, "step_schedule": {"kind": "fixed", "mu": 1e6},
            "normalize_by_init": false, "stop_tol": 0.0, "record_every": 1}"#,
    )
    .unwrap();
    let out = gwf(&[
        "solve",
        "--ensemble", s(&sim.join("ensemble.ifn")),
        "--data", s(&sim.join("data.ifd")),
        "--config", s(&cfg),
        "--out", s(&sol),
    ]);
    assert_eq!(code(&out), 5);
    assert!(sol.join("trace.csv").exists());
    assert!(sol.join("estimate.ifs").exists());
    assert_eq!(manifests(&sol), 1);
}

#[test]
fn theory_curves_table() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["theory", "--curves", "--out", s(tmp.path())]);
    let text = fs::read_to_string(tmp.path().join("figure1.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta1,epsilon,delta2,c,h");
    assert_eq!(lines.len(), 101);
    let last: Vec<f64> = lines[100].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 0.214);
    assert!((last[2] - 1.0).abs() < 0.01);
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 0.0, 0.0, 2.0, 2.0]);
}

#[test]
fn gaussian_runs_repeat_byte_for_byte_and_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |dir: &Path| {
        vec![
            "gaussian".to_string(), "--n".into(), "12".into(), "--grid".into(), "1.5,3".into(),
            "--trials".into(), "3".into(), "--iters".into(), "200".into(), "--seed".into(), "5".into(),
            "--out".into(), dir.to_str().unwrap().to_string(),
        ]
    };
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    let run = |dir: &Path| ok(&args(dir).iter().map(String::as_str).collect::<Vec<_>>());
    run(&a);
    run(&b);
    ok(&["replay", "--manifest", s(&a.join("manifest.json")), "--out", s(&c)]);
    for name in ["phase_transition_lowpass.csv", "phase_transition_gaussian.csv"] {
        let first = fs::read(a.join(name)).unwrap();
        assert_eq!(first, fs::read(b.join(name)).unwrap());
        assert_eq!(first, fs::read(c.join(name)).unwrap());
    }
    let header = fs::read_to_string(a.join("phase_transition_lowpass.csv")).unwrap();
    assert!(header.starts_with("oversampling,trials,p_success_1e5,p_success_1e3"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "gaussian");
    assert_eq!(manifest["seeds"], serde_json::json!([5]));
}

#[test]
fn paper_preset_warns_before_running() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gwf(&["radar", "--preset", "paper", "--iters", "0", "--out", s(tmp.path())]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn radar_writes_image_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("r");
    ok(&["radar", "--iters", "20", "--record-every", "5", "--out", s(&dir)]);
    for f in ["phantom.csv", "image.csv", "image.pgm", "trace.csv", "magnitude_trace.csv", "summary.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let pgm = fs::read(dir.join("image.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n12 12\n255\n"));
    assert_eq!(pgm.len(), b"P5\n12 12\n255\n".len() + 144);
    let image = fs::read_to_string(dir.join("image.csv")).unwrap();
    assert_eq!(image.lines().count(), 12);
    assert_eq!(manifests(&dir), 1);

    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"points": [{"ix": 40, "iy": 0, "amplitude": 1.0}], "rects": []}"#).unwrap();
    let out = gwf(&["radar", "--iters", "5", "--phantom", s(&bad), "--out", s(&tmp.path().join("x"))]);
    assert_eq!(code(&out), 4);
}
