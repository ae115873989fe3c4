use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use causal_averaging::config::SimulationConfig;
use causal_averaging::harness::{aggregate, run_grid, Factor};
use causal_averaging::io::write_sample;
use causal_averaging_core::synth::{
    generate_sample, CausalStructure, DgpKind, DgpSpec, EffectSize,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_causal-averaging"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn sample_file(
    dir: &Path,
    name: &str,
    kind: DgpKind,
    truth: CausalStructure,
    n: usize,
    seed: u64,
) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = generate_sample(&DgpSpec::new(kind, EffectSize::Large), truth, n, &mut rng).unwrap();
    let path = dir.join(name);
    write_sample(fs::File::create(&path).unwrap(), &s).unwrap();
    path.to_str().unwrap().to_string()
}

fn small_sim(dir: &Path, extra: &[&str]) -> String {
    let out = dir.join("sim");
    let o = out.to_str().unwrap().to_string();
    let mut args = vec![
        "simulate", "--reps", "2", "--n", "10,30,60", "--m", "10", "--seed", "3", "--out", &o,
    ];
    args.extend_from_slice(extra);
    let res = run(&args);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    o
}

#[test]
fn simulate_single_size_grid() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o");
    let res = run(&[
        "simulate",
        "--reps",
        "1",
        "--n",
        "10",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    // 1 rep x 1 n x 2 dgp x 2 effect x 2 lambda x 2 methods
    assert_eq!(runs.lines().count() - 1, 16);
    assert!(out.join("summary.csv").exists());
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 7);
    assert_eq!(manifest["config"]["sample_sizes"], serde_json::json!([10]));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o");
    let res = run(&[
        "simulate",
        "--set",
        "repz=3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    let res = run(&["simulate", "--n", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unwritable_output_fails() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let res = run(&[
        "simulate",
        "--reps",
        "1",
        "--n",
        "10",
        "--m",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let first = small_sim(dir.path(), &["--threads", "2"]);
    let manifest = format!("{first}/manifest.json");
    let second = dir.path().join("again");
    let res = run(&[
        "simulate",
        "--config",
        &manifest,
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let a = fs::read(format!("{first}/runs.csv")).unwrap();
    let b = fs::read(second.join("runs.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn discover_rejects_tiny_files() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("tiny.csv");
    fs::write(&path, "x,y\n1,2\n2,3\n3,5\n").unwrap();
    let res = run(&["discover", path.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    let res = run(&["discover", dir.path().join("missing.csv").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn single_bootstrap_gives_a_hard_vote() {
    let dir = TempDir::new().unwrap();
    let data = sample_file(
        dir.path(),
        "d.csv",
        DgpKind::Nonlinear,
        CausalStructure::Forward,
        60,
        1,
    );
    for seed in ["1", "2", "3"] {
        let v = ok_json(&[
            "discover", &data, "--method", "anm", "--m", "1", "--seed", seed,
        ]);
        let p = v["p_forward"].as_f64().unwrap();
        assert!(p == 0.0 || p == 1.0, "p = {p}");
        assert_eq!(v["m"], 1);
        assert_eq!(v["n"], 60);
        assert!(v["scores_on_full_sample"]["forward"].is_number());
    }
}

#[test]
fn discover_finds_strong_forward_signal() {
    let dir = TempDir::new().unwrap();
    let data = sample_file(
        dir.path(),
        "d.csv",
        DgpKind::Nonlinear,
        CausalStructure::Forward,
        500,
        8,
    );
    let v = ok_json(&["discover", &data, "--m", "30"]);
    assert!(v["p_forward"].as_f64().unwrap() >= 0.9, "{v}");
}

#[test]
fn zero_posterior_means_no_action() {
    let dir = TempDir::new().unwrap();
    let mut found = false;
    for seed in 0..20 {
        let data = sample_file(
            dir.path(),
            "b.csv",
            DgpKind::Nonlinear,
            CausalStructure::Backward,
            300,
            seed,
        );
        let v = ok_json(&[
            "decide",
            &data,
            "--m",
            "10",
            "--dgp-kind",
            "nonlinear",
            "--lambda",
            "0.1",
        ]);
        if v["p_forward"].as_f64().unwrap() == 0.0 {
            for pt in v["points"].as_array().unwrap() {
                assert_eq!(pt["a_ms"].as_f64().unwrap(), 0.0);
                assert_eq!(pt["a_ma"].as_f64().unwrap(), 0.0);
            }
            found = true;
            break;
        }
    }
    assert!(found, "no backward sample produced p_forward = 0");
}

#[test]
fn cheaper_intervention_gives_larger_actions() {
    let dir = TempDir::new().unwrap();
    let data = sample_file(
        dir.path(),
        "h.csv",
        DgpKind::Heteroskedastic,
        CausalStructure::Forward,
        100,
        4,
    );
    let cheap = ok_json(&[
        "decide",
        &data,
        "--m",
        "20",
        "--dgp-kind",
        "heteroskedastic",
        "--lambda",
        "0",
    ]);
    let dear = ok_json(&[
        "decide",
        &data,
        "--m",
        "20",
        "--dgp-kind",
        "heteroskedastic",
        "--lambda",
        "0.9",
    ]);
    assert_eq!(cheap["p_forward"], dear["p_forward"]);
    assert!(cheap["p_forward"].as_f64().unwrap() > 0.0);
    let (a, b) = (
        cheap["points"].as_array().unwrap(),
        dear["points"].as_array().unwrap(),
    );
    assert_eq!(a.len(), 100);
    for (pa, pb) in a.iter().zip(b) {
        assert!(pa["a_ma"].as_f64().unwrap().abs() > pb["a_ma"].as_f64().unwrap().abs());
        assert_eq!(pa["effect_hat"], pb["effect_hat"]);
    }
}

#[test]
fn decide_requires_dgp_kind() {
    let dir = TempDir::new().unwrap();
    let data = sample_file(
        dir.path(),
        "h.csv",
        DgpKind::Heteroskedastic,
        CausalStructure::Forward,
        20,
        4,
    );
    let res = run(&["decide", &data]);
    assert_eq!(res.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&res.stderr);
    assert!(
        msg.contains("heteroskedastic") && msg.contains("nonlinear"),
        "{msg}"
    );
    let res = run(&["decide", &data, "--dgp-kind", "cubic"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn report_outputs_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let sim = small_sim(dir.path(), &[]);
    let rep = dir.path().join("rep");
    let res = run(&[
        "report",
        "--runs",
        &format!("{sim}/runs.csv"),
        "--out",
        rep.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );

    for fig in ["delta_hist", "delta_vs_n", "effect_method", "lambda_method"] {
        let text = fs::read_to_string(rep.join(format!("{fig}.svg"))).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap_or_else(|e| panic!("{fig}: {e}"));
        assert_eq!(doc.root_element().tag_name().name(), "svg");
    }

    let by_method = fs::read_to_string(rep.join("by_method.csv")).unwrap();
    let keys: BTreeSet<&str> = by_method
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(keys, BTreeSet::from(["ANM", "Regression"]));

    let tests: Value =
        serde_json::from_str(&fs::read_to_string(rep.join("tests.json")).unwrap()).unwrap();
    assert_eq!(tests["runs"]["total"], 96);
    assert!(tests["overall"]["p"].is_number());
    assert!(tests["trend"]["slope"].is_number());

    // same grid in process
    let cfg = SimulationConfig {
        sample_sizes: vec![10, 30, 60],
        reps: 2,
        bootstrap_m: 10,
        master_seed: 3,
        ..Default::default()
    };
    let records = run_grid(&cfg).unwrap();
    for (file, factors) in [
        ("by_method.csv", &[Factor::Method][..]),
        (
            "by_effect_method.csv",
            &[Factor::Effect, Factor::Method][..],
        ),
        (
            "by_lambda_method.csv",
            &[Factor::Lambda, Factor::Method][..],
        ),
    ] {
        let expected = aggregate(&records, factors).unwrap();
        let text = fs::read_to_string(rep.join(file)).unwrap();
        let rows: Vec<Vec<&str>> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').collect())
            .collect();
        assert_eq!(rows.len(), expected.len());
        for (row, s) in rows.iter().zip(&expected) {
            let k = factors.len();
            for (i, (_, v)) in s.keys.iter().enumerate() {
                assert_eq!(row[i], v);
            }
            assert_eq!(row[k].parse::<usize>().unwrap(), s.n_runs);
            let close = |txt: &str, v: Option<f64>| match v {
                Some(v) => assert!((txt.parse::<f64>().unwrap() - v).abs() <= 1e-12),
                None => assert!(txt.is_empty()),
            };
            close(row[k + 1], Some(s.mean_delta));
            close(row[k + 2], s.sd_delta);
            close(row[k + 3], s.se_delta);
        }
    }
}

#[test]
fn empty_runs_file_is_an_error() {
    let dir = TempDir::new().unwrap();
    let header = dir.path().join("header_only.csv");
    fs::write(
        &header,
        "n,dgp,effect,lambda,method,rep,truth,p_forward,loss_ms,loss_ma,delta_l,seed,status\n",
    )
    .unwrap();
    let blank = dir.path().join("blank.csv");
    fs::write(&blank, "").unwrap();
    for f in [&header, &blank] {
        let res = run(&[
            "report",
            "--runs",
            f.to_str().unwrap(),
            "--out",
            dir.path().join("r").to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(3), "{}", f.display());
    }
}
