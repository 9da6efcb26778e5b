use std::path::Path;
use std::process::{Command, Output};

fn owmm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_owmm"))
        .current_dir(dir)
        .env_remove("OWMM_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn read(p: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

fn pipeline(dir: &Path) {
    let steps: [&[&str]; 7] = [
        &["gen-scenes", "--seed", "3", "--count", "3", "--out", "scenes"],
        &["run-episodes", "--scenes", "scenes", "--episodes", "3", "--out", "traces.jsonl", "--parallel", "3"],
        &["synth-data", "--scenes", "scenes", "--episodes", "4", "--out", "data", "--parallel", "2"],
        &["predict", "--records", "data/test.jsonl", "--scenes", "scenes", "--policy", "noisy:20,0.1,4", "--out", "pred.jsonl"],
        &["eval-single", "--records", "data/test.jsonl", "--predictions", "pred.jsonl", "--out", "single.json"],
        &["eval-episodic", "--traces", "traces.jsonl", "--strict", "--out", "strict.json"],
        &["eval-episodic", "--traces", "traces.jsonl", "--lenient", "--out", "lenient.json"],
    ];
    for s in steps {
        let o = owmm(dir, s);
        assert_eq!(code(&o), 0, "{s:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn pipeline_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    pipeline(a.path());
    pipeline(b.path());
    for f in [
        "scenes/scene-00003.json",
        "scenes/scene-00005.json",
        "traces.jsonl",
        "data/train.jsonl",
        "data/test.jsonl",
        "data/manifest.json",
        "pred.jsonl",
        "single.json",
        "strict.json",
        "lenient.json",
    ] {
        assert_eq!(read(a.path().join(f)), read(b.path().join(f)), "{f} differs");
    }
    let m: serde_json::Value = serde_json::from_slice(&read(a.path().join("data/manifest.json"))).unwrap();
    assert_eq!(m["train"]["per_kind"].as_object().unwrap().len(), 4);
    assert!(m["yield_stats"]["valid"].as_u64().unwrap() > 0);
}

#[test]
fn parallelism_does_not_change_outputs() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(code(&owmm(p, &["gen-scenes", "--count", "2", "--out", "s"])), 0);
    for n in ["1", "4"] {
        let out = format!("t{n}.jsonl");
        let o = owmm(p, &["run-episodes", "--scenes", "s", "--episodes", "4", "--out", &out, "--parallel", n]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(read(p.join("t1.jsonl")), read(p.join("t4.jsonl")));
}

#[test]
fn seed_env_overrides_flag() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let run = |env: Option<&str>, seed: &str, out: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_owmm"));
        c.current_dir(p).env_remove("OWMM_SEED");
        if let Some(v) = env {
            c.env("OWMM_SEED", v);
        }
        let o = c.args(["gen-scenes", "--seed", seed, "--count", "1", "--out", out]).output().unwrap();
        assert_eq!(code(&o), 0);
    };
    run(None, "7", "a");
    run(Some("7"), "1", "b");
    assert!(p.join("b/scene-00007.json").exists());
    assert_eq!(read(p.join("a/scene-00007.json")), read(p.join("b/scene-00007.json")));
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(code(&owmm(p, &["gen-scenes", "--count", "0", "--out", "s"])), 1);
    assert_eq!(code(&owmm(p, &["gen-scenes", "--count", "1", "--out", "s", "--nope"])), 1);
    assert_eq!(code(&owmm(p, &["run-episodes", "--scenes", "s", "--out", "t", "--policy", "noisy:x"])), 1);
    assert_eq!(code(&owmm(p, &["--help"])), 0);
    assert_eq!(code(&owmm(p, &["gen-scenes", "--count", "2", "--out", "s"])), 0);

    let dead = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let url = format!("remote:http://127.0.0.1:{dead}/decide");
    let o = owmm(p, &["run-episodes", "--scenes", "s", "--episodes", "1", "--policy", &url, "--remote-retries", "0", "--out", "r.jsonl"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("transport"));

    let scene: serde_json::Value = serde_json::from_slice(&read(p.join("s/scene-00000.json"))).unwrap();
    let labels: Vec<&serde_json::Value> = scene["objects"].as_array().unwrap().iter().map(|o| &o["label"]).collect();
    let split = serde_json::json!({"test_scenes": ["scene-00001"], "test_object_labels": labels});
    std::fs::write(p.join("split.json"), split.to_string()).unwrap();
    let o = owmm(p, &["synth-data", "--scenes", "s", "--episodes", "2", "--out", "leak2", "--split", "split.json"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("leakage"));
    assert!(!p.join("leak2").exists());

    std::fs::write(p.join("bad.jsonl"), "{not a record}\n").unwrap();
    std::fs::write(p.join("pred.jsonl"), "").unwrap();
    let o = owmm(p, &["eval-single", "--records", "bad.jsonl", "--predictions", "pred.jsonl"]);
    assert_eq!(code(&o), 3);
    std::fs::write(p.join("bad_trace.jsonl"), "{\"type\":\"step\"}\n").unwrap();
    assert_eq!(code(&owmm(p, &["eval-episodic", "--traces", "bad_trace.jsonl"])), 3);
}

#[test]
fn oracle_predictions_score_perfectly() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    for s in [
        &["gen-scenes", "--seed", "11", "--count", "2", "--out", "s"][..],
        &["synth-data", "--scenes", "s", "--episodes", "5", "--out", "data"],
        &["predict", "--records", "data/train.jsonl", "--scenes", "s", "--out", "pred.jsonl"],
        &["eval-single", "--records", "data/train.jsonl", "--predictions", "pred.jsonl", "--out", "r.json"],
    ] {
        assert_eq!(code(&owmm(p, s)), 0, "{s:?}");
    }
    let r: serde_json::Value = serde_json::from_slice(&read(p.join("r.json"))).unwrap();
    assert_eq!(r["single"]["decision_accuracy"].as_f64(), Some(1.0));
    assert_eq!(r["single"]["retrieval_accuracy"].as_f64(), Some(1.0));
    assert!(r["single"]["grounding"]["all"]["mean"].as_f64().unwrap() >= 0.99);
}
