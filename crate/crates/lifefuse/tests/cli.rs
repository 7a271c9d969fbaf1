use std::path::Path;
use std::process::{Command, Output};

use lifefuse::streams::read_streams;
use lifefuse_core::dsp::make_windows;

fn lifefuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lifefuse"))
        .args(args)
        .env_remove("LIFEFUSE_SEED")
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    format!("paths.output={}", dir.display())
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_streams_that_give_936_windows() {
    let dir = tempfile::tempdir().unwrap();
    let o = lifefuse(&["simulate", "-q", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in [
        "streams.csv",
        "echo_present.bin",
        "echo_present.json",
        "echo_absent.bin",
        "manifest.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let streams = read_streams(&dir.path().join("streams.csv")).unwrap();
    assert_eq!(streams.len(), 1000);
    assert_eq!(make_windows(&streams, 64, 5).unwrap().len(), 936);
}

#[test]
fn unknown_override_key_exits_2_and_names_it() {
    let o = lifefuse(&["simulate", "fusion.hiden=3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fusion.hiden"), "{}", stderr(&o));
}

#[test]
fn invalid_values_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        "fusion.conv_kernel=4",
        "fusion.keep_prob=0",
        "threshold=2",
        "fusion.window=nope",
    ] {
        let o = lifefuse(&["simulate", "-q", &out_arg(dir.path()), bad]);
        assert_eq!(o.status.code(), Some(2), "{bad}: {}", stderr(&o));
    }
    let o = lifefuse(&["simulate", "--preset", "huge"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lifefuse(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_key_in_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"scenario": {"sede": 1}}"#).unwrap();
    let o = lifefuse(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scenario.sede"), "{}", stderr(&o));
}

#[test]
fn missing_checkpoint_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = lifefuse(&["eval", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn report_without_inputs_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = lifefuse(&["report", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn env_seed_changes_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, sub: &str| {
        let d = dir.path().join(sub);
        let o = Command::new(env!("CARGO_BIN_EXE_lifefuse"))
            .args(["simulate", "-q", &out_arg(&d)])
            .env("LIFEFUSE_SEED", seed)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(d.join("streams.csv")).unwrap()
    };
    assert_eq!(run("5", "a"), run("5", "b"));
    assert_ne!(run("5", "a"), run("6", "c"));
}

/// Same configuration twice: identical artifacts, and the train / eval /
/// report chain runs from the written checkpoint.
#[test]
fn reruns_are_byte_identical_and_chain() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["--preset", "desk", "-q", "fusion.epochs=2"];
    let mut hashes = Vec::new();
    for sub in ["a", "b"] {
        let d = dir.path().join(sub);
        let mut args = vec!["train-fusion"];
        args.extend(base);
        let out = out_arg(&d);
        args.push(&out);
        let o = lifefuse(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        hashes.push(["history.csv", "fusion.ckpt", "loss.svg"].map(|f| std::fs::read(d.join(f)).unwrap()));
    }
    assert!(hashes[0] == hashes[1], "reruns differ");

    let d = dir.path().join("a");
    let out = out_arg(&d);
    let o = lifefuse(&["eval", "-q", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let metrics: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["test_windows"], 124);
    let auc = metrics["fusion"]["roc_auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));
    let preds = std::fs::read_to_string(d.join("predictions.csv")).unwrap();
    assert!(preds.starts_with("t,pred,truth\n"));
    assert_eq!(preds.lines().count(), 125);

    let o = lifefuse(&["report", "-q", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(d.join("fit.svg").exists());
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "report");
    assert!(manifest["artifacts"]["fit.svg"].is_string());
}
