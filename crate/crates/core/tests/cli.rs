use std::path::Path;
use std::process::{Command, Output};

fn sarcasm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sarcasm"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Writes the fixture and a config pointing at it; returns the config path.
fn fixture(dir: &Path) -> String {
    let o = sarcasm(&["generate", "--kind", "riloff", "--dir", "data"], dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = "out_dir = \"out\"\n\n[data]\ndataset = \"data/riloff_fixture.jsonl\"\nhistories = \"data/riloff_fixture.histories.jsonl\"\n";
    std::fs::write(dir.join("run.toml"), cfg).unwrap();
    "run.toml".into()
}

#[test]
fn missing_dataset_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = sarcasm(&["ingest", "--set", "data.dataset=nope.jsonl"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.jsonl"));
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&sarcasm(&["--config", "absent.toml", "split"], dir.path())), 2);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    assert_eq!(
        code(&sarcasm(
            &["--config", &cfg, "--set", "train.colour=red", "split"],
            dir.path()
        )),
        2
    );
}

#[test]
fn unknown_method_and_model_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    assert_eq!(code(&sarcasm(&["--config", &cfg, "split"], dir.path())), 0);
    assert_eq!(
        code(&sarcasm(&["--config", &cfg, "embed", "--method", "bert"], dir.path())),
        2
    );
    assert_eq!(
        code(&sarcasm(
            &["--config", &cfg, "train-eval", "--model", "ex-bert"],
            dir.path()
        )),
        2
    );
    assert_eq!(
        code(&sarcasm(
            &["--config", &cfg, "train-eval", "--model", "svm"],
            dir.path()
        )),
        2
    );
}

#[test]
fn stages_out_of_order_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    assert_eq!(code(&sarcasm(&["--config", &cfg, "embed"], dir.path())), 2);
    assert_eq!(code(&sarcasm(&["--config", &cfg, "table"], dir.path())), 2);
}

#[test]
fn malformed_dataset_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.jsonl"), "{not json}\n").unwrap();
    assert_eq!(
        code(&sarcasm(&["ingest", "--set", "data.dataset=bad.jsonl"], dir.path())),
        1
    );
}

#[test]
fn ingest_split_analyze_on_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    let o = sarcasm(&["--config", &cfg, "ingest"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).contains("701 tweets, 192 sarcastic, 509 non-sarcastic"),
        "{}",
        stdout(&o)
    );

    let o = sarcasm(&["--config", &cfg, "split"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("out/split_manifest.jsonl").is_file());
    assert!(dir.path().join("out/sidecars/split.json").is_file());

    let o = sarcasm(&["--config", &cfg, "analyze"], dir.path());
    assert_eq!(code(&o), 0);
    let table: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/analysis/disagreement.json")).unwrap())
            .unwrap();
    let text = table.to_string();
    for n in ["190", "217", "292"] {
        assert!(text.contains(n), "{text}");
    }
}

#[test]
fn seed_flag_changes_the_split() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    let run = |seed: &str, out: &str| {
        let o = sarcasm(&["--config", &cfg, "--seed", seed, "--out", out, "split"], dir.path());
        assert_eq!(code(&o), 0);
        std::fs::read_to_string(dir.path().join(out).join("split_manifest.jsonl")).unwrap()
    };
    let a = run("1", "a");
    assert_eq!(a, run("1", "b"));
    assert_ne!(a, run("2", "c"));
}
