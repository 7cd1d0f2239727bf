//! Drives the real binary through the whole pipeline on a small synthetic
//! dump, and pins the exit-code contract: 0 success, 2 usage, 3 missing
//! prerequisite, 4 data error.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use archminer_core::corpus::write_labels_jsonl;
use archminer_core::synth::synthetic_dump;

fn write_fixture(dir: &Path) -> PathBuf {
    let dump = synthetic_dump(7, 12, 28);
    std::fs::write(dir.join("dump.xml"), &dump.xml).unwrap();
    let mut labels = Vec::new();
    write_labels_jsonl(&dump.labels, &mut labels).unwrap();
    std::fs::write(dir.join("labels.jsonl"), labels).unwrap();
    let config = "\
seed = 42
format = \"se_xml\"

[paths]
dump = \"dump.xml\"
labels = \"labels.jsonl\"
out = \"artifacts\"
";
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, config).unwrap();
    config_path
}

fn archminer(config: &Path, args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_archminer"));
    cmd.arg("--config").arg(config).arg("--epoch").arg("1700000000");
    cmd.args(args);
    cmd
}

fn run_ok(config: &Path, args: &[&str]) -> Output {
    let output = archminer(config, args).output().unwrap();
    assert!(
        output.status.success(),
        "archminer {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn run_expect(config: &Path, args: &[&str], code: i32) -> String {
    let output = archminer(config, args).output().unwrap();
    assert_eq!(
        output.status.code(),
        Some(code),
        "archminer {args:?}:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Runs `review` with a scripted stdin and returns its stdout.
fn run_review(config: &Path, annotator: &str, script: &str, extra: &[&str]) -> String {
    let mut cmd = archminer(config, &["review", "--annotator", annotator]);
    cmd.args(extra);
    cmd.stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    let mut child = cmd.spawn().unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(script.as_bytes())
        .unwrap();
    let output = child.wait_with_output().unwrap();
    assert!(
        output.status.success(),
        "review ({annotator}) failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_fixture(dir.path());
    let artifacts = dir.path().join("artifacts");

    run_ok(&config, &["ingest"]);
    for name in ["corpus.jsonl", "tokens.jsonl", "dict_tokens.jsonl", "ingest_stats.json"] {
        assert!(artifacts.join(name).exists(), "{name} missing after ingest");
    }

    run_ok(&config, &["embed"]);
    run_ok(&config, &["dict-expand"]);
    run_ok(&config, &["vectorize"]);
    run_ok(&config, &["train", "--all"]);
    for algo in ["svm", "bayes", "dt", "lr", "rf", "bagging"] {
        assert!(artifacts.join(format!("model-{algo}.json")).exists());
    }

    run_ok(&config, &["classify"]);
    let predictions = std::fs::read_to_string(artifacts.join("predictions.jsonl")).unwrap();
    assert!(!predictions.trim().is_empty(), "classify produced no predictions");

    run_ok(&config, &["evaluate"]);
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(artifacts.join("metrics.json")).unwrap())
            .unwrap();
    assert!(metrics.get("svm").is_some(), "metrics.json lacks the svm row");

    run_ok(&config, &["evaluate", "--ablation"]);
    assert!(artifacts.join("ablation.json").exists());
    assert!(artifacts.join("ablation.md").exists());

    // Two annotators accept everything; the second skips polarity prompts.
    let accept_all = "y\np\n".repeat(200);
    run_review(&config, "ann-a", &accept_all, &[]);
    let accept_skip = "y\ns\n".repeat(200);
    run_review(&config, "ann-b", &accept_skip, &[]);

    run_ok(&config, &["evaluate", "--kappa", "ann-a", "ann-b"]);
    let kappa: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(artifacts.join("kappa.json")).unwrap())
            .unwrap();
    assert_eq!(kappa["kappa"].as_f64().unwrap(), 1.0, "identical verdicts must agree fully");
    assert!(kappa["common_posts"].as_u64().unwrap() >= 2);

    run_ok(&config, &["relate"]);
    let matrix = std::fs::read_to_string(artifacts.join("matrix.csv")).unwrap();
    assert!(matrix.contains("Heartbeat"), "matrix.csv lacks tactic rows");
    assert!(artifacts.join("ledger.csv").exists());

    run_ok(&config, &["diff-lit"]);
    assert!(artifacts.join("diff.json").exists());
    assert!(artifacts.join("diff.md").exists());

    run_ok(&config, &["export-graph"]);
    assert!(artifacts.join("network.gexf").exists());
    assert!(artifacts.join("network.dot").exists());

    run_ok(&config, &["report"]);
    let report = std::fs::read_to_string(artifacts.join("report.md")).unwrap();
    for heading in [
        "## Corpus",
        "## Classifier metrics",
        "## Dictionary ablation",
        "## Review",
        "## Inter-annotator agreement",
        "## Interaction matrix",
        "## Polarity ledger",
        "## Literature comparison",
    ] {
        assert!(report.contains(heading), "report.md lacks {heading:?}");
    }

    // Every subcommand left a manifest behind.
    for command in [
        "ingest", "embed", "dict-expand", "vectorize", "train", "classify", "evaluate",
        "evaluate-ablation", "evaluate-kappa", "review", "relate", "diff-lit", "export-graph",
        "report",
    ] {
        assert!(
            artifacts.join("manifests").join(format!("{command}.json")).exists(),
            "missing manifest for {command}"
        );
    }
}

#[test]
fn review_sessions_are_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_fixture(dir.path());
    run_ok(&config, &["ingest"]);
    run_ok(&config, &["embed"]);
    run_ok(&config, &["dict-expand"]);
    run_ok(&config, &["vectorize"]);
    run_ok(&config, &["train", "--algo", "svm"]);
    run_ok(&config, &["classify"]);

    let script = "y\np\np\np\np\n";
    let first = run_review(&config, "ann-a", script, &["--limit", "1"]);
    assert!(first.contains("[1/1] post "), "first session shows one post:\n{first}");
    let verdicts = |dir: &Path| {
        std::fs::read_to_string(dir.join("artifacts/verdicts.jsonl"))
            .unwrap()
            .lines()
            .count()
    };
    assert_eq!(verdicts(dir.path()), 1);

    // The next session must start at the second post, not repeat the first.
    let second = run_review(&config, "ann-a", script, &["--limit", "1"]);
    assert!(second.contains("1 already reviewed by ann-a"), "{second}");
    assert_eq!(verdicts(dir.path()), 2);

    // A different annotator still sees the full queue.
    let other = run_review(&config, "ann-b", "q\n", &[]);
    assert!(other.contains("0 already reviewed by ann-b"), "{other}");
    assert_eq!(verdicts(dir.path()), 2, "quitting immediately records nothing");
}

#[test]
fn missing_prerequisites_name_their_producer() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_fixture(dir.path());

    let stderr = run_expect(&config, &["embed"], 3);
    assert!(stderr.contains("archminer ingest"), "{stderr}");

    run_ok(&config, &["ingest"]);
    let stderr = run_expect(&config, &["dict-expand"], 3);
    assert!(stderr.contains("archminer embed"), "{stderr}");

    let stderr = run_expect(&config, &["train"], 3);
    assert!(stderr.contains("archminer vectorize"), "{stderr}");

    let stderr = run_expect(&config, &["relate"], 3);
    assert!(stderr.contains("archminer review"), "{stderr}");

    let stderr = run_expect(&config, &["diff-lit"], 3);
    assert!(stderr.contains("archminer relate"), "{stderr}");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_fixture(dir.path());

    let stderr = run_expect(&config, &["train", "--algo", "perceptron"], 2);
    assert!(stderr.contains("unknown algorithm"), "{stderr}");

    // Clap rejects --kappa with a single annotator.
    run_expect(&config, &["evaluate", "--kappa", "only-one"], 2);
    // ... and --ablation combined with --kappa.
    run_expect(&config, &["evaluate", "--ablation", "--kappa", "a", "b"], 2);

    // No dump anywhere: neither flag nor config.
    let bare = dir.path().join("bare.toml");
    std::fs::write(&bare, "seed = 1\n").unwrap();
    let stderr = run_expect(&bare, &["ingest"], 2);
    assert!(stderr.contains("no dump file"), "{stderr}");

    // Unknown configuration keys are rejected up front.
    let typo = dir.path().join("typo.toml");
    std::fs::write(&typo, "sede = 1\n").unwrap();
    run_expect(&typo, &["ingest"], 2);
}

#[test]
fn malformed_rows_are_skipped_leniently_and_fatal_strictly() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_fixture(dir.path());
    std::fs::write(dir.path().join("dump.xml"), "<posts><row Id=\"broken\"</posts>").unwrap();

    // The default lenient mode counts the bad row and keeps going.
    run_ok(&config, &["ingest"]);
    let stats: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("artifacts/ingest_stats.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(stats["malformed_rows"].as_u64(), Some(1));
    assert_eq!(stats["posts_parsed"].as_u64(), Some(0));

    // Strict mode turns the same row into a data error.
    let config_text = std::fs::read_to_string(&config).unwrap();
    std::fs::write(&config, format!("strict = true\n{config_text}")).unwrap();
    run_expect(&config, &["ingest"], 4);
}

#[test]
fn stale_models_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_fixture(dir.path());
    run_ok(&config, &["ingest"]);
    run_ok(&config, &["embed"]);
    run_ok(&config, &["dict-expand"]);
    run_ok(&config, &["vectorize"]);
    run_ok(&config, &["train", "--algo", "svm"]);

    // Refit the vectorizer under a different selection rule: the trained
    // model no longer matches the feature space.
    let config_text = std::fs::read_to_string(&config).unwrap();
    let narrowed = format!("{config_text}\n[selection]\ntop_k = 5\n");
    std::fs::write(&config, narrowed).unwrap();
    run_ok(&config, &["vectorize"]);

    let stderr = run_expect(&config, &["classify"], 3);
    assert!(stderr.contains("stale"), "{stderr}");
    let stderr = run_expect(&config, &["evaluate"], 3);
    assert!(stderr.contains("stale"), "{stderr}");

    // Retraining clears the mismatch.
    run_ok(&config, &["train", "--algo", "svm"]);
    run_ok(&config, &["classify"]);
}
