//! End-to-end tests that drive the `shortguard` binary the way a user would:
//! every subcommand, the exit-code contract, and output determinism.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shortguard"))
}

fn run_ok(cmd: &mut Command) -> String {
    let output = cmd.output().expect("spawns");
    assert!(
        output.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).expect("utf-8 stdout")
}

fn run_err(cmd: &mut Command) -> (i32, serde_json::Value) {
    let Output { status, stderr, .. } = cmd.output().expect("spawns");
    let code = status.code().expect("exits with a code");
    let text = String::from_utf8(stderr).expect("utf-8 stderr");
    let line = text.lines().last().unwrap_or("");
    let detail: serde_json::Value = serde_json::from_str(line)
        .unwrap_or_else(|e| panic!("stderr is not one JSON line ({e}): {text}"));
    (code, detail)
}

/// Generate a small corpus once and reuse it across stages.
fn generate(out: &Path, benign: usize, malicious: usize, seed: u64) {
    run_ok(bin()
        .arg("--out")
        .arg(out)
        .arg("--seed")
        .arg(seed.to_string())
        .args(["generate", "--benign"])
        .arg(benign.to_string())
        .arg("--malicious")
        .arg(malicious.to_string()));
}

#[test]
fn full_workflow_produces_all_stage_artifacts() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    generate(out, 60, 60, 7);
    assert!(out.join("corpus/links.jsonl").exists());
    assert!(out.join("corpus/MANIFEST.json").exists());
    assert!(out.join("fixtures/probes.jsonl").exists());
    assert!(out.join("truth.jsonl").exists());

    let msg = run_ok(bin()
        .arg("--out")
        .arg(out)
        .args(["label", "--corpus"])
        .arg(out.join("corpus"))
        .arg("--fixtures")
        .arg(out.join("fixtures")));
    assert!(msg.contains("labeled 120 links"), "{msg}");

    run_ok(bin()
        .arg("--out")
        .arg(out)
        .args(["features", "--corpus"])
        .arg(out.join("corpus"))
        .arg("--labels")
        .arg(out.join("labels.jsonl")));
    let header = std::fs::read_to_string(out.join("features.csv")).unwrap();
    assert!(header.starts_with("link_id,schema,domain_age,"), "{header}");

    run_ok(bin()
        .arg("--out")
        .arg(out)
        .args(["train", "--features"])
        .arg(out.join("features.csv"))
        .args(["--classifier", "RF", "--trees", "15"]));
    assert!(out.join("model.json").exists());

    let eval = run_ok(bin()
        .arg("--out")
        .arg(out)
        .args(["eval", "--features"])
        .arg(out.join("features.csv"))
        .arg("--model")
        .arg(out.join("model.json")));
    let eval: serde_json::Value = serde_json::from_str(&eval).unwrap();
    let confusion = &eval["confusion"];
    let total = ["tp", "fp", "tn", "fn"]
        .iter()
        .map(|k| confusion[k].as_u64().unwrap())
        .sum::<u64>();
    assert_eq!(total, 120);
    assert!(eval["metrics"]["accuracy"].as_f64().unwrap() > 0.5);

    let cv = run_ok(bin()
        .arg("--out")
        .arg(out)
        .args(["crossval", "--features"])
        .arg(out.join("features.csv"))
        .args(["--classifier", "NB", "--k", "3"]));
    let cv: serde_json::Value = serde_json::from_str(&cv).unwrap();
    assert_eq!(cv["folds"].as_array().unwrap().len(), 3);
    assert!(cv["mean_accuracy"].as_f64().unwrap() > 0.5);

    let ranking = run_ok(bin()
        .arg("--out")
        .arg(out)
        .args(["rank", "--features"])
        .arg(out.join("features.csv")));
    assert_eq!(ranking.lines().count(), 7);
    assert!(ranking.starts_with("1. "), "{ranking}");

    let profile = run_ok(bin()
        .arg("--out")
        .arg(out)
        .args(["profile", "--corpus"])
        .arg(out.join("corpus")));
    assert!(profile.contains("profiled"), "{profile}");
    assert!(out.join("suspicion.jsonl").exists());
    let overlap: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("overlap.json")).unwrap()).unwrap();
    assert!(overlap["accounts"].is_array());
    let timeline = std::fs::read_dir(out)
        .unwrap()
        .filter_map(|e| e.ok())
        .find(|e| e.file_name().to_string_lossy().starts_with("timeline_"))
        .expect("at least one timeline file");
    let timeline = std::fs::read_to_string(timeline.path()).unwrap();
    assert!(timeline.starts_with("month,links,clicks\n"), "{timeline}");

    run_ok(bin()
        .arg("--out")
        .arg(out)
        .args(["probe", "--corpus"])
        .arg(out.join("corpus"))
        .arg("--fixtures")
        .arg(out.join("fixtures")));
    let probe: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("probe.json")).unwrap()).unwrap();
    assert_eq!(probe["links"]["total"].as_u64().unwrap(), 120);
    let states = ["active", "warning", "dead"]
        .iter()
        .map(|k| probe["links"][k].as_u64().unwrap())
        .sum::<u64>();
    assert_eq!(states, 120);
}

#[test]
fn pipeline_runs_and_report_merges_columns() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    generate(out, 60, 60, 11);

    for (sub, classifier) in [("run_nb", "NB"), ("run_dt", "DT")] {
        let msg = run_ok(bin()
            .arg("--out")
            .arg(out.join(sub))
            .args(["--seed", "11", "pipeline", "--corpus"])
            .arg(out.join("corpus"))
            .arg("--fixtures")
            .arg(out.join("fixtures"))
            .args(["--classifier", classifier, "--cv-k", "3"]));
        assert!(msg.contains("FULL_ALL_FEATURES"), "{msg}");
        for file in ["report.json", "report.txt", "model.json", "features.csv"] {
            assert!(out.join(sub).join(file).exists(), "missing {file}");
        }
    }

    let table = run_ok(bin()
        .arg("--out")
        .arg(out)
        .arg("report")
        .arg(out.join("run_nb/report.json"))
        .arg(out.join("run_dt/report.json")));
    assert!(table.contains("Evaluation Metric"), "{table}");
    assert!(table.contains("Naive Bayes"), "{table}");
    assert!(table.contains("Decision Tree"), "{table}");
    for row in [
        "Accuracy",
        "Recall (malicious)",
        "Recall (Benign)",
        "Precision (malicious)",
        "Precision (Benign)",
        "F-measure (malicious)",
        "F-measure (benign)",
    ] {
        assert!(table.contains(row), "missing row {row:?}");
    }
    let written = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert_eq!(written, table);
}

#[test]
fn exit_codes_follow_the_error_contract() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    generate(out, 30, 30, 3);

    // Missing input file or directory: 2.
    let (code, detail) = run_err(bin()
        .arg("--out")
        .arg(out)
        .args(["label", "--corpus"])
        .arg(out.join("missing"))
        .arg("--fixtures")
        .arg(out.join("fixtures")));
    assert_eq!(code, 2);
    assert_eq!(detail["exit_code"], 2);
    assert!(detail["error"].is_string());

    // Live lookups are not available: 5.
    let (code, detail) = run_err(bin()
        .arg("--live")
        .arg("--out")
        .arg(out)
        .args(["probe", "--corpus"])
        .arg(out.join("corpus"))
        .arg("--fixtures")
        .arg(out.join("fixtures")));
    assert_eq!(code, 5);
    assert!(detail["error"].as_str().unwrap().contains("fixtures only"));

    // Invalid parameters: 1.
    let (code, _) = run_err(bin()
        .arg("--out")
        .arg(out.join("errdir"))
        .args(["--experiment", "BOGUS", "pipeline", "--corpus"])
        .arg(out.join("corpus"))
        .arg("--fixtures")
        .arg(out.join("fixtures")));
    assert_eq!(code, 1);
    // A failed pipeline run also leaves a machine-readable error.json.
    let err: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("errdir/error.json")).unwrap())
            .unwrap();
    assert_eq!(err["exit_code"], 1);

    // Feature schema mismatch between model and dataset: 3.
    run_ok(bin()
        .arg("--out")
        .arg(out)
        .args(["label", "--corpus"])
        .arg(out.join("corpus"))
        .arg("--fixtures")
        .arg(out.join("fixtures")));
    run_ok(bin()
        .arg("--out")
        .arg(out)
        .args(["features", "--corpus"])
        .arg(out.join("corpus"))
        .arg("--labels")
        .arg(out.join("labels.jsonl")));
    run_ok(bin()
        .arg("--out")
        .arg(out)
        .args(["train", "--features"])
        .arg(out.join("features.csv"))
        .args(["--classifier", "DT"]));
    let nonclick = out.join("nonclick");
    run_ok(bin()
        .arg("--out")
        .arg(&nonclick)
        .args(["--schema", "NON_CLICK", "features", "--corpus"])
        .arg(out.join("corpus"))
        .arg("--labels")
        .arg(out.join("labels.jsonl")));
    let (code, detail) = run_err(bin()
        .arg("--out")
        .arg(out)
        .args(["eval", "--features"])
        .arg(nonclick.join("features.csv"))
        .arg("--model")
        .arg(out.join("model.json")));
    assert_eq!(code, 3);
    assert_eq!(detail["exit_code"], 3);

    // A mismatched --schema/--experiment pairing is refused before running.
    let (code, detail) = run_err(bin()
        .arg("--out")
        .arg(out.join("errdir2"))
        .args(["--schema", "NON_CLICK", "pipeline", "--corpus"])
        .arg(out.join("corpus"))
        .arg("--fixtures")
        .arg(out.join("fixtures")));
    assert_eq!(code, 1);
    assert!(detail["error"].as_str().unwrap().contains("FULL"));
}

#[test]
fn generation_is_seed_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    generate(&a, 40, 40, 5);
    generate(&b, 40, 40, 5);
    generate(&c, 40, 40, 6);
    let read = |p: &Path| std::fs::read(p.join("corpus/links.jsonl")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn pipeline_output_is_independent_of_jobs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    generate(out, 50, 50, 19);
    for (sub, jobs) in [("j1", "1"), ("j8", "8")] {
        run_ok(bin()
            .arg("--out")
            .arg(out.join(sub))
            .args(["--seed", "19", "--jobs", jobs, "pipeline", "--corpus"])
            .arg(out.join("corpus"))
            .arg("--fixtures")
            .arg(out.join("fixtures"))
            .args(["--classifier", "RF", "--trees", "25", "--cv-k", "4"]));
    }
    let read = |sub: &str| std::fs::read(out.join(sub).join("report.json")).unwrap();
    assert_eq!(read("j1"), read("j8"));
}

#[test]
fn nonclick_experiments_use_the_reduced_schema() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    generate(out, 80, 80, 23);
    for (sub, experiment) in [
        ("subset", "NONCLICK_SUBSET"),
        ("allrows", "FULL_NONCLICK_FEATURES"),
    ] {
        let msg = run_ok(bin()
            .arg("--out")
            .arg(out.join(sub))
            .args(["--seed", "23", "--experiment", experiment, "pipeline", "--corpus"])
            .arg(out.join("corpus"))
            .arg("--fixtures")
            .arg(out.join("fixtures"))
            .args(["--classifier", "DT", "--cv-k", "3"]));
        assert!(msg.contains(experiment), "{msg}");
        let csv = std::fs::read_to_string(out.join(sub).join("features.csv")).unwrap();
        let header = csv.lines().next().unwrap();
        assert!(!header.contains("click_lag"), "{header}");
        assert!(!header.contains("direct_ratio"), "{header}");
    }
}
