//! End-to-end tests against the compiled binary: exit codes, error
//! wording, config merging, and byte-identical reruns.

use std::io::Write;
use std::process::{Command, Output};

fn kis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kis"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn temp_file(contents: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(contents.as_bytes()).unwrap();
    file.flush().unwrap();
    file
}

#[test]
fn score_matches_golden_and_reruns_identically() {
    let args = [
        "score",
        &fixture("score_input.jsonl"),
        "--coverage-scores",
        &fixture("coverage_scores.json"),
    ];
    let first = kis(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr_of(&first));
    let golden = std::fs::read(fixture("golden_score.jsonl")).unwrap();
    assert_eq!(first.stdout, golden, "score output drifted from golden");
    let second = kis(&args);
    assert_eq!(first.stdout, second.stdout, "rerun not byte-identical");
}

#[test]
fn evaluate_matches_golden_and_reruns_identically() {
    let args = ["evaluate", &fixture("eval_input.jsonl")];
    let first = kis(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr_of(&first));
    let golden = std::fs::read(fixture("golden_evaluate.json")).unwrap();
    assert_eq!(first.stdout, golden, "evaluate output drifted from golden");
    let second = kis(&args);
    assert_eq!(first.stdout, second.stdout, "rerun not byte-identical");
}

#[test]
fn outputs_equal_to_references_score_perfect() {
    let out = kis(&["evaluate", &fixture("eval_identity.jsonl"), "--sari"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["sari"], 1.0);
    assert_eq!(report["bleu"], 1.0);
}

#[test]
fn malformed_record_cites_its_line() {
    let input = temp_file(concat!(
        r#"{"id":"ok","original":"Small towns hope for help.","simplified":"Towns hope for help."}"#,
        "\n",
        r#"{"id":"broken","simplified":"missing original"}"#,
        "\n",
    ));
    let out = kis(&["score", input.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("line 2"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn empty_input_is_a_data_error() {
    let input = temp_file("");
    let out = kis(&["score", input.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("no records"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn unknown_config_key_is_rejected_by_name() {
    let config = temp_file("lambda = 1.3\nbogus_key = 5\n");
    let out = kis(&[
        "score",
        &fixture("score_input.jsonl"),
        "--config",
        config.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).contains("bogus_key"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn usage_surface_exit_codes() {
    assert_eq!(kis(&["--help"]).status.code(), Some(0));
    assert_eq!(kis(&["score", "--help"]).status.code(), Some(0));
    assert_eq!(kis(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(kis(&[]).status.code(), Some(1));
    let missing = kis(&["score", "/nonexistent/input.jsonl"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn unknown_ablation_is_a_usage_error() {
    let out = kis(&["score", &fixture("score_input.jsonl"), "--ablate", "brevity"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).contains("brevity"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn sari_without_references_is_a_data_error() {
    let out = kis(&["evaluate", &fixture("score_input.jsonl"), "--sari"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("reference"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn evaluate_rejects_coverage_overrides() {
    let out = kis(&[
        "evaluate",
        &fixture("eval_input.jsonl"),
        "--coverage-scores",
        &fixture("coverage_scores.json"),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn ablating_a_component_never_lowers_totals() {
    let base = kis(&["score", &fixture("score_input.jsonl")]);
    let ablated = kis(&[
        "score",
        &fixture("score_input.jsonl"),
        "--ablate",
        "simplicity",
    ]);
    assert_eq!(base.status.code(), Some(0));
    assert_eq!(ablated.status.code(), Some(0));
    let totals = |out: &Output| -> Vec<f64> {
        String::from_utf8_lossy(&out.stdout)
            .lines()
            .map(|line| {
                let v: serde_json::Value = serde_json::from_str(line).unwrap();
                v["total"].as_f64().unwrap()
            })
            .collect()
    };
    for (with, without) in totals(&ablated).iter().zip(totals(&base).iter()) {
        assert!(with >= without, "ablated {with} < full {without}");
    }
}

#[test]
fn flags_override_config_file_values() {
    let config = temp_file("steps = 3\nseed = 7\nk = 4\n");
    let from_config = kis(&["train-toy", "--config", config.path().to_str().unwrap()]);
    assert_eq!(from_config.status.code(), Some(0));
    let text = String::from_utf8_lossy(&from_config.stdout).into_owned();
    assert!(text.starts_with("# seeds=7\n"), "header: {text}");
    assert!(text.contains("k=4 steps=3"), "header: {text}");

    let overridden = kis(&[
        "train-toy",
        "--config",
        config.path().to_str().unwrap(),
        "--steps",
        "2",
        "--seed",
        "9",
    ]);
    assert_eq!(overridden.status.code(), Some(0));
    let text = String::from_utf8_lossy(&overridden.stdout).into_owned();
    assert!(text.starts_with("# seeds=9\n"), "header: {text}");
    assert!(text.contains("k=4 steps=2"), "header: {text}");
}

#[test]
fn train_toy_reruns_are_byte_identical() {
    let args = ["train-toy", "--steps", "6", "--seed", "11"];
    let first = kis(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr_of(&first));
    let second = kis(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn scst_and_kscst_share_the_flag_surface() {
    let scst = kis(&["train-toy", "--algorithm", "scst", "--steps", "4", "--seed", "5"]);
    let kscst = kis(&[
        "train-toy",
        "--algorithm",
        "kscst",
        "--k",
        "2",
        "--steps",
        "4",
        "--seed",
        "5",
    ]);
    assert_eq!(scst.status.code(), Some(0), "{}", stderr_of(&scst));
    assert_eq!(kscst.status.code(), Some(0), "{}", stderr_of(&kscst));
    let header = |out: &Output| -> String {
        String::from_utf8_lossy(&out.stdout)
            .lines()
            .nth(1)
            .unwrap()
            .to_string()
    };
    assert!(header(&scst).contains("algorithm=scst"));
    assert!(header(&kscst).contains("algorithm=kscst k=2"));
    let rows = |out: &Output| -> usize {
        String::from_utf8_lossy(&out.stdout)
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("step,"))
            .count()
    };
    assert_eq!(rows(&scst), 4);
    assert_eq!(rows(&kscst), 4);

    let bad = kis(&["train-toy", "--algorithm", "unknown"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn compare_scst_emits_summary_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let summary_path = dir.path().join("summary.csv");
    let trace_path = dir.path().join("trace.csv");
    let out = kis(&[
        "compare-scst",
        "--k",
        "2,4",
        "--seeds",
        "2",
        "--steps",
        "3",
        "--out",
        summary_path.to_str().unwrap(),
        "--trace-out",
        trace_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));

    let summary = std::fs::read_to_string(&summary_path).unwrap();
    assert!(summary.starts_with("# seeds=0 1\n"), "summary: {summary}");
    assert!(summary.contains("step,k,mean_reward,sem"));
    // 2 k-values × 3 steps of aggregated rows.
    assert_eq!(summary.lines().filter(|l| !l.starts_with('#')).count() - 1, 6);

    let trace = std::fs::read_to_string(&trace_path).unwrap();
    assert!(trace.contains("step,k,seed,mean_reward"));
    // 2 k-values × 2 seeds × 3 steps.
    assert_eq!(trace.lines().filter(|l| !l.starts_with('#')).count() - 1, 12);
}

#[test]
fn build_lm_then_score_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let lm_path = dir.path().join("news.lm");
    let corpus = format!("{}/../kis/data/news_sample.txt", env!("CARGO_MANIFEST_DIR"));
    let built = kis(&[
        "build-lm",
        "--corpus",
        &corpus,
        "--out",
        lm_path.to_str().unwrap(),
    ]);
    assert_eq!(built.status.code(), Some(0), "{}", stderr_of(&built));

    // Scoring with the rebuilt model must equal scoring with the bundled
    // default, which was trained from the same corpus.
    let config = temp_file(&format!("lm = {}\n", lm_path.display()));
    let with_loaded = kis(&[
        "score",
        &fixture("score_input.jsonl"),
        "--config",
        config.path().to_str().unwrap(),
    ]);
    let with_default = kis(&["score", &fixture("score_input.jsonl")]);
    assert_eq!(with_loaded.status.code(), Some(0), "{}", stderr_of(&with_loaded));
    assert_eq!(with_loaded.stdout, with_default.stdout);
}

#[test]
fn calibrate_lambda_reports_its_inputs() {
    let pairs = temp_file(concat!(
        r#"{"id":"p1","original":"The board will purchase additional materials.","simplified":"The board will buy extra materials."}"#,
        "\n",
    ));
    let out = kis(&[
        "calibrate-lambda",
        "--pairs",
        pairs.path().to_str().unwrap(),
        "--target",
        "0.9",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pairs"], 1);
    assert_eq!(report["target"], 0.9);
    assert!(report["lambda"].as_f64().unwrap() > 0.0);
}
