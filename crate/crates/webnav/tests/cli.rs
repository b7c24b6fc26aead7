mod common;

use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

use common::{corpus_dir, fixtures, CROW_QUESTION};

fn webnav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_webnav")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data(name: &str) -> String {
    fixtures().join("data").join(name).display().to_string()
}

fn run_heuristic(question: &str, corpus: &Path) -> Output {
    webnav(&["run", "--question", question, "--corpus", corpus.to_str().unwrap()])
}

#[test]
fn run_heuristic_answers_deterministically() {
    let a = run_heuristic(CROW_QUESTION, &corpus_dir());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let record: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(record["end_reason"], "answered");
    assert!(!record["quotes"].as_array().unwrap().is_empty());
    assert!(record["answer"].as_str().unwrap().contains("[1]"));
    let b = run_heuristic(CROW_QUESTION, &corpus_dir());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn run_random_is_deterministic() {
    let corpus = corpus_dir();
    let args = ["run", "--question", "Why is the sky blue?", "--policy", "random", "--seed", "7", "--corpus", corpus.to_str().unwrap()];
    let (a, b) = (webnav(&args), webnav(&args));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}

#[test]
fn run_without_hits_is_skipped() {
    let o = run_heuristic("zzzz qqqq", &corpus_dir());
    assert_eq!(o.status.code(), Some(1));
    let record: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(record["end_reason"], "skipped_no_references");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(webnav(&["run", "--question", "q?"]).status.code(), Some(2));
    assert_eq!(webnav(&["run"]).status.code(), Some(2));
    assert_eq!(webnav(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(webnav(&["run", "--question", "q?", "--backend", "live"]).status.code(), Some(2));
}

#[test]
fn replay_detects_edits_and_corpus_changes() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_heuristic(CROW_QUESTION, &corpus_dir());
    let record_path = dir.path().join("record.json");
    std::fs::write(&record_path, &run.stdout).unwrap();
    let record_arg = record_path.to_str().unwrap();
    let corpus = corpus_dir();

    let ok = webnav(&["replay", record_arg, "--corpus", corpus.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("record 0: ok"));

    let mut edited: Value = serde_json::from_slice(&run.stdout).unwrap();
    let obs = edited["steps"][2]["observation"].as_str().unwrap().replacen("Crows", "Crowz", 1);
    edited["steps"][2]["observation"] = Value::String(obs);
    let edited_path = dir.path().join("edited.json");
    std::fs::write(&edited_path, edited.to_string()).unwrap();
    let bad = webnav(&["replay", edited_path.to_str().unwrap(), "--corpus", corpus.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("at step 2, line"), "{}", stdout(&bad));

    // Same record, one document changed: the first divergence is the page view.
    let mutated = dir.path().join("corpus");
    std::fs::create_dir(&mutated).unwrap();
    for entry in std::fs::read_dir(&corpus).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), mutated.join(entry.file_name())).unwrap();
    }
    let page = mutated.join("pethelpful-crows.html");
    let html = std::fs::read_to_string(&page).unwrap().replace("holding a peanut", "holding a walnut");
    std::fs::write(&page, html).unwrap();
    let diff = webnav(&["replay", record_arg, "--corpus", mutated.to_str().unwrap()]);
    assert_eq!(diff.status.code(), Some(1));
    let report = stdout(&diff);
    assert!(report.contains("at step 2, line"), "{report}");
    assert!(report.contains("walnut"), "{report}");
}

#[test]
fn replay_reads_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_dir();
    let mut lines = String::new();
    for q in ["Why is the sky blue?", "How do magnets work?"] {
        let record: Value = serde_json::from_slice(&run_heuristic(q, &corpus).stdout).unwrap();
        lines.push_str(&record.to_string());
        lines.push('\n');
    }
    let path = dir.path().join("records.jsonl");
    std::fs::write(&path, lines).unwrap();
    let o = webnav(&["replay", path.to_str().unwrap(), "--corpus", corpus.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn simplify_renders_superscripts() {
    let o = webnav(&["simplify", &data("supsub.html")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("Area of a circle\n\n"), "{text}");
    assert!(text.contains("πr^2"), "{text}");
}

#[test]
fn preprocess_questions() {
    let o = webnav(&["preprocess", &data("questions.jsonl")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "Explain: gravity\nWhy is the sky blue?\nExplain: cantaloupe season\nHow can I train crows?\\n\\nThey visit my yard every day.\n"
    );
    let o = webnav(&["preprocess", "--jsonl", &data("questions.jsonl")]);
    let first: Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(first, serde_json::json!({"id": "e1", "question": "Explain: gravity"}));
}

#[test]
fn validate_comparisons() {
    for file in ["comparisons_valid.jsonl", "comparisons_pairs.jsonl"] {
        let o = webnav(&["validate", &data(file)]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), "pairs: 3\nvalid: 3\nties: 1\n0 violations\n");
    }
    let o = webnav(&["validate", &data("comparisons_invalid.jsonl")]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("2 violations\n"), "{text}");
    assert!(text.contains("line 1: scores sum to 0.25, not 0\n"), "{text}");
    assert!(text.contains("line 5: record 0 has an empty answer\n"), "{text}");
}

#[test]
fn bon_curve_table_csv_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    let o = webnav(&["bon-curve", &data("scores.jsonl"), "--n", "1,3", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // n=1: mean of val scores per question; n=3 over q1 is its best-train answer.
    let q1_n1 = (1.0 + 2.0 + 4.0) / 3.0;
    let q2_n1 = (0.0 + 3.0 + 1.0 + 2.0) / 4.0;
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(lines[0], "n\testimate");
    let n1: f64 = lines[1].split('\t').nth(1).unwrap().parse().unwrap();
    assert!((n1 - (q1_n1 + q2_n1) / 2.0).abs() < 1e-12);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("n,estimate\n1,"));

    let o = webnav(&["bon-curve", &data("scores.jsonl"), "--n", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("question q1"));
    assert!(o.stdout.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bon_curve_non_decreasing_when_val_equals_train(
        per_question in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 6..10), 1..5)
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.jsonl");
        let mut text = String::new();
        for (q, scores) in per_question.iter().enumerate() {
            for (a, s) in scores.iter().enumerate() {
                let line = serde_json::json!({"question_id": format!("q{q}"), "answer_id": format!("a{a}"), "train_score": s, "val_score": s});
                text.push_str(&line.to_string());
                text.push('\n');
            }
        }
        std::fs::write(&path, text).unwrap();
        let o = webnav(&["bon-curve", path.to_str().unwrap(), "--n", "1,2,3,4,5,6"]);
        prop_assert_eq!(o.status.code(), Some(0));
        let values: Vec<f64> = stdout(&o).lines().skip(1).map(|l| l.split('\t').nth(1).unwrap().parse().unwrap()).collect();
        prop_assert_eq!(values.len(), 6);
        for w in values.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "{:?}", values);
        }
    }
}
