mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use obc::corpus::{parse_document, RawRecord};
use obc::features::vectorize;
use obc::svm::load_model;

fn obc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obc"))
        .args(args)
        .env("OBC_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_synth(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut full = vec!["synth", "--out", &path];
    full.extend_from_slice(args);
    let out = obc(&full);
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["eval", "--corpus", "missing.jsonl", "--model", "15"],
        vec!["eval", "--corpus", "missing.jsonl", "--folds", "1"],
        vec!["train", "--corpus", "x", "--out", "y", "--c", "0"],
        vec!["train", "--corpus", "x", "--out", "y", "--c", "-1"],
        vec!["synth", "--out", "z", "--signal", "1.5"],
        vec!["compare", "--corpus", "x", "--models", "2,0"],
        vec!["eval", "--corpus", "x", "--bogus"],
        vec!["frobnicate"],
        vec![],
    ] {
        let out = obc(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).starts_with("error:usage:"), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn invalid_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_obc"))
        .args(["stats", "--corpus", "missing.jsonl"])
        .env("OBC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error:usage:"));
}

#[test]
fn help_exits_0() {
    let out = obc(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("compare"));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.jsonl");
    let out = obc(&["stats", "--corpus", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:io:"), "{}", stderr(&out));

    let unlabeled = dir.path().join("u.jsonl");
    fs::write(&unlabeled, "{\"id\":\"a\",\"title\":\"\",\"body\":\"Một <ner type=disease>sởi</ner>.\"}\n").unwrap();
    let out = obc(&["eval", "--corpus", unlabeled.to_str().unwrap(), "--folds", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:unlabeled:"), "{}", stderr(&out));

    let broken = dir.path().join("b.jsonl");
    fs::write(&broken, "{\"id\":\"a\",\"title\":\"\",\"body\":\"<ner type=disease>sởi\"}\n").unwrap();
    let out = obc(&["stats", "--corpus", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:corpus:"), "{}", stderr(&out));

    let model = dir.path().join("m.json");
    fs::write(&model, "{\"format_version\":1,\"model_id\":8").unwrap();
    let out = obc(&["predict", "--model-file", model.to_str().unwrap(), "--corpus", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:model:"), "{}", stderr(&out));
}

#[test]
fn train_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_synth(dir.path(), "train.jsonl", &["--relevant", "40", "--irrelevant", "40", "--seed", "3"]);
    let model_path = dir.path().join("m.json");
    let out = obc(&["train", "--corpus", &corpus, "--model", "8", "--out", model_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));

    let fixture = dir.path().join("three.jsonl");
    let records = [
        ("n1", "", "Ổ dịch <ner type=disease>sởi</ner> bùng phát tại <ner type=location>Huế</ner>. Nhiều ca tử vong."),
        ("n2", "Hội thảo", "Chính sách tiêm chủng <ner type=disease>cúm A/H1N1</ner> mới."),
        ("n3", "", "Không có gì."),
    ];
    let mut text = String::new();
    for (id, title, body) in records {
        let r = RawRecord { id: Some(id.into()), title: title.into(), body: body.into(), label: None };
        text.push_str(&serde_json::to_string(&r).unwrap());
        text.push('\n');
    }
    fs::write(&fixture, &text).unwrap();

    let out = obc(&["predict", "--model-file", model_path.to_str().unwrap(), "--corpus", fixture.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 3);

    let model = load_model(fs::File::open(&model_path).unwrap()).unwrap();
    for (line, (id, title, body)) in lines.iter().zip(records) {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 3);
        assert_eq!(fields[0], id);
        let doc = parse_document(&RawRecord { id: Some(id.into()), title: title.into(), body: body.into(), label: None }).unwrap();
        let x = vectorize(&doc, &model.spec, &model.vocab).unwrap();
        let expected: f64 = x.indices().iter().map(|&k| model.svm.weights[k]).sum::<f64>() + model.svm.bias;
        let score: f64 = fields[1].parse().unwrap();
        assert!((score - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        let label = if score >= 0.0 { "relevant" } else { "non-relevant" };
        assert_eq!(fields[2], label);
    }
    // no disease sentence, so nothing is selected and the score is the bias
    assert_eq!(lines[2].split('\t').nth(1).unwrap().parse::<f64>().unwrap(), model.svm.bias);
}

#[test]
fn eval_writes_a_hundred_runs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_synth(dir.path(), "c.jsonl", &["--relevant", "30", "--irrelevant", "30"]);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = obc(&[
            "eval", "--corpus", &corpus, "--model", "8", "--repeats", "10", "--folds", "10", "--seed", "42",
            "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let report: obc::eval::EvalReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.runs.len(), 100);
    assert_eq!(report.model_id, 8);
}

#[test]
fn compare_table_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_synth(dir.path(), "c.jsonl", &["--relevant", "20", "--irrelevant", "20", "--seed", "8"]);
    let run = || {
        let out = obc(&[
            "compare", "--corpus", &corpus, "--repeats", "2", "--folds", "4", "--format", "text",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        out.stdout
    };
    let first = run();
    assert_eq!(first, run());
    let table = String::from_utf8(first).unwrap();
    assert_eq!(table.lines().count(), 16);
}

#[test]
fn synth_is_seeded_and_stats_reports_all_models() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_synth(dir.path(), "a.jsonl", &["--relevant", "10", "--irrelevant", "10", "--seed", "5"]);
    let b = write_synth(dir.path(), "b.jsonl", &["--relevant", "10", "--irrelevant", "10", "--seed", "5"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let out = obc(&["stats", "--corpus", &a]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("reports"));
    for id in 1..=14 {
        assert!(text.lines().any(|l| l.trim_start().starts_with(&format!("{id} "))), "model {id}");
    }
}

#[test]
fn in_process_entry_point() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = obc::cli::run(["obc", "eval", "--model", "0", "--corpus", "x"], &mut out, &mut err);
    assert_eq!(code, 2);
    assert!(String::from_utf8(err).unwrap().starts_with("error:usage:"));
}
