//! End-to-end checks of the `sgam` binary: exit codes, file outputs and
//! run-to-run determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sgam() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sgam"))
}

fn run(args: &[&str]) -> Output {
    sgam().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A toy two-class problem with one informative feature.
fn write_toy_csv(dir: &Path, n: usize) -> PathBuf {
    let path = dir.join("toy.csv");
    let mut text = String::from("a,b,y\n");
    for i in 0..n {
        let x1 = i as f64 / n as f64;
        let x2 = ((i * 7919) % n) as f64 / n as f64;
        let y = u8::from(x1 > 0.5);
        text.push_str(&format!("{x1},{x2},{y}\n"));
    }
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn fit_writes_model_and_reports_training_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_toy_csv(dir.path(), 60);
    let model = dir.path().join("model.json");
    let out = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--header",
        "--method",
        "lasso",
        "--m",
        "3",
        "--c1",
        "1.0",
        "--c2",
        "0.5",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(model.exists());
    let text = stdout(&out);
    assert!(text.contains("training error"), "stdout: {text}");
    assert!(text.contains("selected features"));
}

#[test]
fn huge_penalties_select_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_toy_csv(dir.path(), 50);
    let out = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--header",
        "--method",
        "sparsegrouplasso",
        "--m",
        "2",
        "--c1",
        "1e4",
        "--c2",
        "1e4",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(
        stdout(&out).contains("selected features: 0"),
        "stdout: {}",
        stdout(&out)
    );
}

#[test]
fn missing_file_exits_2_and_names_path() {
    let out = run(&["fit", "--data", "/nonexistent/nothing.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/nonexistent/nothing.csv"));
}

#[test]
fn predict_round_trips_through_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_toy_csv(dir.path(), 60);
    let model = dir.path().join("model.json");
    let fit_out = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--header",
        "--method",
        "sparsegrouplasso",
        "--m",
        "3",
        "--c1",
        "0.3",
        "--c2",
        "0.3",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert!(fit_out.status.success(), "stderr: {}", stderr(&fit_out));

    let preds = dir.path().join("preds.csv");
    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--header",
        "--label",
        "y",
        "--out",
        preds.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("misclassification rate"));
    let written = std::fs::read_to_string(&preds).unwrap();
    assert!(written.starts_with("row,logit,probability,class\n"));
    assert_eq!(written.lines().count(), 61);
}

#[test]
fn cv_writes_report_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_toy_csv(dir.path(), 60);
    let report = dir.path().join("cv.csv");
    let out = run(&[
        "cv",
        "--data",
        data.to_str().unwrap(),
        "--header",
        "--method",
        "lasso",
        "--m",
        "2",
        "--grid",
        "1e-1:1e1:3",
        "--folds",
        "4",
        "--seed",
        "3",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("chosen constants"));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("c1,c2,mean_error,se,chosen\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn simulate_rejects_too_few_features() {
    let out = run(&["simulate", "--d", "2", "--n", "50"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("d ≥ 3"));
}

#[test]
fn simulate_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sim.csv");
    let args = [
        "simulate",
        "--d",
        "3",
        "--n",
        "40",
        "--replications",
        "2",
        "--test-size",
        "25",
        "--seed",
        "7",
        "--methods",
        "lasso,sparsegrouplasso",
        "--m",
        "2",
        "--folds",
        "4",
        "--grid",
        "1e-1:1e1:2",
        "--max-iterations",
        "400",
        "--out-csv",
    ];
    let out = run(&args
        .iter()
        .copied()
        .chain(std::iter::once(csv.to_str().unwrap()))
        .collect::<Vec<_>>());
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let first = std::fs::read_to_string(&csv).unwrap();
    // Two raw rows per method plus the header.
    assert_eq!(first.lines().count(), 1 + 2 * 2);

    let csv2 = dir.path().join("sim2.csv");
    let out2 = run(&args
        .iter()
        .copied()
        .chain(std::iter::once(csv2.to_str().unwrap()))
        .collect::<Vec<_>>());
    assert!(out2.status.success());
    let second = std::fs::read_to_string(&csv2).unwrap();
    assert_eq!(first, second, "same invocation must be bit-identical");
}

#[test]
fn spam_demo_rejects_wrong_column_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad_spambase.csv");
    // 57 columns total (56 features + label) instead of 58.
    let mut text = String::new();
    for i in 0..5 {
        let row: Vec<String> = (0..56).map(|j| format!("{}", (i * j) % 3)).collect();
        text.push_str(&format!("{},{}\n", row.join(","), i % 2));
    }
    std::fs::write(&path, text).unwrap();
    let out = run(&["spam-demo", "--data", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("57 feature columns"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn selfcheck_passes_and_fault_injection_fails() {
    let out = run(&["selfcheck"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("all 6 self-checks passed"), "stdout: {text}");

    let fault = run(&["selfcheck", "--inject-fault"]);
    assert_eq!(fault.status.code(), Some(1));
    assert!(stdout(&fault).contains("FAIL"));
    assert!(stdout(&fault).contains("prox_sorted_l1 vs 2-d grid oracle"));
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "2"] {
        let csv = dir.path().join(format!("sim_t{threads}.csv"));
        let out = run(&[
            "--threads",
            threads,
            "simulate",
            "--d",
            "3",
            "--n",
            "40",
            "--replications",
            "2",
            "--test-size",
            "20",
            "--seed",
            "11",
            "--methods",
            "sparsegrouplasso",
            "--m",
            "2",
            "--folds",
            "4",
            "--grid",
            "1e-1:1e1:2",
            "--max-iterations",
            "400",
            "--out-csv",
            csv.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        outputs.push(std::fs::read_to_string(&csv).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
