mod common;

use std::path::Path;
use std::process::{Command, Output};

use nalgebra::DMatrix;
use sparse_vda::model::{ModelFile, Predictor};
use tempfile::TempDir;

fn vda(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vda"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_features(path: &Path, x: &DMatrix<f64>) {
    let mut w = csv::Writer::from_path(path).unwrap();
    let header: Vec<String> = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
    w.write_record(&header).unwrap();
    for i in 0..x.nrows() {
        w.write_record(x.row(i).iter().map(|v| v.to_string())).unwrap();
    }
    w.flush().unwrap();
}

fn read_predictions(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap()[0].to_string()).collect()
}

fn simulate(dir: &Path, recipe: &str, n: &str, out: &str) {
    let o = vda(dir, &["simulate", "--recipe", recipe, "--n", n, "--seed", "3", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn fitted_model_round_trips_through_predict() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    simulate(d, "waveform", "200", "train.csv");
    let o = vda(d, &["fit", "--input", "train.csv", "--k", "8", "--out", "model.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let model = ModelFile::load(d.join("model.json")).unwrap();
    assert!(matches!(model.predictor, Predictor::Linear { .. }));
    assert!(model.selected_features().len() <= 8);
    let text = model.to_json().unwrap();
    assert_eq!(ModelFile::from_json(&text).unwrap(), model);

    let mut r = common::rng(17);
    let x = common::uniform(&mut r, 100, 21) * 4.0;
    write_features(&d.join("points.csv"), &x);
    let o = vda(d, &["predict", "--model", "model.json", "--input", "points.csv", "--out", "pred.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_predictions(&d.join("pred.csv")), model.predict_names(&x).unwrap());
}

#[test]
fn kernel_model_round_trips_through_predict() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    simulate(d, "clouds", "120", "train.csv");
    let o = vda(d, &["fit", "--input", "train.csv", "--kernel", "rbf", "--k", "20", "--out", "model.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let model = ModelFile::load(d.join("model.json")).unwrap();
    match &model.predictor {
        Predictor::Kernel { model } => assert!(model.n_support() <= 20),
        other => panic!("expected a kernel model, got {other:?}"),
    }
    let mut r = common::rng(5);
    let x = common::uniform(&mut r, 100, 2) * 1.5;
    write_features(&d.join("points.csv"), &x);
    let o = vda(d, &["predict", "--model", "model.json", "--input", "points.csv", "--out", "pred.csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read_predictions(&d.join("pred.csv")), model.predict_names(&x).unwrap());
}

#[test]
fn empty_model_predicts_a_single_class() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    simulate(d, "waveform", "150", "train.csv");
    let o = vda(d, &["fit", "--input", "train.csv", "--k", "0", "--out", "model.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = vda(d, &["predict", "--model", "model.json", "--input", "train.csv", "--label", "class", "--out", "pred.csv"]);
    assert_eq!(code(&o), 0);
    let pred = read_predictions(&d.join("pred.csv"));
    assert_eq!(pred.len(), 150);
    assert!(pred.iter().all(|p| p == &pred[0]));
}

#[test]
fn wrong_feature_count_is_rejected() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    simulate(d, "waveform", "100", "train.csv");
    assert_eq!(code(&vda(d, &["fit", "--input", "train.csv", "--k", "4", "--out", "model.json"])), 0);
    write_features(&d.join("narrow.csv"), &DMatrix::zeros(3, 5));
    let o = vda(d, &["predict", "--model", "model.json", "--input", "narrow.csv", "--out", "pred.csv"]);
    assert_ne!(code(&o), 0);
    assert!(!d.join("pred.csv").exists());
}

#[test]
fn usage_and_configuration_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    simulate(d, "clouds", "60", "train.csv");
    std::fs::write(d.join("bad.toml"), "[solver]\nnot_a_key = 1\n").unwrap();
    std::fs::write(d.join("broken.toml"), "[solver\n").unwrap();
    let cases: &[&[&str]] = &[
        &["frobnicate"],
        &["fit", "--input", "train.csv"],
        &["fit", "--input", "train.csv", "--k", "1", "--out", "m.json", "--config", "bad.toml"],
        &["fit", "--input", "train.csv", "--k", "1", "--out", "m.json", "--config", "broken.toml"],
        &["fit", "--input", "train.csv", "--k", "1", "--out", "m.json", "--epsilon", "-1"],
        &["fit", "--input", "train.csv", "--k", "3", "--out", "m.json"],
        &["path", "--input", "train.csv", "--grid", "1,2", "--out", "p.csv"],
        &["cv", "--input", "train.csv", "--folds", "1", "--out", "cv"],
    ];
    for args in cases {
        let o = vda(d, args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let o = vda(d, &["fit", "--input", "missing.csv", "--k", "1", "--out", "m.json"]);
    assert_eq!(code(&o), 1);
    std::fs::write(d.join("text.csv"), "a,b,class\n1,x,p\n2,y,q\n").unwrap();
    let o = vda(d, &["fit", "--input", "text.csv", "--k", "1", "--out", "m.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains('b'));
}

#[test]
fn unconverged_fit_still_writes_the_model() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    simulate(d, "waveform", "150", "train.csv");
    let o = vda(d, &["fit", "--input", "train.csv", "--k", "2", "--max-outer", "1", "--max-inner", "2", "--out", "m.json"]);
    assert_eq!(code(&o), 1);
    let model = ModelFile::load(d.join("m.json")).unwrap();
    assert!(!model.converged);
}

#[test]
fn missing_values_are_dropped() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let mut text = String::from("u,v,class\n");
    for i in 0..30 {
        let v = if i == 4 { "NA".to_string() } else { ((i * 7) % 5).to_string() };
        text.push_str(&format!("{},{},{}\n", i as f64 / 10.0, v, ["a", "b", "c"][i % 3]));
    }
    std::fs::write(d.join("gaps.csv"), text).unwrap();
    let o = vda(d, &["fit", "--input", "gaps.csv", "--k", "1", "--out", "m.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dropped 1 rows"));
}

#[test]
fn path_with_truth_reports_recovery() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let o = vda(d, &[
        "simulate", "--recipe", "tenclouds", "--n", "200", "--features", "15", "--classes", "3",
        "--seed", "2", "--out", "tc.csv", "--truth", "truth.csv",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = vda(d, &["path", "--input", "tc.csv", "--truth", "truth.csv", "--grid", "15,3,0", "--out", "path.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(d.join("path.csv")).unwrap();
    let headers = r.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "relative_mse"));
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[1][0], "3");
}

#[test]
fn cv_writes_table_and_summary() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    simulate(d, "waveform", "120", "wf.csv");
    let o = vda(d, &["cv", "--input", "wf.csv", "--grid", "21,5,0", "--folds", "3", "--replicates", "2", "--out", "cv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("cv.json")).unwrap()).unwrap();
    assert!(summary["report"]["summary"]["test_error"]["median"].is_number());
    let rows = csv::Reader::from_path(d.join("cv.csv")).unwrap().records().count();
    assert_eq!(rows, 2 * 3 * 3);
}
