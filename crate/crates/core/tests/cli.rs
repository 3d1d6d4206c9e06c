use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use devian::data_io::report_from_json;
use tempfile::TempDir;

fn devian(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_devian"))
        .args(args)
        .env_remove("DEVIAN_WORKERS")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SAMPLE: &str = "y,x,z
2.1,1,0.3
3.9,2,-1.2
6.2,3,0.8
7.8,4,0.1
10.1,5,-0.4
30.0,6,1.5
14.2,7,-0.9
15.8,8,0.6
18.3,9,-0.2
19.7,10,1.1
";

fn sample(dir: &TempDir) -> std::path::PathBuf {
    let path = dir.path().join("data.csv");
    fs::write(&path, SAMPLE).unwrap();
    path
}

fn detect_json(data: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "detect",
        "--data",
        p(data),
        "--response",
        "y",
        "--predictors",
        "x,z",
        "--alpha",
        "0.05",
        "--nsim",
        "2000",
        "--seed",
        "3",
        "--out",
        p(out),
    ];
    args.extend_from_slice(extra);
    devian(&args)
}

#[test]
fn detect_flags_the_planted_error() {
    let dir = TempDir::new().unwrap();
    let data = sample(&dir);
    let out = dir.path().join("report.json");
    let o = detect_json(&data, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = report_from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.outlier_rows(), vec![6]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("outliers"));
}

#[test]
fn report_is_byte_identical_across_runs_and_workers() {
    let dir = TempDir::new().unwrap();
    let data = sample(&dir);
    let outputs: Vec<Vec<u8>> = ["1", "1", "2", "6"]
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let out = dir.path().join(format!("r{i}.json"));
            assert!(detect_json(&data, &out, &["--workers", w]).status.success());
            fs::read(&out).unwrap()
        })
        .collect();
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn workers_fall_back_to_the_environment() {
    let dir = TempDir::new().unwrap();
    let data = sample(&dir);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert!(detect_json(&data, &a, &[]).status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_devian"))
        .args([
            "detect",
            "--data",
            p(&data),
            "--response",
            "y",
            "--predictors",
            "x,z",
        ])
        .args([
            "--alpha",
            "0.05",
            "--nsim",
            "2000",
            "--seed",
            "3",
            "--out",
            p(&b),
        ])
        .env("DEVIAN_WORKERS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let bad = Command::new(env!("CARGO_BIN_EXE_devian"))
        .args([
            "detect",
            "--data",
            p(&data),
            "--response",
            "y",
            "--predictors",
            "x",
        ])
        .env("DEVIAN_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn oracle_mode_agrees_with_the_fast_path() {
    let dir = TempDir::new().unwrap();
    let data = sample(&dir);
    let fast = dir.path().join("fast.json");
    let slow = dir.path().join("slow.json");
    assert!(detect_json(&data, &fast, &[]).status.success());
    assert!(detect_json(&data, &slow, &["--oracle"]).status.success());
    let a = report_from_json(&fs::read_to_string(&fast).unwrap()).unwrap();
    let b = report_from_json(&fs::read_to_string(&slow).unwrap()).unwrap();
    assert_eq!(a.outlier_indices, b.outlier_indices);
    for (x, y) in a.residuals.values.iter().zip(&b.residuals.values) {
        assert!((x - y).abs() <= 1e-9);
    }
}

#[test]
fn default_alpha_warns() {
    let dir = TempDir::new().unwrap();
    let data = sample(&dir);
    let o = devian(&[
        "detect",
        "--data",
        p(&data),
        "--response",
        "y",
        "--predictors",
        "x",
        "--nsim",
        "500",
    ]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn csv_report_and_plots() {
    let dir = TempDir::new().unwrap();
    let data = sample(&dir);
    let out = dir.path().join("out/report.csv");
    let plots = dir.path().join("figs");
    let o = detect_json(&data, &out, &["--format", "csv", "--plots", p(&plots)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("row,value,residual,outlier\n"));
    assert_eq!(csv.lines().count(), 11);
    assert!(csv
        .lines()
        .any(|l| l.starts_with("6,30,") && l.ends_with("TRUE")));
    for f in ["residuals.svg", "t_histogram.svg", "residual_boxplot.svg"] {
        assert!(fs::read_to_string(plots.join(f))
            .unwrap()
            .starts_with("<svg"));
    }
}

#[test]
fn missing_column_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let data = sample(&dir);
    let o = devian(&[
        "detect",
        "--data",
        p(&data),
        "--response",
        "y",
        "--predictors",
        "w",
        "--alpha",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("w"));

    let missing = dir.path().join("nope.csv");
    let o = devian(&[
        "detect",
        "--data",
        p(&missing),
        "--response",
        "y",
        "--alpha",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rank_deficient_design_is_a_model_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("collinear.csv");
    let mut body = String::from("y,a,b\n");
    for i in 0..8 {
        body.push_str(&format!("{},{},{}\n", i * i, i, 2 * i));
    }
    fs::write(&path, body).unwrap();
    let o = devian(&[
        "detect",
        "--data",
        p(&path),
        "--response",
        "y",
        "--predictors",
        "a,b",
        "--alpha",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(devian(&["detect"]).status.code(), Some(2));
    assert_eq!(devian(&["--help"]).status.code(), Some(0));
}

#[test]
fn transforms_add_columns() {
    let dir = TempDir::new().unwrap();
    let data = sample(&dir);
    let out = dir.path().join("t.json");
    let o = detect_json(&data, &out, &["--transform", "x:square"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("k = 4"));
}

#[test]
fn synth_is_deterministic_and_refuses_tiny_samples() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = devian(&["synth", "--n", "50", "--seed", "4", "--out", p(out)]);
        assert!(o.status.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("y,x\n"));
    assert_eq!(text.lines().count(), 51);

    let o = devian(&["synth", "--n", "3", "--out", p(&dir.path().join("c.csv"))]);
    assert_eq!(o.status.code(), Some(3));

    let wage = dir.path().join("w.csv");
    assert!(
        devian(&["synth", "--model", "wage-like", "--out", p(&wage)])
            .status
            .success()
    );
    assert_eq!(fs::read_to_string(&wage).unwrap().lines().count(), 600);
}

#[test]
fn bench_writes_record_and_chart() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bench.json");
    let o = devian(&[
        "bench",
        "--values",
        "20,40,80",
        "--repeats",
        "2",
        "--nsim",
        "100",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(record["sweep_kind"], "size");
    assert_eq!(record["sweep_values"], serde_json::json!([20, 40, 80]));
    assert_eq!(record["median_runtimes_s"].as_array().unwrap().len(), 3);
    assert!(dir.path().join("bench.svg").exists());

    let csv = dir.path().join("naive.csv");
    let o = devian(&[
        "bench",
        "--values",
        "20,40",
        "--repeats",
        "1",
        "--nsim",
        "100",
        "--naive",
        "--out",
        p(&csv),
    ]);
    assert!(o.status.success());
    assert!(fs::read_to_string(&csv).unwrap().contains("naive"));
}
