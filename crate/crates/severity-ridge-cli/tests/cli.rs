//! End-to-end tests of the `severity-ridge` binary: flag surface, option
//! precedence, exit codes, and the full generate/fit/predict/triage flow.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_severity-ridge"));
    // Tests control the seed environment explicitly.
    c.env_remove("SEVERITY_RIDGE_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        stdout(out),
        stderr(out)
    );
}

fn generate_small(dir: &Path, n: usize, seed: u64) {
    let out = run(&[
        "generate",
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
}

#[test]
fn help_documents_every_subcommand_flag_and_default() {
    let top = run(&["--help"]);
    assert_code(&top, 0);
    let text = stdout(&top);
    for sub in ["generate", "fit", "evaluate", "experiment", "predict", "triage"] {
        assert!(text.contains(sub), "top-level help misses {sub}");
    }
    assert!(text.contains("--config"));
    assert!(text.contains("--threads"));

    let cases: &[(&str, &[&str])] = &[
        ("generate", &["--n", "--seed", "--out-dir", "1000000", "42", "data"]),
        (
            "fit",
            &[
                "--x", "--y", "--model-out", "--alpha1", "--alpha2", "--lambda1",
                "--lambda2", "--alpha-init", "--lambda-init", "--tol", "--max-iter",
                "--no-intercept", "--fixed-hyperparams", "2.0", "0.01", "0.001", "300",
            ],
        ),
        ("evaluate", &["--model", "--x", "--y-precise", "--y-noisy"]),
        (
            "experiment",
            &["--n", "--iterations", "--seed", "--out-dir", "100000", "10", "report"],
        ),
        ("predict", &["--model", "--x", "--with-std"]),
        ("triage", &["--model", "--x", "--k", "--plan", "--plan-out", "3"]),
    ];
    for (sub, needles) in cases {
        let out = run(&[sub, "--help"]);
        assert_code(&out, 0);
        let text = stdout(&out);
        for needle in *needles {
            assert!(text.contains(needle), "{sub} --help misses {needle}:\n{text}");
        }
        assert!(text.contains("default"), "{sub} --help states no defaults");
    }
}

#[test]
fn version_prints_and_exits_zero() {
    let out = run(&["--version"]);
    assert_code(&out, 0);
    assert!(stdout(&out).contains("severity-ridge"));
}

#[test]
fn usage_errors_exit_one() {
    assert_code(&run(&[]), 1); // missing subcommand
    assert_code(&run(&["generate", "--bogus-flag"]), 1);
    assert_code(&run(&["not-a-subcommand"]), 1);
    assert_code(&run(&["generate", "--n", "zero"]), 1);
}

#[test]
fn validation_error_exits_one() {
    let out = run(&["generate", "--n", "0"]);
    assert_code(&out, 1);
    assert!(stderr(&out).contains("n_samples"));
}

#[test]
fn missing_input_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let out = run(&[
        "fit",
        "--x",
        missing.to_str().unwrap(),
        "--y",
        missing.to_str().unwrap(),
        "--model-out",
        dir.path().join("m.txt").to_str().unwrap(),
    ]);
    assert_code(&out, 2);
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn full_pipeline_generate_fit_evaluate_predict_triage() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    generate_small(&data, 500, 7);
    for file in ["x_data.csv", "y_data_precise.csv", "y_data_variance.csv"] {
        assert!(data.join(file).exists(), "missing {file}");
    }

    let model = dir.path().join("model.txt");
    let out = run(&[
        "fit",
        "--x",
        data.join("x_data.csv").to_str().unwrap(),
        "--y",
        data.join("y_data_variance.csv").to_str().unwrap(),
        "--model-out",
        model.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let fit_text = stdout(&out);
    assert!(fit_text.contains("fitted 4 coefficients on 500 rows"));
    assert!(fit_text.contains("model written to"));

    let out = run(&[
        "evaluate",
        "--model",
        model.to_str().unwrap(),
        "--x",
        data.join("x_data.csv").to_str().unwrap(),
        "--y-precise",
        data.join("y_data_precise.csv").to_str().unwrap(),
        "--y-noisy",
        data.join("y_data_variance.csv").to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let eval_text = stdout(&out);
    assert!(eval_text.lines().any(|l| l.starts_with("precise: ")));
    assert!(eval_text.lines().any(|l| l.starts_with("noisy: ")));
    assert!(eval_text.contains("n_test=500"));

    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--x",
        data.join("x_data.csv").to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let predictions: Vec<f64> = stdout(&out)
        .lines()
        .map(|l| l.parse().expect("prediction parses as f64"))
        .collect();
    assert_eq!(predictions.len(), 500);
    assert!(predictions.iter().all(|v| v.is_finite()));

    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--x",
        data.join("x_data.csv").to_str().unwrap(),
        "--with-std",
    ]);
    assert_code(&out, 0);
    for line in stdout(&out).lines() {
        let (m, s) = line.split_once(',').expect("value,std");
        let _: f64 = m.parse().unwrap();
        let std: f64 = s.parse().unwrap();
        assert!(std > 0.0);
    }

    let plan = dir.path().join("plan.csv");
    let out = run(&[
        "triage",
        "--model",
        model.to_str().unwrap(),
        "--x",
        data.join("x_data.csv").to_str().unwrap(),
        "--plan-out",
        plan.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let labels: Vec<String> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(labels.len(), 500);
    assert!(plan.exists());
    let plan_text = std::fs::read_to_string(&plan).unwrap();
    assert!(plan_text.starts_with("threshold,label_below\n"));

    // Re-running against the saved plan reproduces the labels.
    let out = run(&[
        "triage",
        "--model",
        model.to_str().unwrap(),
        "--x",
        data.join("x_data.csv").to_str().unwrap(),
        "--plan",
        plan.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let relabeled: Vec<String> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(labels, relabeled);
}

#[test]
fn triage_k_conflicts_with_plan_file() {
    let out = run(&["triage", "--model", "m", "--x", "x", "--k", "3", "--plan", "p"]);
    assert_code(&out, 1);
}

#[test]
fn config_file_fills_gaps_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("gen");
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "n = 120\nseed = 9\nout-dir = {:?}\nthreads = 1\n",
            out_dir.to_str().unwrap()
        ),
    )
    .unwrap();

    let out = run(&["generate", "--config", config.to_str().unwrap()]);
    assert_code(&out, 0);
    assert!(stdout(&out).contains("generated 120 records with seed 9"));
    assert!(out_dir.join("x_data.csv").exists());

    // Flags override config keys.
    let out = run(&[
        "generate",
        "--config",
        config.to_str().unwrap(),
        "--n",
        "60",
    ]);
    assert_code(&out, 0);
    assert!(stdout(&out).contains("generated 60 records with seed 9"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "mystery-knob = 3\n").unwrap();
    let out = run(&["generate", "--config", config.to_str().unwrap()]);
    assert_code(&out, 1);
    assert!(stderr(&out).contains("mystery-knob"), "{}", stderr(&out));
}

#[test]
fn malformed_config_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("broken.toml");
    std::fs::write(&config, "n = [unclosed\n").unwrap();
    let out = run(&["generate", "--config", config.to_str().unwrap()]);
    assert_code(&out, 1);
    let missing = dir.path().join("nope.toml");
    let out = run(&["generate", "--config", missing.to_str().unwrap()]);
    assert_code(&out, 2);
}

#[test]
fn env_var_supplies_seed_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();

    let out = bin()
        .env("SEVERITY_RIDGE_SEED", "123")
        .args([
            "generate",
            "--n",
            "50",
            "--out-dir",
            dir.path().join("a").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_code(&out, 0);
    assert!(stdout(&out).contains("seed 123"));

    let out = bin()
        .env("SEVERITY_RIDGE_SEED", "123")
        .args([
            "generate",
            "--n",
            "50",
            "--seed",
            "5",
            "--out-dir",
            dir.path().join("b").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_code(&out, 0);
    assert!(stdout(&out).contains("seed 5"));

    let out = bin()
        .env("SEVERITY_RIDGE_SEED", "not-a-number")
        .args([
            "generate",
            "--n",
            "50",
            "--out-dir",
            dir.path().join("c").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_code(&out, 1);
    assert!(stderr(&out).contains("SEVERITY_RIDGE_SEED"));
}

#[test]
fn default_seed_is_42_when_nothing_supplies_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "generate",
        "--n",
        "50",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    assert!(stdout(&out).contains("seed 42"));
}

#[test]
fn thread_count_does_not_change_output_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one");
    let four = dir.path().join("four");
    let out = run(&["generate", "--n", "400", "--seed", "11", "--threads", "1", "--out-dir", one.to_str().unwrap()]);
    assert_code(&out, 0);
    let out = run(&["generate", "--n", "400", "--seed", "11", "--threads", "4", "--out-dir", four.to_str().unwrap()]);
    assert_code(&out, 0);
    for file in ["x_data.csv", "y_data_precise.csv", "y_data_variance.csv"] {
        let a = std::fs::read(one.join(file)).unwrap();
        let b = std::fs::read(four.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between thread counts");
    }
}

#[test]
fn experiment_writes_report_and_charts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "experiment",
        "--n",
        "400",
        "--iterations",
        "3",
        "--seed",
        "42",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("3 iterations of n=400"));
    assert!(text.contains("mean precise:"));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("seed,mse_precise,"));
    assert!(dir.path().join("mse.svg").exists());
    assert!(dir.path().join("r2.svg").exists());
}
