use std::path::Path;
use std::process::{Command, Output};

use cqreg_cli::{report_from_csv, ResultDocument};

fn cqreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqreg")).args(args).env_remove("CQR_SEED").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn sample_csv(dir: &Path) -> String {
    let mut text = String::from("x1,y,x2\n");
    for i in 0..30 {
        let x1 = ((i * 37) % 17) as f64 / 4.0 - 2.0;
        let x2 = ((i * 11) % 7) as f64 / 2.0 - 1.5;
        let noise = ((i * 29) % 13) as f64 / 6.0 - 1.0;
        text.push_str(&format!("{x1},{},{x2}\n", 1.0 + 2.0 * x1 - x2 + noise));
    }
    let path = dir.join("data.csv");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn fit_single_level_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_csv(dir.path());
    let out = cqreg(&["fit", "--input", &input, "--response", "y", "--tau", "0.3", "--algorithm", "cd"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = ResultDocument::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(doc.intercepts.len(), 1);
    assert_eq!(doc.coefficients.len(), 2);
    assert_eq!(doc.covariates, vec!["x1", "x2"]);
    assert!(doc.converged);
    assert!(doc.pilot.is_none());
}

#[test]
fn fit_composite_levels_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_csv(dir.path());
    let output = dir.path().join("fit.json");
    let out = cqreg(&[
        "fit", "--input", &input, "--response", "1", "--tau", "0.1,0.2,0.3", "--algorithm", "ip",
        "--output", output.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let doc = ResultDocument::from_json(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(doc.intercepts.len(), 3);
    assert_eq!(doc.coefficients.len(), 2);
    assert!(doc.intercepts.windows(2).all(|w| w[0] <= w[1] + 1e-8));
}

#[test]
fn fit_regularized_records_pilot_and_csv_format() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_csv(dir.path());
    let out = cqreg(&[
        "fit", "--input", &input, "--response", "y", "--tau", "0.5", "--algorithm", "mm", "--lambda", "0.5",
        "--format", "csv",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# lambda=0.5\n"));
    assert!(text.contains("term,estimate,pilot\nintercept@0.5,"));
    let x1 = text.lines().find(|l| l.starts_with("x1,")).unwrap();
    assert_eq!(x1.split(',').count(), 3);
    assert!(!x1.ends_with(','));
}

#[test]
fn pilot_non_convergence_exits_2_and_names_stage() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_csv(dir.path());
    let out = cqreg(&[
        "fit", "--input", &input, "--response", "y", "--tau", "0.5", "--algorithm", "admm", "--lambda", "1",
        "--max-iter", "1",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("pilot"));
    assert!(out.stdout.is_empty());
}

#[test]
fn final_non_convergence_still_emits_document() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_csv(dir.path());
    let out = cqreg(&["fit", "--input", &input, "--response", "y", "--tau", "0.5", "--algorithm", "admm", "--max-iter", "1"]);
    assert_eq!(code(&out), 2);
    let doc = ResultDocument::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!(!doc.converged);
    assert_eq!(doc.iterations, 1);
}

#[test]
fn input_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "y,a\n1,2\n3,\n").unwrap();
    let out = cqreg(&["fit", "--input", bad.to_str().unwrap(), "--response", "y", "--tau", "0.5", "--algorithm", "ip"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("line 3, column 2"));

    let missing = dir.path().join("nope.csv");
    let out = cqreg(&["fit", "--input", missing.to_str().unwrap(), "--response", "y", "--tau", "0.5", "--algorithm", "ip"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_csv(dir.path());
    let base = ["fit", "--input", input.as_str(), "--response", "y"];
    let cases: Vec<Vec<&str>> = vec![
        vec!["--tau", "0.5"],
        vec!["--tau", "1.5", "--algorithm", "ip"],
        vec!["--tau", "0.5,0.2", "--algorithm", "ip"],
        vec!["--tau", "0.5", "--algorithm", "simplex"],
        vec!["--tau", "0.5", "--algorithm", "ip", "--lambda", "-1"],
        vec!["--tau", "0.5", "--algorithm", "ip", "--pilot-algorithm", "cd"],
        vec!["--tau", "0.5", "--algorithm", "ip", "--format", "xml"],
    ];
    for extra in cases {
        let args: Vec<&str> = base.iter().copied().chain(extra.iter().copied()).collect();
        assert_eq!(code(&cqreg(&args)), 64, "{extra:?}");
    }
    assert_eq!(code(&cqreg(&[])), 64);
    assert_eq!(code(&cqreg(&["frobnicate"])), 64);
    assert_eq!(code(&cqreg(&["--help"])), 0);
    assert_eq!(code(&cqreg(&["--version"])), 0);
}

fn simulate(extra: &[&str], output: &Path, seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cqreg"));
    cmd.args(["simulate", "--output", output.to_str().unwrap()]).args(extra).env_remove("CQR_SEED");
    if let Some(seed) = seed_env {
        cmd.env("CQR_SEED", seed);
    }
    cmd.output().unwrap()
}

fn without_seconds(text: &str) -> String {
    text.lines()
        .map(|l| {
            if l.starts_with('#') {
                return l.to_string();
            }
            let mut f: Vec<&str> = l.split(',').collect();
            f[6] = "_";
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn simulate_rows_per_algorithm_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = ["--preset", "qr-noreg", "--n", "200", "--p", "5", "--reps", "5", "--algorithms", "admm,mm,cd", "--seed", "7"];
    let out = simulate(&args, &a, None);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    assert_eq!(code(&simulate(&args, &b, None)), 0);

    let text_a = std::fs::read_to_string(&a).unwrap();
    let text_b = std::fs::read_to_string(&b).unwrap();
    assert_eq!(without_seconds(&text_a), without_seconds(&text_b));
    assert!(text_a.contains("\nn,p,algorithm,mean_error,mean_N_T,mean_N_F,mean_seconds,reps"));

    let (preset, report) = report_from_csv(&text_a).unwrap();
    assert_eq!(preset, "qr-noreg");
    assert_eq!(report.rows.len(), 3);
    assert_eq!(report.base_seed, 7);
    assert!(report.rows.iter().all(|r| r.reps == 5 && r.n == 200 && r.p == 5));
}

#[test]
fn seed_environment_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let args = ["--preset", "qr-noreg", "--n", "50", "--p", "2", "--reps", "2", "--algorithms", "ip", "--seed", "7"];
    assert_eq!(code(&simulate(&args, &a, Some("123"))), 0);
    let (_, report) = report_from_csv(&std::fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(report.base_seed, 123);
    assert_eq!(code(&simulate(&args, &a, Some("abc"))), 64);
}

#[test]
fn regularized_preset_records_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let args = ["--preset", "qr-reg", "--n", "60", "--p", "8", "--reps", "2", "--algorithms", "admm", "--format", "json"];
    assert_eq!(code(&simulate(&args, &a, None)), 0);
    let doc: cqreg_cli::ReportDocument = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    let expected = (60.0f64 * 8.0f64.ln()).sqrt() / 4.0;
    assert_eq!(doc.report.lambda, Some(expected));
    assert_eq!(doc.report.true_support_size, 4);

    let b = dir.path().join("b.csv");
    let given = ["--preset", "qr-reg", "--n", "60", "--p", "8", "--reps", "2", "--algorithms", "admm", "--lambda", "2.5"];
    assert_eq!(code(&simulate(&given, &b, None)), 0);
    assert!(std::fs::read_to_string(&b).unwrap().contains("# lambda=2.5\n"));
}

#[test]
fn simulate_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let unknown = ["--preset", "table9", "--n", "50", "--p", "2", "--algorithms", "ip"];
    assert_eq!(code(&simulate(&unknown, &a, None)), 64);
    let lambda_noreg = ["--preset", "qr-noreg", "--n", "50", "--p", "2", "--algorithms", "ip", "--lambda", "1"];
    assert_eq!(code(&simulate(&lambda_noreg, &a, None)), 64);
    let support = ["--preset", "qr-reg", "--n", "50", "--p", "2", "--support", "3", "--algorithms", "ip"];
    assert_eq!(code(&simulate(&support, &a, None)), 64);
    assert!(!a.exists());
}
