//! End-to-end tests of the `pickands` binary: argument surface, file
//! formats, round-trips, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pickands"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn pickands");
    assert!(
        out.status.success(),
        "command failed: stdout={} stderr={}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .skip(1) // header
        .collect()
}

#[test]
fn estimate_emits_the_documented_table() {
    let out = run_ok(bin().args([
        "estimate",
        "--model",
        "pareto:1",
        "--n",
        "100000",
        "--k",
        "1000",
        "--grid",
        "0.3,0.7,9",
        "--seed",
        "7",
    ]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let header = stdout
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("header row");
    assert_eq!(header, "s,P_n,p_n,kappa,kappa_star");
    let rows = data_rows(&stdout);
    assert_eq!(rows.len(), 9, "expected 9 data rows");
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 5);
        for field in fields {
            field.parse::<f64>().expect("numeric field");
        }
    }
    // Config echo present.
    assert!(stdout.starts_with("# schema=1 command=estimate"));
    assert!(stdout.contains("seed=7"));
}

#[test]
fn sample_round_trip_reproduces_estimates_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let sample_path = dir.path().join("sample.csv");
    run_ok(bin().args([
        "sample",
        "--model",
        "pareto:1",
        "--n",
        "20000",
        "--seed",
        "3",
        "--out",
        sample_path.to_str().unwrap(),
    ]));

    let from_model = run_ok(bin().args([
        "estimate",
        "--model",
        "pareto:1",
        "--n",
        "20000",
        "--seed",
        "3",
        "--k",
        "200",
        "--grid",
        "0.35,0.65,5",
    ]));
    let from_file = run_ok(bin().args([
        "estimate",
        "--input",
        sample_path.to_str().unwrap(),
        "--gamma",
        "1",
        "--k",
        "200",
        "--grid",
        "0.35,0.65,5",
    ]));

    let model_csv = String::from_utf8(from_model.stdout).unwrap();
    let file_csv = String::from_utf8(from_file.stdout).unwrap();
    let pick = |csv: &str| -> Vec<(String, String, String)> {
        data_rows(csv)
            .iter()
            .map(|row| {
                let f: Vec<&str> = row.split(',').collect();
                // s, P_n, kappa_star are computable in both modes.
                (f[0].to_string(), f[1].to_string(), f[4].to_string())
            })
            .collect()
    };
    assert_eq!(pick(&model_csv), pick(&file_csv));
}

#[test]
fn check_conditions_accepts_the_sqrt_rule() {
    let out = run_ok(bin().args([
        "check-conditions",
        "--model",
        "pareto:1",
        "--k-rule",
        "sqrt",
        "--lambda",
        "2",
        "--a",
        "0.5",
        "--n",
        "1000,100000,10000000",
    ]));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["condition_k"]["accepted"], true);
    assert_eq!(json["rc"]["rc1_trend_to_zero"], true);
    assert_eq!(json["schema"], 1);
}

#[test]
fn optimized_measure_beats_the_point_mass_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let sample = dir.path().join("sample.csv");
    let optimal = dir.path().join("optimal.json");
    let dirac = dir.path().join("dirac.json");

    run_ok(bin().args([
        "sample",
        "--model",
        "pareto:1",
        "--n",
        "100000",
        "--seed",
        "5",
        "--out",
        sample.to_str().unwrap(),
    ]));
    run_ok(bin().args([
        "optimize-measure",
        "--K",
        "1",
        "--grid",
        "0.3,0.7,21",
        "--out",
        optimal.to_str().unwrap(),
    ]));
    std::fs::write(&dirac, r#"{"support": [0.5], "weights": [1.0]}"#).unwrap();

    let estimate = |measure: &Path| -> serde_json::Value {
        let out = run_ok(bin().args([
            "integral-estimate",
            "--input",
            sample.to_str().unwrap(),
            "--k",
            "1000",
            "--measure",
            measure.to_str().unwrap(),
            "--K",
            "1",
        ]));
        serde_json::from_slice(&out.stdout).unwrap()
    };

    let optimal_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&optimal).unwrap()).unwrap();
    assert!(optimal_json["kkt_residual"].as_f64().unwrap() < 1e-8);

    let with_optimal = estimate(&optimal);
    let with_dirac = estimate(&dirac);
    let se_optimal = with_optimal["std_error"].as_f64().unwrap();
    let se_dirac = with_dirac["std_error"].as_f64().unwrap();
    assert!(
        se_optimal <= se_dirac,
        "optimal std_error {se_optimal} exceeds point-mass {se_dirac}"
    );
}

#[test]
fn mc_reports_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.json");
    let eight = dir.path().join("eight.json");
    for (threads, path) in [("1", &one), ("8", &eight)] {
        run_ok(bin().args([
            "mc-normality",
            "--threads",
            threads,
            "--model",
            "pareto:1",
            "--n",
            "20000",
            "--k",
            "200",
            "--grid",
            "0.4,0.6,3",
            "--reps",
            "400",
            "--seed",
            "12",
            "--out",
            path.to_str().unwrap(),
        ]));
    }
    let a = std::fs::read(&one).unwrap();
    let b = std::fs::read(&eight).unwrap();
    assert_eq!(a, b, "reports differ across thread counts");
}

#[test]
fn mc_lemma1_accepts_levels_including_one() {
    let out = run_ok(bin().args([
        "mc-lemma1",
        "--n",
        "20000",
        "--k",
        "200",
        "--levels",
        "0.25,0.5,1",
        "--reps",
        "500",
        "--seed",
        "4",
    ]));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["experiment"], "lemma1");
    assert_eq!(json["points"].as_array().unwrap().len(), 3);
}

#[test]
fn limit_cov_emits_square_matrix_and_discrepancy_report() {
    let dir = tempfile::tempdir().unwrap();
    let discrepancy = dir.path().join("discrepancy.json");
    let out = run_ok(bin().args([
        "limit-cov",
        "--K",
        "1",
        "--grid",
        "0.3,0.7,5",
        "--discrepancy-out",
        discrepancy.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = stdout
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        assert_eq!(row.split(',').count(), 5);
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&discrepancy).unwrap()).unwrap();
    assert!(report["max_abs_deviation"].as_f64().unwrap() >= 0.0);
}

#[test]
fn simulate_paths_emits_one_row_per_path() {
    let out = run_ok(bin().args([
        "simulate-paths",
        "--K",
        "0",
        "--grid",
        "0.3,0.7,4",
        "--paths",
        "7",
        "--seed",
        "2",
    ]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = stdout
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .collect();
    // Header of grid points plus one row per path.
    assert_eq!(rows.len(), 8);
}

#[test]
fn validation_errors_exit_2() {
    let out = bin()
        .args(["estimate", "--model", "cauchy", "--n", "100", "--k", "10", "--grid", "0.3,0.7,3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("kind=invalid-input"), "stderr: {stderr}");
}

#[test]
fn numerical_tie_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let sample = dir.path().join("sample.csv");
    let measure = dir.path().join("measure.json");
    run_ok(bin().args([
        "sample",
        "--model",
        "uniform",
        "--n",
        "100",
        "--seed",
        "1",
        "--out",
        sample.to_str().unwrap(),
    ]));
    // floor(k/s) = k at s = 0.9, k = 2: a degenerate rank collision.
    std::fs::write(&measure, r#"{"support": [0.9], "weights": [1.0]}"#).unwrap();
    let out = bin()
        .args([
            "integral-estimate",
            "--input",
            sample.to_str().unwrap(),
            "--k",
            "2",
            "--measure",
            measure.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("kind=tie"), "stderr: {stderr}");
}

#[test]
fn zero_region_measure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let sample = dir.path().join("sample.csv");
    let measure = dir.path().join("measure.json");
    run_ok(bin().args([
        "sample",
        "--model",
        "pareto:1",
        "--n",
        "100",
        "--seed",
        "1",
        "--out",
        sample.to_str().unwrap(),
    ]));
    // s^2 = 0.09 < k/n = 0.5: the estimator is zero by convention there.
    std::fs::write(&measure, r#"{"support": [0.3], "weights": [1.0]}"#).unwrap();
    let out = bin()
        .args([
            "integral-estimate",
            "--input",
            sample.to_str().unwrap(),
            "--k",
            "50",
            "--measure",
            measure.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("kind=zero-region"));
}

#[test]
fn seed_env_var_sets_the_default() {
    let with_env = bin()
        .args(["sample", "--model", "uniform", "--n", "10"])
        .env("PICKANDS_SEED", "42")
        .output()
        .unwrap();
    let with_flag = run_ok(bin().args([
        "sample", "--model", "uniform", "--n", "10", "--seed", "42",
    ]));
    assert_eq!(with_env.stdout, with_flag.stdout);
}
