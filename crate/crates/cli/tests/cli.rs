use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use robust_bayes::output::{read_curve, read_fit, read_table};
use robust_bayes_core::ratelab::{
    simulate_measure_curve, ExperimentConfig, Measure, SamplingModel, Sequential,
};
use robust_bayes_core::LossClass;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robust-bayes"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL_RATES: &str = "\
model.family = exponential
model.theta = 1.5
class.kind = smooth
experiment.measure = diameter
experiment.n_grid = 20, 40, 80, 160
experiment.replications = 12
experiment.band = 0.3
";

#[test]
fn misspelled_key_exits_with_configuration_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.conf",
        "model.family = normal\nmodel.theta = 0\nexperiment.replicatons = 10\n",
    );
    let out = run(&["rates", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("replicatons") && err.contains("line 3"),
        "{err}"
    );
}

#[test]
fn missing_keys_and_files_are_configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "partial.conf", "model.family = normal\n");
    let out = run(&[
        "rates",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("class.kind") && err.contains("model.theta"),
        "{err}"
    );
    // Nothing was computed, so nothing was written.
    assert!(!dir.path().join("curve.csv").exists());
    assert_eq!(
        run(&["thm81", "/nonexistent/run.conf"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["normal-demo", "--k1", "1", "--k2", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn slope_outside_band_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL_RATES}experiment.predicted = 3\n");
    let cfg = write_config(dir.path(), "r.conf", &text);
    let out = run(&[
        "rates",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let (_, pass) = read_fit(&dir.path().join("fit.csv")).unwrap();
    assert!(!pass);
}

#[test]
fn dam_demo_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["dam-demo", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_table(&dir.path().join("dam_demo.csv")).unwrap();
    assert_eq!(header[2], "d_reference");
    let s = robust_bayes::commands::dam_summary().unwrap();
    let parsed: Vec<f64> = rows[0].iter().map(|v| v.parse().unwrap()).collect();
    let expected = [
        s.d_upper,
        s.d_lower,
        s.d_reference,
        s.sup_regret,
        s.limit_diameter,
        s.limit_sup_regret,
    ];
    for (a, b) in parsed.iter().zip(expected) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn curve_csv_matches_in_process_run_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r.conf", SMALL_RATES);
    let out = run(&[
        "rates",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = read_curve(&dir.path().join("curve.csv")).unwrap();
    let model = SamplingModel::exponential(1.5).unwrap();
    let class: LossClass = robust_bayes_core::losses::smooth_translation_class()
        .unwrap()
        .into();
    let config = ExperimentConfig::new(vec![20, 40, 80, 160], 12, 99, Measure::Diameter);
    let curve = simulate_measure_curve(&model, &class, None, &config, &Sequential).unwrap();
    assert_eq!(rows.len(), curve.rows.len());
    for (a, b) in rows.iter().zip(&curve.rows) {
        assert_eq!(
            (a.n, a.replication, &a.status),
            (b.n, b.replication, &b.status)
        );
        assert_eq!(a.value.unwrap().to_bits(), b.value.unwrap().to_bits());
    }
    let text = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert!(text.starts_with("n,replication,measure_value,status\n"));
}

#[test]
fn output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r.conf", SMALL_RATES);
    let mut files = Vec::new();
    for (workers, seed) in [("1", "7"), ("3", "7"), ("2", "8")] {
        let out_dir = dir.path().join(format!("w{workers}s{seed}"));
        let out = run(&[
            "rates",
            cfg.to_str().unwrap(),
            "--workers",
            workers,
            "--seed",
            seed,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        files.push(std::fs::read(out_dir.join("curve.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_ne!(files[0], files[2]);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "r.conf",
        &format!("{SMALL_RATES}experiment.seed = 5\n"),
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    run(&["rates", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    run(&[
        "rates",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--out",
        b.to_str().unwrap(),
    ]);
    run(&[
        "rates",
        cfg.to_str().unwrap(),
        "--seed",
        "6",
        "--out",
        c.to_str().unwrap(),
    ]);
    let read = |p: &Path| std::fs::read(p.join("curve.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn diagnostics_report_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "class.kind = dam\nmodel.theta = 0.5\n",
            vec!["1a   pass", "1c   pass", "1g   pass"],
        ),
        (
            "class.kind = constant\nmodel.theta = 0\n",
            vec!["1g   FAIL"],
        ),
        (
            "class.kind = asymmetric\nmodel.theta = 0\n",
            vec!["1c   FAIL", "registered kink"],
        ),
    ];
    for (i, (text, expect)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("d{i}.conf"), text);
        let out = run(&["diagnostics", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let stdout = String::from_utf8_lossy(&out.stdout);
        for e in expect {
            assert!(stdout.contains(e), "missing `{e}` in\n{stdout}");
        }
    }
}

#[test]
fn expansion_checks_run_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "t.conf",
        "model.family = exponential\nmodel.theta = 0.5\nexperiment.test_function = cube\nexperiment.n_grid = 50, 1600\nexperiment.replications = 40\n",
    );
    let out = run(&[
        "thm82",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(dir.path().join("thm82_curve.csv").exists());
    // `log` is only offered for the first-order check.
    let bad = write_config(
        dir.path(),
        "b.conf",
        "model.family = normal\nmodel.theta = 0\nexperiment.test_function = log\n",
    );
    assert_eq!(
        run(&["thm82", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn normal_demo_agrees_with_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "normal-demo",
        "--n-list",
        "10,100,1000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_table(&dir.path().join("normal_demo.csv")).unwrap();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let scaled: Vec<f64> = rows
        .iter()
        .map(|r| {
            r[col("diameter")].parse::<f64>().unwrap()
                * r[col("lambda_n")].parse::<f64>().unwrap().sqrt()
        })
        .collect();
    assert!(scaled
        .iter()
        .all(|v| (v - scaled[0]).abs() < 1e-6 * scaled[0]));
    for r in &rows {
        let range: f64 = r[col("range")].parse().unwrap();
        let lambda_n: f64 = r[col("lambda_n")].parse().unwrap();
        assert!((range * lambda_n - 0.5).abs() < 1e-9);
    }
}
