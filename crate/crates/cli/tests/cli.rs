use std::path::Path;
use std::process::{Command, Output};

use nfuq::model::problem1;
use nfuq_cli::csv::read_numeric;

fn nfuq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nfuq"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn table(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    read_numeric(&std::fs::read_to_string(path).unwrap()).expect("numeric csv")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_problem1_at_zero_is_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let o = nfuq(
        dir.path(),
        &[
            "solve",
            "--set",
            "problem.preset=problem1",
            "--set",
            "stochastic.point=[0.0]",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = table(&dir.path().join("solution.csv"));
    assert_eq!(header.len(), 2);
    assert_eq!(rows.len(), 41);
    for r in rows {
        assert!((r[1] - (4.0 * std::f64::consts::PI * r[0]).sin()).abs() < 1e-9);
    }
}

#[test]
fn ring_smoke_solve() {
    let dir = tempfile::tempdir().unwrap();
    let o = nfuq(
        dir.path(),
        &[
            "solve",
            "--set",
            "problem.preset=ring",
            "--set",
            "problem.T=5",
            "--set",
            "stochastic.point=\"midpoint\"",
            "--format",
            "csv,svg",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = table(&dir.path().join("solution.csv"));
    assert_eq!(rows.len(), 64);
    assert_eq!(header.len(), 42);
    assert!(rows.iter().flatten().all(|v| v.is_finite()));
    let svg = std::fs::read_to_string(dir.path().join("solution.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn missing_fields_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = nfuq(dir.path(), &["uq"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("problem.preset"), "{}", stderr(&o));

    let o = nfuq(dir.path(), &["solve", "--set", "problem.preset=problem1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stochastic.point"));

    let o = nfuq(dir.path(), &["bogus"]);
    assert_eq!(o.status.code(), Some(1));

    let cfg = dir.path().join("broken.toml");
    std::fs::write(&cfg, "[problem]\npreset = \"problem1\"\nalpha = \n").unwrap();
    let o = nfuq(dir.path(), &["uq", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn solver_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = nfuq(
        dir.path(),
        &[
            "uq",
            "--set",
            "problem.preset=problem1",
            "--set",
            "integrator.max_steps=2",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("node") && err.contains("steps"), "{err}");
}

#[test]
fn uq_problem1_mean_and_variance() {
    let dir = tempfile::tempdir().unwrap();
    let o = nfuq(
        dir.path(),
        &[
            "uq",
            "--set",
            "problem.preset=problem1",
            "--format",
            "csv,svg",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, mean) = table(&dir.path().join("mean.csv"));
    for r in &mean {
        assert!((r[1] - problem1::exact_mean(r[0], 1.0, -2.0, 0.5)).abs() < 1e-8);
    }
    let (_, var) = table(&dir.path().join("variance.csv"));
    assert!(var.iter().all(|r| r[1] >= 0.0));
    assert!(dir.path().join("mean.svg").exists() && dir.path().join("variance.svg").exists());
}

#[test]
fn converge_problem1_q_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = nfuq(
        dir.path(),
        &[
            "converge",
            "--set",
            "problem.preset=problem1",
            "--format",
            "csv,svg",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = table(&dir.path().join("convergence.csv"));
    assert_eq!(header, vec!["n", "q_1", "error", "seconds"]);
    assert_eq!(rows.len(), 10);
    for w in rows.windows(2) {
        if w[0][2] < 1e-10 {
            break;
        }
        assert!(w[1][2] < w[0][2], "{:?}", rows);
    }
    assert!(rows.last().unwrap()[2] < 1e-10);
    assert!(dir.path().join("convergence.svg").exists());
}

#[test]
fn converge_n_sweep_and_interval_width() {
    let dir = tempfile::tempdir().unwrap();
    let o = nfuq(
        dir.path(),
        &[
            "converge",
            "--set",
            "problem.preset=problem1",
            "--set",
            "converge.n=[8,16,24,32,40]",
            "--set",
            "converge.q=[20]",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, rows) = table(&dir.path().join("convergence.csv"));
    let errs: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");

    // at a fixed order the wider interval is no more accurate
    let err_for = |alpha: &str| {
        let d = tempfile::tempdir().unwrap();
        let o = nfuq(
            d.path(),
            &[
                "converge",
                "--set",
                "problem.preset=problem1",
                "--set",
                &format!("problem.alpha={alpha}"),
                "--set",
                "converge.q=[4]",
            ],
        );
        assert_eq!(o.status.code(), Some(0));
        table(&d.path().join("convergence.csv")).1[0][2]
    };
    assert!(err_for("-2.0") >= err_for("-0.5"));
}

#[test]
fn mc_check_problem1_passes_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "mc-check",
        "--set",
        "problem.preset=problem1",
        "--set",
        "stochastic.orders=[16]",
        "--set",
        "mc.samples=2000",
        "--set",
        "mc.seed=7",
    ];
    let o = nfuq(a.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(nfuq(b.path(), &args).status.code(), Some(0));
    let fa = std::fs::read(a.path().join("mc_check.csv")).unwrap();
    let fb = std::fs::read(b.path().join("mc_check.csv")).unwrap();
    assert_eq!(fa, fb);
    let (header, _) = table(&a.path().join("mc_check.csv"));
    assert_eq!(
        header,
        vec!["x", "collocation_mean", "mc_mean", "stderr", "z"]
    );
}

#[test]
fn mc_check_rejects_single_sample_and_flags_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let o = nfuq(
        dir.path(),
        &[
            "mc-check",
            "--set",
            "problem.preset=problem1",
            "--set",
            "mc.samples=1",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mc.samples"));

    // a one-node collocation rule cannot match the mean of e^{y}
    let o = nfuq(
        dir.path(),
        &[
            "mc-check",
            "--set",
            "problem.preset=problem1",
            "--set",
            "stochastic.orders=[0]",
            "--set",
            "mc.samples=2000",
        ],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(dir.path().join("mc_check.csv").exists());
}

#[test]
fn spectrum_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let o = nfuq(
        dir.path(),
        &["spectrum", "--set", "problem.preset=problem1"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("contractive: yes"));
    let (header, rows) = table(&dir.path().join("spectrum.csv"));
    assert_eq!(header, vec!["sample", "max_real"]);
    assert!((rows[0][1] + 1.0 / 3.0).abs() < 1e-10);

    let o = nfuq(
        dir.path(),
        &[
            "spectrum",
            "--set",
            "problem.preset=problem1",
            "--set",
            "problem.kernel_scale=3",
        ],
    );
    assert!(stdout(&o).contains("contractive: no"));

    let o = nfuq(
        dir.path(),
        &[
            "spectrum",
            "--set",
            "problem.preset=problem1",
            "--set",
            "problem.kernel_scale=0",
        ],
    );
    assert!(
        stdout(&o).contains("max Re λ = -1.0000000000000000e0"),
        "{}",
        stdout(&o)
    );

    let o = nfuq(
        dir.path(),
        &[
            "spectrum",
            "--set",
            "problem.preset=problem3",
            "--set",
            "stochastic.orders=[0,0,2,0]",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = table(&dir.path().join("spectrum.csv"));
    assert_eq!(header, vec!["sample", "y_w_1", "max_real"]);
    assert_eq!(rows.len(), 3);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[problem]\npreset = \"problem2\"\n\n[spatial]\nn = 16\n\n[stochastic]\norders = [2, 2]\n\n[execution]\nworkers = 2\n",
    )
    .unwrap();
    let o = nfuq(
        dir.path(),
        &["uq", "--config", cfg.to_str().unwrap(), "--workers", "1"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("9 collocation nodes, n = 17"));
}
