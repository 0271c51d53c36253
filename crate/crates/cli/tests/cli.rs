//! End-to-end checks of the command-line front-end: reproducibility across
//! worker counts, exit codes and output formats.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_percolab"))
}

#[test]
fn csv_bodies_are_identical_across_worker_counts() {
    let run = |workers: &str| {
        let out = bin()
            .args([
                "delta-prob", "--rho", "0.8", "--l", "2", "--k", "2", "--samples", "400", "--seed",
                "9", "--workers", workers,
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(run("1"), run("2"));
}

#[test]
fn seed_environment_variable_is_honored() {
    let with_flag = bin()
        .args(["delta-prob", "--rho", "0.8", "--l", "1", "--k", "1", "--samples", "200", "--seed", "77"])
        .output()
        .unwrap();
    let with_env = bin()
        .args(["delta-prob", "--rho", "0.8", "--l", "1", "--k", "1", "--samples", "200"])
        .env("PERCOLAB_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(with_flag.stdout, with_env.stdout);
}

#[test]
fn usage_errors_exit_with_code_two() {
    let out = bin().args(["delta-prob", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn calibration_failure_exits_with_code_three() {
    let out = bin()
        .args(["calibrate-l", "--rho", "0.4", "--imax", "2", "--samples", "300", "--lmax", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn spiral_demo_is_deterministic_and_self_contained() {
    let dir = std::env::temp_dir().join("percolab_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let run = |name: &str| {
        let path = dir.join(name);
        let out = bin()
            .args([
                "spiral-demo", "--rho", "0.75", "--l", "2", "--k", "3", "--seed", "7", "--out",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(&path).unwrap()
    };
    let a = run("a.svg");
    let b = run("b.svg");
    assert_eq!(a, b, "repeated runs must emit identical bytes");
    assert!(a.starts_with("<svg"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn gadget_subcommand_checks_itself() {
    let out = bin().args(["coupling-gadget", "--p", "0.5"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("epsilon"));
    assert!(text.contains("0.506824464"));
}

#[test]
fn sweep_emits_rows_and_summary() {
    let dir = std::env::temp_dir().join("percolab_cli_sweep");
    std::fs::create_dir_all(&dir).unwrap();
    let rows = dir.join("rows.csv");
    let summary = dir.join("summary.csv");
    let out = bin()
        .args([
            "pc-sweep", "--rho", "1.0", "--sizes", "6,8", "--samples", "120", "--grid-step",
            "0.25", "--seed", "3", "--out", rows.to_str().unwrap(), "--summary",
            summary.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows_text = std::fs::read_to_string(&rows).unwrap();
    assert!(rows_text.lines().any(|l| l.starts_with("# quantity:")));
    assert!(rows_text.contains("rho,p,n,height,spanning_freq,ci,n_samples,seed"));
    let summary_text = std::fs::read_to_string(&summary).unwrap();
    assert!(summary_text.contains("rho,pc_hat,ci,method"));

    // The summary feeds straight into the plotter.
    let svg = dir.join("curve.svg");
    let out = bin()
        .args(["curve-plot", "--input", summary.to_str().unwrap(), "--out", svg.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    std::fs::remove_dir_all(&dir).ok();
}
