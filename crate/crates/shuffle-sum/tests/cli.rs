//! CLI-level checks: subcommand wiring, config-file precedence rules and
//! output formats.

use std::io::Write;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shuffle-sum"))
}

#[test]
fn plan_json_reports_feasibility() {
    let out = binary()
        .args(["plan", "--protocol", "ikos", "--n", "10000", "--epsilon", "1", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["messages"], 9);
    assert_eq!(value["feasible"], true);
    assert_eq!(value["delta"], 1e-8);
}

#[test]
fn bounds_formats() {
    for format in ["csv", "json", "md"] {
        let out = binary()
            .args(["bounds", "--n", "10000", "--epsilon", "1", "--format", format])
            .output()
            .unwrap();
        assert!(out.status.success(), "format {format}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("CuratorDP"), "format {format}: {text}");
    }
}

#[test]
fn run_config_file_with_flag_override() {
    let mut config = tempfile::NamedTempFile::new().unwrap();
    writeln!(
        config,
        "protocol = central-laplace\nn = 50\nepsilon = 1.0\nruns = 4\nseed = 3\ndataset = ur"
    )
    .unwrap();

    let from_file = binary()
        .args(["run", "--config", config.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(from_file.status.success());
    let report: serde_json::Value = serde_json::from_slice(&from_file.stdout).unwrap();
    assert_eq!(report["protocol"], "central-laplace");
    assert_eq!(report["n"], 50);
    assert_eq!(report["runs"], 4);

    // An explicit flag wins over the file.
    let overridden = binary()
        .args([
            "run",
            "--config",
            config.path().to_str().unwrap(),
            "--runs",
            "2",
            "--seed",
            "9",
        ])
        .output()
        .unwrap();
    assert!(overridden.status.success());
    let report: serde_json::Value = serde_json::from_slice(&overridden.stdout).unwrap();
    assert_eq!(report["runs"], 2);
    assert_eq!(report["seed"], 9);
}

#[test]
fn infeasible_run_renders_inf() {
    let out = binary()
        .args([
            "run",
            "--protocol",
            "recursive",
            "--n",
            "10000",
            "--epsilon",
            "0.5",
            "--delta",
            "1e-8",
            "--messages",
            "3",
            "--runs",
            "1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["analytic_mse_bound"], "inf");
    assert_eq!(report["runs"], 0);
}

#[test]
fn bad_parameters_exit_nonzero() {
    let out = binary()
        .args(["plan", "--protocol", "single", "--n", "100", "--epsilon", "2"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("eps"), "{err}");
}
