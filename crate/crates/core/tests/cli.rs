use std::path::Path;
use std::process::{Command, Output};

use mfplast::scenario::Scenario;

fn mfplast(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfplast"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn scenario_path() -> String {
    format!("{}/scenarios/granular.toml", env!("CARGO_MANIFEST_DIR"))
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn shipped_scenario_is_the_default() {
    let text = std::fs::read_to_string(scenario_path()).unwrap();
    let mut parsed = Scenario::parse(&text).unwrap();
    assert_eq!(parsed.output.directory.as_deref(), Some(Path::new("results")));
    parsed.output.directory = None;
    assert_eq!(parsed, Scenario::default_scenario());
}

#[test]
fn run_default_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = mfplast(&["run", "--default-scenario", "--out", "res", "--per-phase"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let res = dir.path().join("res");
    let macro_rows = rows(&res.join("macro.csv"));
    assert_eq!(macro_rows.len(), 151);
    assert_eq!(&macro_rows[0][0], "0");
    assert_eq!(rows(&res.join("phases.csv")).len(), 151 * 27);
    let axial = rows(&res.join("plot_axial.csv"));
    let lateral = rows(&res.join("plot_lateral.csv"));
    assert_eq!((axial.len(), lateral.len()), (151, 151));
    let s: f64 = axial[100][1].parse().unwrap();
    assert!(s > 0.1 && s < 0.11);
}

#[test]
fn run_file_uses_configured_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = mfplast(&["run", &scenario_path()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("results/macro.csv").exists());
    assert!(!dir.path().join("results/phases.csv").exists());
}

#[test]
fn elastic_inclusions_are_stiffer() {
    let dir = tempfile::tempdir().unwrap();
    for (name, extra) in [("plastic", None), ("elastic", Some("--elastic-inclusions"))] {
        let mut args = vec!["run", "--default-scenario", "--out", name];
        args.extend(extra);
        assert!(mfplast(&args, dir.path()).status.success());
    }
    let peak = |name: &str| -> f64 {
        rows(&dir.path().join(name).join("plot_axial.csv"))[100][1].parse().unwrap()
    };
    assert!(peak("elastic") > peak("plastic") + 1e-4);
    let elastic = rows(&dir.path().join("elastic/macro.csv"));
    assert!(elastic.iter().all(|r| r[r.len() - 1] == *"0"));
}

#[test]
fn operators_prints_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let out = mfplast(&["operators", "--default-scenario"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let residuals: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("residual"))
        .map(|l| l.rsplit('=').next().unwrap().trim().parse().unwrap())
        .collect();
    assert_eq!(residuals.len(), 2);
    assert!(residuals.iter().all(|r| *r < 1e-10));
    assert!(text.contains("effective stiffness"));
}

#[test]
fn check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = mfplast(&["check"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[matrix]\nyoung = 100.0\npoisson = 0.25\ncolour = 1\n").unwrap();
    let out = mfplast(&["run", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let out = mfplast(&["run", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(4));

    // a program whose first step cannot converge
    let text = std::fs::read_to_string(scenario_path())
        .unwrap()
        .replace("jacobian = \"analytic\"", "jacobian = \"analytic\"\nmax_newton_iterations = 1\nmax_subdivisions = 0");
    std::fs::write(dir.path().join("hard.toml"), text).unwrap();
    let out = mfplast(&["run", "hard.toml"], dir.path());
    assert_eq!(out.status.code(), Some(3));

    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let out = mfplast(&["run", "--default-scenario", "--out", "blocker/sub"], dir.path());
    assert_eq!(out.status.code(), Some(4));

    let out = mfplast(&["run"], dir.path());
    assert!(!out.status.success());
}
