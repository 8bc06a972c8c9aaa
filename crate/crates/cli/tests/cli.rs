//! Exit codes, output locations and subcommands of the `cloakcheck` binary.

use std::path::Path;
use std::process::{Command, Output};

fn cloakcheck(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cloakcheck"))
        .args(args)
        .current_dir(cwd)
        .env_remove("CLOAKCHECK_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = r#"
name = "small"
equation = "helmholtz"
spec = { kind = "single-ball", interior = "euclidean-ball" }
grid = { l_max = 2, k = [1.0] }

[[checks]]
kind = "max-dtn-discrepancy"
below = 1e-6
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn list_scenarios_names_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let o = cloakcheck(&["list-scenarios", "--write", "scenarios"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    for c in 1..=9 {
        assert!(text.contains(&format!("criterion {c} ")), "criterion {c} missing:\n{text}");
    }
    let written = std::fs::read_dir(dir.path().join("scenarios")).unwrap().count();
    assert_eq!(written, text.lines().count());
}

#[test]
fn passing_run_exits_zero_and_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let o = cloakcheck(&["run", &cfg, "--out", "out", "--jobs", "1"], dir.path());
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let out = dir.path().join("out");
    for f in
        ["dtn_virtual-surface.csv", "dtn_virtual-surface.schema.json", "checks.csv", "provenance.json", "summary.txt"]
    {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(stdout(&o).contains("checks: 1/1 passed"));
}

#[test]
fn failing_check_exits_two_and_still_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "strict.toml", &SMALL.replace("below = 1e-6", "below = 1e-30"));
    let o = cloakcheck(&["run", &cfg, "--out", "out"], dir.path());
    assert_eq!(code(&o), 2, "{}{}", stdout(&o), stderr(&o));
    assert!(dir.path().join("out/dtn_virtual-surface.csv").exists());
}

#[test]
fn configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "unknown.toml", &format!("colour = \"red\"\n{SMALL}"));
    let o = cloakcheck(&["run", &unknown], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));

    let invalid = write(dir.path(), "invalid.toml", &SMALL.replace("k = [1.0]", "k = [-1.0]"));
    let o = cloakcheck(&["run", &invalid], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("grid.k"), "{}", stderr(&o));

    let o = cloakcheck(&["run", "no-such-file.toml"], dir.path());
    assert_eq!(code(&o), 1);
    let o = cloakcheck(&["run", &invalid, "--jobs", "0"], dir.path());
    assert_eq!(code(&o), 1);
    let o = cloakcheck(&["frobnicate"], dir.path());
    assert_eq!(code(&o), 1);
    let o = cloakcheck(&["--help"], dir.path());
    assert_eq!(code(&o), 0);
}

#[test]
fn strict_mode_fails_on_unsolved_cells() {
    let dir = tempfile::tempdir().unwrap();
    // j_0(2k) vanishes at k = pi/2, so the l = 0 reference is undefined.
    let cfg = write(dir.path(), "resonant.toml", &SMALL.replace("k = [1.0]", "k = [1.5707963267948966, 1.0]"));
    let lenient = cloakcheck(&["run", &cfg, "--out", "a"], dir.path());
    assert_eq!(code(&lenient), 0, "{}{}", stdout(&lenient), stderr(&lenient));
    let strict = cloakcheck(&["run", &cfg, "--out", "b", "--strict"], dir.path());
    assert_eq!(code(&strict), 2);
    assert!(stdout(&strict).contains("strict:"));
}

#[test]
fn output_directory_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let o = Command::new(env!("CARGO_BIN_EXE_cloakcheck"))
        .args(["run", &cfg])
        .current_dir(dir.path())
        .env("CLOAKCHECK_OUT_DIR", dir.path().join("env"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("env/small/summary.txt").exists());

    let o = cloakcheck(&["run", &cfg], dir.path());
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("cloakcheck-out/small/summary.txt").exists());
}

#[test]
fn bundled_scenarios_run_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = cloakcheck(&["run", "c4-degeneracy", "--out", "deg"], dir.path());
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(dir.path().join("deg/degeneracy.csv").exists());
}

#[test]
fn converge_sweeps_a_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let o = cloakcheck(&["converge", &cfg, "--param", "l_max", "--values", "1,2,3", "--out", "sweep"], dir.path());
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let curve = std::fs::read_to_string(dir.path().join("sweep/convergence.csv")).unwrap();
    assert_eq!(curve.lines().count(), 4, "{curve}");

    let o = cloakcheck(&["converge", &cfg, "--param", "l_max", "--values", "1,2"], dir.path());
    assert_eq!(code(&o), 1);
    let o = cloakcheck(&["converge", &cfg, "--param", "wavelength", "--values", "1,2,3"], dir.path());
    assert_eq!(code(&o), 1);
    let o = cloakcheck(&["converge", &cfg], dir.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn converge_uses_the_scenario_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = cloakcheck(&["converge", "c9-convergence-tolerance", "--out", "tol"], dir.path());
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(dir.path().join("tol/convergence.csv").exists());
}
