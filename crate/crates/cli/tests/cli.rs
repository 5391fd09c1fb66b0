use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbf"))
        .args(args)
        .output()
        .unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const SMALL: &str = r#"
[grid]
dim = 2
modes = 16

[physics]
mu = 1.0
beta = 1.0
r = 3.0
forcing = [{ k = [0, 1], amplitude = [[0.0, -0.05], [0.0, 0.0]] }]

[solver]
h = 0.01
t_final = 0.5
max_t = 1.0
"#;

#[test]
fn unforced_condition_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("unforced.toml");
    let out = cbf(&[
        "check-conditions",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("holds: true, varrho = 1"), "{stdout}");
    assert!(dir.path().join("conditions.json").exists());
    assert!(dir.path().join("manifest-check-conditions.json").exists());
}

#[test]
fn invalid_configs_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.toml",
        "[grid]\ndim = 3\nmodes = 8\n\n[physics]\nmu = 1.0\nbeta = 1.0\nr = 2.0\n",
    );
    let out = cbf(&["check-conditions", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("r ≥ 3"));

    let broken = write(dir.path(), "broken.toml", "[grid]\ndim = 2\nmodes = = 8\n");
    let out = cbf(&["simulate", "--config", &broken]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let unknown = write(
        dir.path(),
        "unknown.toml",
        "[grid]\ndim = 2\nmodes = 8\nsize = 3\n",
    );
    assert_eq!(
        cbf(&["simulate", "--config", &unknown]).status.code(),
        Some(2)
    );

    let missing = dir.path().join("nope.toml");
    assert_ne!(
        cbf(&["simulate", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn short_singleton_search_exits_with_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out_dir = dir.path().join("run");
    let out = cbf(&[
        "singleton",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let log = std::fs::read_to_string(out_dir.join("singleton_log.csv")).unwrap();
    assert!(log.lines().count() > 1);
    assert!(!out_dir.join("a_star.cbff").exists());
}

#[test]
fn simulate_then_report_with_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out_dir = dir.path().join("run");
    let out_str = out_dir.to_str().unwrap();
    let out = cbf(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out_str,
        "--workers",
        "2",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,h_norm,v_norm,lr_norm,energy_residual"));
    assert!(out_dir.join("final.cbff").exists());

    let out = cbf(&["report", "--out", out_str, "--format", "svg"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out_dir.join("report.txt").exists());
    let svg = std::fs::read_to_string(out_dir.join("trajectory.svg")).unwrap();
    assert!(svg.starts_with("<svg"));

    // the manifest reproduces the run byte for byte
    let manifest = out_dir.join("manifest-simulate.json");
    let again = dir.path().join("again");
    let out = cbf(&[
        "simulate",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        std::fs::read(again.join("trajectory.csv")).unwrap(),
        csv.into_bytes()
    );
}

#[test]
fn format_selection_skips_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out_dir = dir.path().join("run");
    let out = cbf(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!out_dir.join("trajectory.csv").exists());
    assert!(out_dir.join("trajectory.json").exists());
}
