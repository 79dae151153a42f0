use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
base_seed = 3
reps = 2
[setup]
k = 2
p = 30
t = 60
[[dgp]]
kind = "dgp1"
[[policy]]
name = "etc"
t0 = 20
[[policy]]
name = "uniform"
"#;

fn hdbandit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdbandit"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("small.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn missing_config_is_a_config_error() {
    let out = hdbandit(&[
        "run",
        "--config",
        "/nonexistent/cfg.toml",
        "--out",
        "/tmp/x",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(hdbandit(&["run", "--frobnicate"]).status.code(), Some(2));
}

#[test]
fn spectrum_of_compound_symmetry() {
    let out = hdbandit(&["spectrum", "--dgp", "dgp4", "--p", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let eigs: Vec<f64> = text
        .lines()
        .skip_while(|l| !l.starts_with("k\t"))
        .skip(1)
        .map(|l| l.split('\t').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(eigs.len(), 5);
    assert!((eigs[0] - 1.9).abs() < 1e-12);
    assert!(eigs[1..].iter().all(|v| (v - 0.4).abs() < 1e-12));
}

#[test]
fn run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("out");
    let out = hdbandit(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for file in [
        "episodes.csv",
        "aggregate.csv",
        "episodes_meta.csv",
        "failures.csv",
    ] {
        assert!(out_dir.join(file).is_file(), "{file}");
    }
    let episodes = std::fs::read_to_string(out_dir.join("episodes.csv")).unwrap();
    // header + 2 policies x 2 reps x 60 rounds
    assert_eq!(episodes.lines().count(), 1 + 2 * 2 * 60);
}

#[test]
fn run_needs_an_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    assert_eq!(hdbandit(&["run", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn sweep_writes_one_row_per_t0() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("sweep");
    let out = hdbandit(&[
        "sweep-t0",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--t0",
        "4,20,60",
        "--sequential",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let sweep = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(
        sweep.lines().next(),
        Some("dgp,t0,mean_final_regret,std_final_regret,n_reps")
    );
    assert_eq!(sweep.lines().count(), 4);

    let bad = hdbandit(&[
        "sweep-t0",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--t0",
        "1",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}
