use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn write_cfg(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atomdiode")).args(args).output().unwrap()
}

fn run_json(command: &str, cfg: &Path) -> Value {
    let out = run(&[command, "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn scatter_csv_has_left_transmittance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "s.cfg", "delta = 1e-3\nalpha = 0.01\nformat = csv\n");
    let out = run(&["scatter", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("output,input,s_re,s_im,t"));
    let row = lines.find(|l| l.starts_with("right,alpha,")).unwrap();
    let t: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((t - 400.0 / 601.0).abs() < 1e-3, "{t}");
}

#[test]
fn json_carries_config_version_and_regime() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "s.cfg", "delta = 1e-3\nalpha = 0.01\nregime = adiabatic\n");
    let v = run_json("scatter", &cfg);
    assert_eq!(v["tool"], "atomdiode");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["command"], "scatter");
    assert_eq!(v["regime"], "adiabatic-closed-form");
    assert_eq!(v["config"]["domega1"], -1e-3);
    assert_eq!(v["config"]["dphi"], -1e-3);
}

#[test]
fn undriven_steady_state_is_ground() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "s.cfg", "# no drive\ndelta = 1e-3\nalpha = 0\nbeta = 0\n");
    let v = run_json("steady", &cfg);
    let r = &v["result"];
    assert_eq!(r["degenerate"], false);
    assert!((r["rho"]["re"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!(r["populations"]["D"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn flap_compare_matches_full_model() {
    let v = run_json("flap-compare", &shipped("fig5.cfg"));
    let r = &v["result"];
    let analytic = r["g2_ref"]["analytic"].as_array().unwrap();
    let full = r["g2_ref"]["full"].as_array().unwrap();
    assert_eq!(analytic[0], 3.0);
    for (a, f) in analytic.iter().zip(full) {
        let (a, f) = (a.as_f64().unwrap(), f.as_f64().unwrap());
        assert!((a / f - 1.0).abs() < 2e-3, "{a} vs {f}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let cfg = shipped("fig5.cfg");
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = run(&["flap-compare", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let sweep = write_cfg(dir.path(), "e.cfg", "alpha = 0.01\nresolution = 8\n");
    let x = run(&["sweep-efficiency", "--config", sweep.to_str().unwrap(), "--threads", "1"]);
    let y = run(&["sweep-efficiency", "--config", sweep.to_str().unwrap(), "--threads", "4"]);
    assert!(x.status.success() && y.status.success());
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn seed_override_changes_monte_carlo_only() {
    let cfg = shipped("fig5.cfg");
    let a = run(&["flap-compare", "--config", cfg.to_str().unwrap(), "--seed", "1"]);
    let b = run(&["flap-compare", "--config", cfg.to_str().unwrap(), "--seed", "2"]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
    let col = |o: &Output, k: usize| -> Vec<String> {
        String::from_utf8_lossy(&o.stdout).lines().map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
    };
    assert_eq!(col(&a, 1), col(&b, 1));
    assert_eq!(col(&a, 4), col(&b, 4));
}

#[test]
fn config_errors_exit_2_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "bad.cfg", "delta = 1e-3\n\nalhpa = 0.01\n");
    let out = run(&["scatter", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.cfg:3:"), "{err}");
    assert!(err.contains("alhpa"), "{err}");

    let cfg = write_cfg(dir.path(), "cmd.cfg", "command = steady\ndelta = 1e-3\n");
    assert_eq!(run(&["scatter", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));

    let cfg = write_cfg(dir.path(), "ok.cfg", "delta = 1e-3\nalpha = 0.01\n");
    assert_eq!(run(&["scatter", "--config", cfg.to_str().unwrap(), "--threads", "0"]).status.code(), Some(2));
    let missing = dir.path().join("missing.cfg");
    assert_eq!(run(&["scatter", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_3_naming_the_module() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "dark.cfg", "delta = 1e-3\nalpha = 0\nbeta = 0\n");
    let out = run(&["correlate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("correlations"));
}

#[test]
fn shipped_configs_run() {
    for (cfg, command) in [
        ("fig2.cfg", "correlate"),
        ("fig3.cfg", "sweep-power"),
        ("fig4.cfg", "emission"),
        ("fig6.cfg", "sweep-efficiency"),
    ] {
        let v = run_json(command, &shipped(cfg));
        assert_eq!(v["command"], command);
    }
}
