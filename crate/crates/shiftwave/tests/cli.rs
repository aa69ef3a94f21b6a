use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_shiftwave"));
    c.env_remove("SHIFTWAVE_OUT");
    c
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().arg("--out").arg(out).args(args).output().unwrap()
}

fn summary(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn clean_shock_run_passes_with_zero_shift() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = config("riemann_shock.toml");
    let o = run(&["run", cfg.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["pass"], true);
    let shock = &s["studies"][0];
    assert_eq!(shock["metrics"]["x_infinity"], 0.0);
    let csv = fs::read_to_string(out.join("shock.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let residual: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(residual.abs() < 1e-8);
    }
    // defaults are spelled out
    assert_eq!(s["config"]["thresholds"]["shock_slope_max"], -0.85);
    assert_eq!(s["config"]["resolution"]["points_per_period"], 64);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("riemann_shock.toml");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["run", cfg.to_str().unwrap()], &a).status.success());
    assert!(run(&["--threads", "2", "run", cfg.to_str().unwrap()], &b).status.success());
    for f in ["shock.csv", "shock_sides.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn failed_assertion_sets_exit_status() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("riemann_shock.toml")).unwrap()
        + "\n[thresholds]\nshock_final_residual = -1.0\n";
    let cfg = write(tmp.path(), "c.toml", &text);
    let out = tmp.path().join("out");
    let o = run(&["run", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(summary(&out)["pass"], false);

    // the same failure is ignored when assertions are off
    let quiet = write(tmp.path(), "q.toml", &text.replace("transient_factor", "assert = false\ntransient_factor"));
    let o = run(&["run", quiet.to_str().unwrap()], &tmp.path().join("q"));
    assert!(o.status.success());
}

#[test]
fn malformed_flux_leaves_no_output() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("riemann_shock.toml")).unwrap().replace("\"burgers\"", "\"bergers\"");
    let cfg = write(tmp.path(), "bad.toml", &text);
    let out = tmp.path().join("out");
    for cmd in ["run", "validate", "compare"] {
        let o = run(&[cmd, cfg.to_str().unwrap()], &out);
        assert_eq!(o.status.code(), Some(2));
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains("line"), "{err}");
    }
    assert!(!out.exists());
}

#[test]
fn semantic_validation_error_leaves_no_output() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("riemann_shock.toml")).unwrap().replace("kinds = [\"shock\"]", "kinds = [\"rarefaction\"]");
    let cfg = write(tmp.path(), "bad.toml", &text);
    let out = tmp.path().join("out");
    let o = run(&["run", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[study]"));
    assert!(!out.exists());
}

#[test]
fn seed_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("riemann_shock.toml");
    let out = tmp.path().join("out");
    let o = run(&["--seed", "7", "run", cfg.to_str().unwrap()], &out);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("randomness"));
    assert!(!out.exists());
}

#[test]
fn validate_prints_resolved_config() {
    let o = bin().args(["validate", config("oracle.toml").to_str().unwrap()]).output().unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["compare"]["cfl"], 0.9);
}

#[test]
fn env_var_sets_default_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("from-env");
    let o = bin()
        .env("SHIFTWAVE_OUT", &out)
        .args(["run", config("riemann_shock.toml").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(out.join("summary.json").exists());
}

#[test]
fn compare_on_constant_data_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[flux]\nname = \"burgers\"\n[states]\nleft = 0.5\nright = 0.5\n[times]\nlist = [1.0]\n\
                [compare]\nwindow = [-1.0, 1.0]\ndx = [0.0625, 0.03125]\n";
    let cfg = write(tmp.path(), "c.toml", text);
    let out = tmp.path().join("out");
    let o = run(&["compare", cfg.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("compare.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let l1: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(l1 < 1e-14);
    }
}

#[test]
fn compare_refuses_small_domain() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("oracle.toml")).unwrap() + "domain = [-5.0, 5.0]\n";
    let cfg = write(tmp.path(), "c.toml", &text);
    let out = tmp.path().join("out");
    let o = run(&["compare", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("too small"));
    assert!(!out.exists());
}
