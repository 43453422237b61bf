use std::fs;
use std::process::{Command, Output};

fn koenigs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_koenigs")).args(args).env_remove("KOENIGS_PRECISION").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn values(csv: &str) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

#[test]
fn eval_b_default_grid() {
    let o = koenigs(&["eval", "B", "--lambda", "0.5", "--grid", "0:0.95:0.05"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("s,value,method,tail_estimate\n"));
    assert!(!out.contains('\r'));
    let v = values(&out);
    assert_eq!(v.len(), 20);
    assert_eq!(v[0], 1.0);
    assert!(v.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn domain_errors_exit_2() {
    let o = koenigs(&["eval", "B", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(koenigs(&["eval", "B", "--lambda", "1/0"]).status.code(), Some(2));
    assert_eq!(koenigs(&["eval", "B"]).status.code(), Some(2));
}

#[test]
fn measure_starts_at_e() {
    let o = koenigs(&["eval", "measure", "--lambda", "1/2", "--n", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v = values(&stdout(&o));
    assert_eq!(v.len(), 10);
    assert!((v[0] - std::f64::consts::E).abs() < 1e-14);
    assert!(v.iter().all(|&u| u > 0.0));
}

#[test]
fn figures_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = koenigs(&["figures", "2", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let manifest = fs::read(a.path().join("manifest.json")).unwrap();
    assert_eq!(manifest, fs::read(b.path().join("manifest.json")).unwrap());
    let json: serde_json::Value = serde_json::from_slice(&manifest).unwrap();
    let files = json["files"].as_array().unwrap();
    assert_eq!(files.len(), 3);
    for f in files {
        let name = f["path"].as_str().unwrap();
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn montecarlo_check_is_seeded() {
    let args = ["check", "montecarlo", "--lambda", "1/2", "--replicates", "2000", "--seed", "42"];
    let first = koenigs(&args);
    assert!(matches!(first.status.code(), Some(0 | 1)));
    assert_eq!(first.stdout, koenigs(&args).stdout);
    let json: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(json["suite"], "montecarlo");
}

#[test]
fn abel_check_passes_at_criticality() {
    let o = koenigs(&["check", "abel", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["pass"], true);
}

#[test]
fn precision_from_environment() {
    let run = |p: &str| {
        Command::new(env!("CARGO_BIN_EXE_koenigs"))
            .args(["eval", "G", "--lambda", "1/3", "--grid", "0:0.9:0.3"])
            .env("KOENIGS_PRECISION", p)
            .output()
            .unwrap()
    };
    let (d, x) = (run("double"), run("extended"));
    assert_eq!(d.status.code(), Some(0));
    assert_eq!(x.status.code(), Some(0));
    for (u, v) in values(&stdout(&d)).iter().zip(values(&stdout(&x))) {
        assert!((u - v).abs() < 1e-12);
    }
    assert_eq!(run("quad").status.code(), Some(2));
}
