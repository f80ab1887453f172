use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_treeperc");

fn treeperc(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(BIN).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn small_gball(out: &Path, workers: &str) -> Vec<u8> {
    let o = treeperc(
        &["gball", "--seed", "11", "--workers", workers, "--set", "p=[0.15, 0.2]", "--set", "gball.radii=[2, 4, 8]", "--set", "gball.trials=300"],
        out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(out.join("gball.csv")).unwrap()
}

#[test]
fn zero_trials_is_a_usage_error_with_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = treeperc(&["gball", "--set", "gball.trials=0"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_config_field_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[gball]\ntrails = 10\n").unwrap();
    let o = treeperc(&["gball", "--config", cfg.to_str().unwrap()], &dir.path().join("run"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rerun_is_byte_identical_and_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let a = small_gball(&dir.path().join("a"), "1");
    let b = small_gball(&dir.path().join("b"), "1");
    let c = small_gball(&dir.path().join("c"), "2");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "graph,d,p1,p2,quantity,k1,k2,r,rho,estimate_low,estimate_high,stderr,trials,censored,seed,config_hash"
    );
    assert_eq!(lines.count(), 6);
    let sidecar: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("a/gball.json")).unwrap()).unwrap();
    for key in ["version", "config_hash", "started", "elapsed_s"] {
        assert!(sidecar.get(key).is_some(), "{key}");
    }
    assert!(text.ends_with(&format!("{}\n", sidecar["config_hash"].as_str().unwrap())));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "graph = \"tree\"\nd = 4\np = [0.3]\n\n[connprob]\nmax_norm = 4\ntrials = 200\n").unwrap();
    let out = dir.path().join("run");
    let o = treeperc(&["connprob", "--config", cfg.to_str().unwrap(), "--seed", "3"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("connprob.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].starts_with("tree,4,0.3,0.3,connection,0,0,"));
}

#[test]
fn triangle_brute_and_reduced_rows_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = treeperc(&["triangle", "--set", "triangle.radii=[1, 2, 3]", "--set", "triangle.function=\"anisotropic\""], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("triangle.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let reduced: Vec<f64> = rows.iter().filter(|r| &r[4] == "triangle_anisotropic").map(|r| r[9].parse().unwrap()).collect();
    let brute: Vec<f64> = rows.iter().filter(|r| &r[4] == "triangle_anisotropic_brute").map(|r| r[9].parse().unwrap()).collect();
    assert_eq!(reduced.len(), 9);
    assert_eq!(brute.len(), 9);
    for (a, b) in reduced.iter().zip(&brute) {
        assert!((a - b).abs() <= 1e-12 * b.abs());
    }
}

#[test]
fn triangle_on_txz_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = treeperc(&["triangle", "--set", "graph=txz"], &dir.path().join("run"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn curve_writes_plot_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = treeperc(&["curve", "--set", "curve.target=2000", "--set", "curve.seeds=2", "--set", "curve.rho_inner=[0.5]"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("curve_points.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "graph,d,rho,p1_hat,p2_hat,target_size,seed,uncertainty");
    assert_eq!(lines.count(), 5);
    assert!(out.join("curve.csv").exists());
}

#[test]
fn schramm_writes_invariance_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = treeperc(
        &["schramm", "--set", "p=[0.15]", "--set", "schramm.trials=200", "--set", "schramm.spec=[3, 3]", "--set", "schramm.return_steps=[1, 2]"],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("invariance.json")).unwrap()).unwrap();
    assert_eq!(report["tests"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_smoke_subset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = treeperc(&["verify", "--set", "verify.scale=\"smoke\"", "--set", "verify.criteria=[1, 2, 3]"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 3);
    assert!(!out.join("verify.FAILED").exists());
}
