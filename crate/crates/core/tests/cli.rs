use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kerr-estimation"))
}

#[test]
fn chi_scan_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let status = bin()
            .args(["chi-scan", "--variant", "one-photon", "--omega", "2,3", "--chi", "log:1e-3:1e-1:4"])
            .args(["--engine", "homodyne_p,gaussian", "--workers", workers, "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", "4");
    assert_eq!(a, run("b.csv", "1"));
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 17);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# decay profile\npreset = fig1\nn = 3\nt = 0.5, 1.0\n").unwrap();
    let out = bin()
        .args(["decay-profile", "--format", "json", "--n", "4", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "decay-profile");
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 4);
    assert!(records.iter().all(|r| r["n"] == 4));
    assert!(records.iter().any(|r| r["marker"] == "t_op"));
}

#[test]
fn decay_profile_oracle_check_flag() {
    let out = bin()
        .args(["decay-profile", "--n", "2", "--gamma", "0.2", "--chi", "0.7", "--omega-c", "1"])
        .args(["--t", "0.5,2.5,5", "--oracle-check"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let dev: f64 = fields[17].parse().unwrap();
        assert!(dev < 1e-8, "{line}");
        assert_eq!(fields[19], "ok");
    }
}

#[test]
fn scaling_fit_reports_summary() {
    let out = bin()
        .args(["scaling-fit", "--fit", "pure_kerr", "--n", "8,16,32,64,128,256", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let slope = v["summary"]["slope"].as_f64().unwrap();
    assert!((slope + 2.0).abs() < 0.02);
    assert_eq!(v["summary"]["regime"], "pure_kerr");
}

#[test]
fn config_errors_exit_with_two() {
    for args in [
        vec!["chi-scan", "--chi", "abc"],
        vec!["chi-scan", "--mode", "sometimes"],
        vec!["chi-scan", "--engine", "decay"],
        vec!["scaling-fit", "--fit", "pure_kerr", "--n", "2,3"],
        vec!["decay-profile", "--preset", "fig9"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let out = bin().arg("chi-scan").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
