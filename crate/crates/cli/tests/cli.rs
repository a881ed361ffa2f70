use std::path::Path;
use std::process::{Command, Output};

fn monolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monolab"))
        .env_remove("MONOLAB_OUT")
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(&dir.join("summary.json"))).unwrap()
}

#[test]
fn verify_schwarzschild_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = monolab(&[
        "verify-schwarzschild",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let s = summary(dir.path());
    // three exteriors plus two-ended for each positive mass
    assert_eq!(s["suites"], 5);
    assert_eq!(s["suites_failed"], 0);
    for name in [
        "schwarzschild_m0.5_r1",
        "schwarzschild_m2_r1",
        "schwarzschild_m-0.5_r1",
        "schwarzschild_m2_two_ended",
    ] {
        assert!(
            dir.path().join(format!("{name}.suite.json")).exists(),
            "{name}"
        );
        assert!(
            dir.path().join(format!("{name}.curve.csv")).exists(),
            "{name}"
        );
    }
}

#[test]
fn flat_sweep_has_constant_s() {
    let dir = tempfile::tempdir().unwrap();
    let o = monolab(&["sweep", "--flat", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = read(&dir.path().join("sweep.curve.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,L_t,S_t,branch,Q_t,bound"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let s: f64 = cols[2].parse().unwrap();
        assert!((s + 2.0).abs() < 1e-12, "{line}");
        // 17 significant digits
        assert_eq!(
            cols[1]
                .split('e')
                .next()
                .unwrap()
                .replace(['.', '-'], "")
                .len(),
            17
        );
        rows += 1;
    }
    assert_eq!(rows, 100);
}

#[test]
fn rerun_from_written_config_reproduces_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = monolab(&[
        "sweep",
        "--seed",
        "11",
        "--threads",
        "2",
        "--out",
        a.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let cfg = a.path().join("run_config.json");
    let o = monolab(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        b.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["sweep_seed11.curve.csv", "sweep_seed11.levels.csv"] {
        assert_eq!(read(&a.path().join(f)), read(&b.path().join(f)), "{f}");
    }
}

#[test]
fn fuzz_reports_every_seed_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = monolab(&[
        "fuzz",
        "--seeds",
        "0..9",
        "--domain",
        "punctured",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let s = summary(dir.path());
    assert_eq!(s["suites"], 10);
    assert_eq!(s["repros"].as_array().unwrap().len(), 0);
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("fuzz_punctured_seed3.suite.json"))).unwrap();
    assert_eq!(report["seed"], 3);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_monolab"))
        .env("MONOLAB_OUT", dir.path())
        .args(["sweep", "--schwarzschild", "1"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // r0 + m/2 must be positive
    assert_eq!(
        code(&monolab(&[
            "verify-schwarzschild",
            "--masses=-4",
            "--out",
            out
        ])),
        2
    );
    assert_eq!(
        code(&monolab(&[
            "sweep",
            "--flat",
            "--tol-mono=-1",
            "--out",
            out
        ])),
        2
    );
    assert_eq!(code(&monolab(&["sweep", "--out", out])), 2);
    assert_eq!(code(&monolab(&["--out", out])), 2);
    assert_eq!(
        code(&monolab(&["fuzz", "--seeds", "5..2", "--out", out])),
        2
    );
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "command = \"sweep\"\nunknown = 1\n").unwrap();
    assert_eq!(
        code(&monolab(&["--config", bad.to_str().unwrap(), "--out", out])),
        2
    );
    assert_eq!(
        code(&monolab(&[
            "solve3d", "--cells", "8", "--r-box", "8", "--out", out
        ])),
        2
    );
}

#[test]
fn inadmissible_metric_fails_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    // r phi = r + 0.1 r^2 is convex, so the scalar curvature is negative.
    let radii: Vec<f64> = (0..41).map(|i| 1.0 + 0.1 * i as f64).collect();
    let values: Vec<f64> = radii.iter().map(|r| 1.0 + 0.1 * r).collect();
    let metric = serde_json::json!({
        "domain": {"kind": "ExteriorOfSphere", "inner_radius": 1.0},
        "profile": {"kind": "Tabulated", "radii": radii, "values": values},
    });
    let path = dir.path().join("metric.json");
    std::fs::write(&path, metric.to_string()).unwrap();
    let out = dir.path().join("out");
    let o = monolab(&[
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["suites_failed"], 1);
    assert_eq!(s["failures"][0]["check"], "admissible");
}

#[test]
fn report_aggregates_existing_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&monolab(&["sweep", "--flat", "--out", out])), 0);
    assert_eq!(code(&monolab(&["report", "--out", out])), 0);
    assert_eq!(summary(dir.path())["suites"], 1);

    let failing = serde_json::json!({
        "suite": "injected",
        "checks": [{"name": "x", "status": "FAIL", "worst_defect": 1.0, "location_t": 0.5, "tolerance": 0.0}],
    });
    std::fs::write(dir.path().join("injected.suite.json"), failing.to_string()).unwrap();
    assert_eq!(code(&monolab(&["report", "--out", out])), 1);
    let s = summary(dir.path());
    assert_eq!(
        (s["suites"].as_u64(), s["suites_failed"].as_u64()),
        (Some(2), Some(1))
    );

    let empty = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&monolab(&[
            "report",
            "--out",
            empty.path().to_str().unwrap()
        ])),
        2
    );
}

#[test]
fn solve3d_writes_field_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = monolab(&[
        "solve3d",
        "--field",
        "schwarzschild",
        "--mass",
        "1",
        "--cells",
        "32",
        "--r-box",
        "8",
        "--out",
        out,
    ]);
    assert!(
        matches!(code(&o), 0 | 1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let name = "field_schwarzschild_m1";
    let snap = std::fs::metadata(dir.path().join(format!("{name}.snapshot.bin"))).unwrap();
    assert_eq!(snap.len(), 48 + 16 * 33u64.pow(3));
    for ext in ["fit.json", "levels.csv", "curve.csv", "suite.json"] {
        assert!(dir.path().join(format!("{name}.{ext}")).exists(), "{ext}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join(format!("{name}.suite.json")))).unwrap();
    assert_eq!(report["checks"][0]["name"], "capacity");
    assert_eq!(report["checks"][0]["status"], "PASS");
}
