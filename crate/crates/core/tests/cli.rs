use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_boussinesq"));
    c.env_remove("BOUSSINESQ_OUTPUT_DIR");
    c
}

const SMALL: &[&str] = &["--N", "32", "--T", "2", "--eval-points", "128", "--no-timing"];

#[test]
fn run_writes_outputs_and_env_overrides_dir() {
    let flag_dir = tempfile::tempdir().unwrap();
    let env_dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", "--problem", "solitary", "--method", "hbvm", "--k", "3", "--s", "2", "--n", "10"])
        .args(SMALL)
        .arg("--output-dir")
        .arg(flag_dir.path())
        .env("BOUSSINESQ_OUTPUT_DIR", env_dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(env_dir.path().join("report_full.csv").exists());
    assert!(!flag_dir.path().join("report_full.csv").exists());
    let echo = std::fs::read_to_string(env_dir.path().join("config.toml")).unwrap();
    assert!(echo.contains("k = 3"), "{echo}");
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "problem.name = \"spread\"\nmethod.kind = \"gauss\"\nmethod.s = 1\ntime.n = 4\ngrid.N = 32\nproblem.T = 1.0\noutput.eval_points = 128\n",
    )
    .unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--s", "2", "--output-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().nth(1).unwrap().starts_with("gauss,2,2,32,4,"), "{stdout}");
}

#[test]
fn failed_run_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--method", "hbvm", "--k", "6", "--s", "4", "--n", "2", "--max-iters", "1"])
        .args(SMALL)
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.contains("failed"));
}

#[test]
fn bad_config_exits_nonzero() {
    let out = bin().args(["run", "--N", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["run", "--method", "euler"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn sweep_and_export_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sweep", "--method", "gauss", "--n-list", "8,16"])
        .args(SMALL)
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "method,k,s,N,n,time_s,e_u,rate_u,e_H,rate_H,e_M,rate_M");
    assert_eq!(csv.lines().count(), 3);

    let run_dir = tempfile::tempdir().unwrap();
    assert!(bin()
        .args(["run", "--n", "8", "--field-stride", "4"])
        .args(SMALL)
        .arg("--output-dir")
        .arg(run_dir.path())
        .status()
        .unwrap()
        .success());
    let field = run_dir.path().join("f.txt");
    let status = bin()
        .args(["export-field", "--snapshots"])
        .arg(run_dir.path().join("snapshots.txt"))
        .args(["--t", "0,1,2", "--points", "16", "--out"])
        .arg(&field)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&field).unwrap();
    let rows: Vec<_> = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).collect();
    assert_eq!(rows.len(), 48);
    assert!(rows.iter().all(|l| l.split_whitespace().count() == 3));

    let status = bin()
        .args(["export-field", "--snapshots"])
        .arg(run_dir.path().join("snapshots.txt"))
        .args(["--t", "3"])
        .status()
        .unwrap();
    assert!(!status.success());
}

#[test]
fn selftest_passes() {
    let out = bin().arg("selftest").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
