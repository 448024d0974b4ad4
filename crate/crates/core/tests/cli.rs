use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tiltvtol"))
}

#[test]
fn short_builtin_run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["paper-sim1", "--duration", "2", "--csv-decimate", "20", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("max tilt"));
    let csv = std::fs::read_to_string(dir.path().join("sim1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 102);
}

#[test]
fn dumped_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let dump = bin().args(["dump-config", "sim2"]).output().unwrap();
    assert!(dump.status.success());
    let path = dir.path().join("fast.toml");
    std::fs::write(&path, &dump.stdout).unwrap();
    let out = bin().arg("run").arg(&path).args(["--duration", "1"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_reports_each_value() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("slow.toml");
    let dump = bin().args(["dump-config", "sim1"]).output().unwrap();
    std::fs::write(&path, &dump.stdout).unwrap();
    let out = bin()
        .arg("sweep")
        .arg(&path)
        .args(["--param", "controller.gains.k3", "--values", "2", "4", "--duration", "1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("controller.gains.k3 = 2:") && stdout.contains("controller.gains.k3 = 4:"));
}

#[test]
fn missing_config_fails() {
    let out = bin().args(["run", "/nonexistent/scenario.toml"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
