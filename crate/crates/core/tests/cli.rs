use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_finehull"))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

#[test]
fn selftest_passes() {
    let out = bin().arg("selftest").output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn too_few_samples_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["certify", scenario("borel.scenario").to_str().unwrap(), "--samples", "10", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wos.samples"));
    assert!(!dir.path().join("certificate.json").exists());
}

#[test]
fn missing_and_malformed_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["sheets", "/nonexistent/file.scenario", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let bad = dir.path().join("bad.scenario");
    std::fs::write(&bad, "name = \"x\"\npipeline = \"certify\"\n[geometry]\ntarget = \"east\"\n").unwrap();
    let out = bin().arg("certify").arg(&bad).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["certify", "x", "--tolerance-profile", "sloppy"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn components_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["components", scenario("components.scenario").to_str().unwrap(), "--resolution", "128", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("components.csv")).unwrap();
    assert!(csv.starts_with("id,cells,area,half_circle_hits,selected\n"));
    let plot = std::fs::read_to_string(dir.path().join("plot_components.csv")).unwrap();
    assert!(plot.starts_with("x,y,component\n"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("components.json")).unwrap()).unwrap();
    assert_eq!(json["resolution"], 128);
}

#[test]
fn sheets_pipeline_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["sheets", scenario("sheets.scenario").to_str().unwrap(), "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("sheets.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn fast_certify_is_reproducible() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let out = bin()
            .args(["certify", scenario("borel.scenario").to_str().unwrap(), "--tolerance-profile", "fast", "--seed", "4", "--out"])
            .arg(dir.path())
            .output()
            .unwrap();
        (out.status.code(), std::fs::read_to_string(dir.path().join("certificate.json")).unwrap())
    };
    let (a, b) = (run(), run());
    assert_eq!(a.0, Some(0));
    assert_eq!(a, b);
}
