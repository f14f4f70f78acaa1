//! End-to-end checks of the binary: exit codes, output files, batch mode.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pencil-curvature"))
}

fn repo_file(name: &str) -> String {
    format!("{}/../../pencils/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn classify_well_curved_pencil_succeeds() {
    let out = bin().args(["classify", &repo_file("wellcurved-d2.json")]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("well-curved"));
    assert!(stdout.contains("schema_version"));
}

#[test]
fn malformed_file_exits_one_with_diagnostic() {
    let dir = std::env::temp_dir().join("pencil-cli-test-bad");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{ "d": 2, "a": [1, 2, 3, 4], "b": [0, 0, 0, 0] }"#).unwrap();
    let out = bin().args(["classify", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("(1,0)"), "diagnostic must name the entry: {stderr}");
}

#[test]
fn float_ambiguity_exits_two() {
    // a tiny perturbation of the common-kernel pair: the float determinant
    // coefficients land inside the zero band without vanishing exactly
    let dir = std::env::temp_dir().join("pencil-cli-test-ambiguous");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("near-degenerate.json");
    std::fs::write(
        &path,
        r#"{ "d": 2, "a": [1.0, 0.0, 0.0, 1e-14], "b": [0.0, 0.0, 0.0, 1e-14] }"#,
    )
    .unwrap();
    let out = bin()
        .args(["classify", path.to_str().unwrap(), "--mode", "float"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    // exact mode still classifies it decisively
    let out = bin().args(["classify", path.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
}

#[test]
fn witness_reports_decay_for_flat_pencil() {
    let out = bin()
        .args(["witness", &repo_file("flat-identity-d2.json"), "--ladder", "2:10"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("decay slope 1.0"), "{stdout}");
}

#[test]
fn witness_rejects_well_curved_pencil() {
    let out = bin().args(["witness", &repo_file("wellcurved-d2.json")]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn factorize_multiplicities_certificate() {
    let out = bin().args(["factorize", "--multiplicities", "3,1"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Farkas certificate"));
    assert!(stdout.contains("\"-1\""));
}

#[test]
fn out_flag_writes_txt_and_json() {
    let dir = std::env::temp_dir().join("pencil-cli-test-out");
    std::fs::create_dir_all(&dir).unwrap();
    let base = dir.join("run");
    let out = bin()
        .args([
            "report",
            &repo_file("kernel-split-d3.json"),
            "--out",
            base.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let txt = std::fs::read_to_string(base.with_extension("txt")).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap())
            .unwrap();
    assert!(txt.contains("kernels split"));
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["result"]["classify"]["verdict"]["epsilon"], "1/2");
    // witness section present for a non-well-curved pencil
    assert!(json["result"]["witness"]["slope"].as_f64().unwrap() >= 0.9);
}

#[test]
fn float_mode_succeeds_on_decisive_pencils() {
    let out = bin()
        .args(["classify", &repo_file("float-d2.json"), "--mode", "float"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("\"mode\": \"float\""));
}

#[test]
fn batch_mode_over_directory() {
    let dir = std::env::temp_dir().join("pencil-cli-test-batch");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    for name in ["wellcurved-d2.json", "flat-identity-d2.json"] {
        std::fs::copy(repo_file(name), dir.join(name)).unwrap();
    }
    let out = bin().args(["classify", dir.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("batch"));
    assert!(stdout.contains("well-curved") && stdout.contains("flat"));
}

#[test]
fn reruns_reproduce_monte_carlo_numbers() {
    let run = || {
        bin()
            .args([
                "sublevel",
                &repo_file("wellcurved-d2.json"),
                "--ladder",
                "4:9",
                "--samples",
                "20000",
                "--seed",
                "5",
            ])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "seeded runs must be byte-identical");
}
