use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vilenkin"))
        .args(args)
        .output()
        .expect("spawn vilenkin")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn derive_fig1(dir: &TempDir) -> String {
    let mra = path(dir, "mra.json");
    let out = run(&[
        "mra",
        "derive",
        data("fig1.json").to_str().unwrap(),
        "-o",
        &mra,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    mra
}

#[test]
fn validate_reports_missing_and_repeated_windows() {
    let ok = run(&["tree", "validate", data("fig1.json").to_str().unwrap()]);
    assert_eq!(code(&ok), 0);
    assert!(stderr(&ok).contains("9/9 windows, height 6"));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["valid"], true);

    let bad = run(&[
        "tree",
        "validate",
        data("fig1_repeat.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("(1,0) occurs 2 times"));
}

#[test]
fn debruijn_build_has_minimal_path_height() {
    let dir = TempDir::new().unwrap();
    let tree = path(&dir, "tree.json");
    let out = run(&["tree", "build", "--p", "3", "--N", "2", "-o", &tree]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("height 10"), "{}", stderr(&out));
    assert_eq!(code(&run(&["tree", "validate", &tree])), 0);
}

#[test]
fn derive_reports_support_level() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "mra",
        "derive",
        data("fig1.json").to_str().unwrap(),
        "-o",
        &path(&dir, "m.json"),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("|E| = 9, M = 2"));
}

#[test]
fn verify_rejects_a_corrupted_bundle() {
    let dir = TempDir::new().unwrap();
    let haar = path(&dir, "haar.json");
    assert_eq!(
        code(&run(&[
            "mra",
            "derive",
            data("haar3.json").to_str().unwrap(),
            "-o",
            &haar
        ])),
        0
    );
    assert_eq!(code(&run(&["mra", "verify", &haar])), 0);

    let mut bundle: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&haar).unwrap()).unwrap();
    let values = bundle["phi"]["values"].as_object_mut().unwrap();
    let first = values.values_mut().next().unwrap();
    first[0] = serde_json::json!(0.5);
    let corrupted = path(&dir, "corrupted.json");
    fs::write(&corrupted, serde_json::to_string(&bundle).unwrap()).unwrap();
    assert_eq!(code(&run(&["mra", "verify", &corrupted])), 2);
}

#[test]
fn negative_control_fails_verification() {
    let out = run(&["mra", "verify", data("fig1_repeat.json").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn wavelet_bank_derives_and_verifies() {
    let dir = TempDir::new().unwrap();
    let mra = derive_fig1(&dir);
    let wav = path(&dir, "wav.json");
    let csv = path(&dir, "csv");
    let out = run(&["wavelet", "derive", &mra, "-o", &wav, "--csv-dir", &csv]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let bundle: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&wav).unwrap()).unwrap();
    assert_eq!(bundle["psi"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("csv/psi_2.csv").exists());
    assert_eq!(code(&run(&["wavelet", "verify", &wav, "--depth", "2"])), 0);
}

#[test]
fn transform_round_trip() {
    let dir = TempDir::new().unwrap();
    let mra = derive_fig1(&dir);
    let signal = path(&dir, "signal.csv");
    let coeffs = path(&dir, "coeffs.json");
    let back = path(&dir, "back.csv");
    assert_eq!(
        code(&run(&[
            "transform",
            "random",
            "--bundle",
            &mra,
            "--R",
            "4",
            "--in-span",
            "--seed",
            "7",
            "-o",
            &signal
        ])),
        0
    );
    let out = run(&[
        "transform",
        "analyze",
        "--bundle",
        &mra,
        &signal,
        "--levels",
        "2",
        "--expect-in-span",
        "-o",
        &coeffs,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("transform.reconstruction"));
    assert_eq!(
        code(&run(&[
            "transform",
            "synthesize",
            "--bundle",
            &mra,
            &coeffs,
            "-o",
            &back
        ])),
        0
    );

    let parse = |p: &str| -> Vec<(String, f64, f64)> {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (
                    f[0].to_string(),
                    f[1].parse().unwrap(),
                    f[2].parse().unwrap(),
                )
            })
            .collect()
    };
    let (a, b) = (parse(&signal), parse(&back));
    assert_eq!(a.len(), 3usize.pow(7));
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.0, y.0);
        assert!((x.1 - y.1).abs() < 1e-10 && (x.2 - y.2).abs() < 1e-10);
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let mra = derive_fig1(&dir);
    let again = path(&dir, "again.json");
    assert_eq!(
        code(&run(&[
            "mra",
            "derive",
            data("fig1.json").to_str().unwrap(),
            "-o",
            &again
        ])),
        0
    );
    assert_eq!(fs::read(&mra).unwrap(), fs::read(&again).unwrap());

    let one = run(&[
        "tree",
        "build",
        "--p",
        "2",
        "--N",
        "3",
        "--strategy",
        "greedy",
        "--seed",
        "11",
    ]);
    let two = run(&[
        "tree",
        "build",
        "--p",
        "2",
        "--N",
        "3",
        "--strategy",
        "greedy",
        "--seed",
        "11",
    ]);
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn export_and_usage_errors() {
    let dot = run(&["tree", "export", data("fig1.json").to_str().unwrap()]);
    assert_eq!(code(&dot), 0);
    assert!(String::from_utf8_lossy(&dot.stdout).starts_with("digraph"));
    assert_eq!(code(&run(&["bogus"])), 1);
    assert_eq!(
        code(&run(&["tree", "validate", "/nonexistent/tree.json"])),
        1
    );
    assert_eq!(code(&run(&["tree", "build", "--p", "3"])), 1);
}
