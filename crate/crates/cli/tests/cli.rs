//! Exit statuses and outputs of the `lexalign` binary.

use std::path::Path;
use std::process::{Command, Output};

fn lexalign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexalign"))
        .args(args)
        .output()
        .unwrap()
}

fn code(args: &[&str]) -> i32 {
    lexalign(args).status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn world(dir: &Path) -> String {
    let out = lexalign(&[
        "gen-world",
        "--out",
        dir.to_str().unwrap(),
        "--vocab-size",
        "1000",
        "--dim",
        "12",
        "--dict-train",
        "300",
        "--dict-test",
        "100",
        "--pivot-docs",
        "40",
        "--low-resource-docs",
        "40",
        "--generic-size",
        "400",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    stdout(&out).trim().to_string()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["grid", "--help"]), 0);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["grid", "--no-such-flag"]), 1);
    assert_eq!(code(&["grid"]), 1);
    assert_eq!(code(&["fit-map", "--dictionary", "d.tsv", "--out", "m.txt"]), 1);
    let out = lexalign(&["scaling", "--config", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_test_set_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = world(dir.path());
    let en = dir.path().join("en.vec");
    let en = en.to_str().unwrap();
    assert_eq!(code(&["eval-p1", "--target-embeddings", en, "--projected", en]), 1);
    assert_eq!(code(&["eval-p1", "--config", &manifest, "--projected", en]), 0);
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = world(dir.path());
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    // Unreadable embeddings.
    assert_eq!(
        code(&[
            "fit-map",
            "--source-embeddings",
            "/nonexistent.vec",
            "--target-embeddings",
            &p("en.vec"),
            "--dictionary",
            &p("train.dict.txt"),
            "--out",
            &p("m.txt"),
        ]),
        2
    );
    // A dictionary size the vocabulary cannot supply.
    assert_eq!(
        code(&[
            "build-dict",
            "--config",
            &manifest,
            "--size",
            "100000",
            "--out",
            &p("d.tsv")
        ]),
        2
    );
    // Procrustes needs equal dimensions.
    std::fs::write(p("small.vec"), "2 3\ne0001 1 0 0\ne0002 0 1 0\n").unwrap();
    assert_eq!(
        code(&[
            "fit-map",
            "--config",
            &manifest,
            "--target-embeddings",
            &p("small.vec"),
            "--dictionary",
            &p("train.dict.txt"),
            "--dictionary-format",
            "space_separated",
            "--method",
            "procrustes",
            "--out",
            &p("m.txt"),
        ]),
        2
    );
}

#[test]
fn gen_world_writes_a_loadable_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = world(dir.path());
    assert!(manifest.ends_with("manifest.toml"));
    let text = std::fs::read_to_string(&manifest).unwrap();
    assert!(text.contains("source_embeddings = \"de.vec\""));
    assert!(text.contains("[world]"));
}

#[test]
fn scaling_writes_report_and_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = world(dir.path());
    let out_dir = dir.path().join("reports");
    let base = std::fs::read_to_string(&manifest)
        .unwrap()
        .replace("joint_docs = 200", "joint_docs = 10");
    let run = |text: String| {
        let config = dir.path().join("small.toml");
        std::fs::write(&config, text).unwrap();
        lexalign(&[
            "scaling",
            "--config",
            config.to_str().unwrap(),
            "--output-dir",
            out_dir.to_str().unwrap(),
            "--doc-counts",
            "0,10,full",
        ])
    };
    // The default dictionary size exceeds a 1000-word world.
    let out = run(base.clone());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(base.replace("size = 5000", "size = 200"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(out_dir.join("scaling.tsv")).unwrap();
    assert_eq!(report, stdout(&out));
    assert_eq!(report.lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(out_dir.join("scaling.timings.tsv").exists());
    assert!(out_dir.join("scaling.config.toml").exists());
}
