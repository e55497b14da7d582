//! End-to-end tests of the `grademiner` binary: subcommands, flag
//! overrides and the exit-code contract (0 success, 2 input/validation,
//! 3 configuration, 4 internal).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/table1.csv")
}

fn grademiner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grademiner"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn version_and_help_exit_zero() {
    let out = grademiner(&["--version"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("grademiner"));

    let out = grademiner(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for subcommand in ["run", "cluster", "tree", "advise", "report"] {
        assert!(text.contains(subcommand), "help must list {subcommand}");
    }
}

#[test]
fn run_writes_all_artifacts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = grademiner(&[
        "run",
        "--input",
        fixture().to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "report.txt",
        "report.json",
        "tree.json",
        "scatter.csv",
        "histogram.csv",
        "bands.csv",
    ] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["records"], 20);
    assert_eq!(report["cluster"]["seed"], 7);
}

#[test]
fn run_twice_produces_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out_dir in [&out_a, &out_b] {
        let out = grademiner(&[
            "run",
            "--input",
            fixture().to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let a = std::fs::read(out_a.join("report.json")).unwrap();
    let b = std::fs::read(out_b.join("report.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn missing_input_file_exits_two() {
    let out = grademiner(&["run", "--input", "/nonexistent.csv", "--out", "/tmp/x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_rows_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    std::fs::write(
        &input,
        "roll,gpa,ct,attendance,assignment,lab_per,quiz\n1,9.9,1,1,Y,good,Y\n",
    )
    .unwrap();
    let out = grademiner(&[
        "run",
        "--input",
        input.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn missing_out_directory_is_a_config_error() {
    let out = grademiner(&["run", "--input", fixture().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn broken_config_file_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, "{ not json").unwrap();
    let out = grademiner(&[
        "report",
        "--input",
        fixture().to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));

    std::fs::write(&config, r#"{ "alpha": 2.5 }"#).unwrap();
    let out = grademiner(&[
        "report",
        "--input",
        fixture().to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn too_many_clusters_for_the_data_exits_two() {
    let out = grademiner(&[
        "cluster",
        "--input",
        fixture().to_str().unwrap(),
        "--k",
        "19",
    ]);
    // only 17 distinct GPA values exist in the fixture
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cluster_prints_summary_json() {
    let out = grademiner(&[
        "cluster",
        "--input",
        fixture().to_str().unwrap(),
        "--k",
        "3",
        "--seed",
        "5",
        "--max-iters",
        "80",
        "--epsilon",
        "1e-9",
    ]);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["k"], 3);
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["sizes"].as_array().unwrap().len(), 3);
    assert!(summary["converged"].as_bool().unwrap());
}

#[test]
fn tree_prints_importable_json() {
    let out = grademiner(&["tree", "--input", fixture().to_str().unwrap()]);
    assert!(out.status.success());
    let tree = grademiner::dtree::import_tree(stdout(&out).trim()).unwrap();
    match tree {
        grademiner::dtree::TreeNode::Internal { attribute, .. } => {
            assert_eq!(attribute, "attendance_band")
        }
        grademiner::dtree::TreeNode::Leaf { .. } => panic!("fixture tree must split"),
    }
}

#[test]
fn advise_prints_per_student_csv() {
    let out = grademiner(&["advise", "--input", fixture().to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "roll,gpa,band,cluster,letter,new_grade,step"
    );
    assert_eq!(lines.count(), 20);
    // roll 1: gpa 3.89 is High / A+ / S-01
    assert!(text.lines().any(|l| l.starts_with("1,3.89,High,") && l.ends_with("S-01")));
}

#[test]
fn report_prints_text_summary() {
    let out = grademiner(&["report", "--input", fixture().to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("Band distribution"));
    assert!(text.contains("High"));
    assert!(text.contains("Per-student advice"));
}

#[test]
fn config_file_drives_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        format!(
            r#"{{ "input": {:?}, "kmeans": {{ "k": 2, "seed": 3 }}, "alpha": 0.8 }}"#,
            fixture().to_str().unwrap()
        ),
    )
    .unwrap();
    let out = grademiner(&["cluster", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["k"], 2);
    assert_eq!(summary["seed"], 3);

    // flags override the file
    let out = grademiner(&[
        "cluster",
        "--config",
        config.to_str().unwrap(),
        "--k",
        "4",
    ]);
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["k"], 4);
    assert_eq!(summary["seed"], 3);
}
