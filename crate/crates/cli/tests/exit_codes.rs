use std::path::Path;
use std::process::{Command, Output};

fn acadrisk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acadrisk"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .unwrap()
}

#[test]
fn missing_input_is_an_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = acadrisk(dir.path(), &["train", "--cohort", "no/such/file.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("acadrisk: "));
}

#[test]
fn single_class_cohort_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    assert!(acadrisk(dir.path(), &["synth", "--n-students", "40"]).status.success());
    let csv = std::fs::read_to_string(dir.path().join("cohort.csv")).unwrap();
    let flat: String = csv
        .lines()
        .enumerate()
        .map(|(i, line)| {
            if i == 0 {
                format!("{line}\n")
            } else {
                format!("{},0\n", &line[..line.rfind(',').unwrap()])
            }
        })
        .collect();
    let path = dir.path().join("all_safe.csv");
    std::fs::write(&path, flat).unwrap();
    let out = acadrisk(dir.path(), &["train", "--cohort", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_feature_lists_alternatives() {
    let dir = tempfile::tempdir().unwrap();
    for step in [&["synth", "--n-students", "60"][..], &["featurize"], &["train"], &["explain"]] {
        assert!(acadrisk(dir.path(), step).status.success());
    }
    let out = acadrisk(dir.path(), &["plot", "--kind", "dependence", "--feature", "Shoe"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("EgnCnt"));
}

#[test]
fn bad_usage_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(acadrisk(dir.path(), &["plot", "--kind", "pie"]).status.code(), Some(2));
}
