//! Golden-output and exit-status tests for the `brestrict` binary.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the golden files after an intended change.

mod common;

use std::fs;

use common::{golden_dir, run, CASES};

#[test]
fn golden_outputs() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut failures = Vec::new();
    for case in CASES {
        let out = run(case.args);
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert_eq!(out.status.code(), Some(case.exit), "{}: {}", case.name, String::from_utf8_lossy(&out.stderr));
        let path = golden_dir().join(format!("{}.txt", case.name));
        if update {
            fs::write(&path, &stdout).unwrap();
            continue;
        }
        match fs::read_to_string(&path) {
            Ok(expected) if expected == stdout => {}
            Ok(_) => failures.push(format!("{}: output differs from {}", case.name, path.display())),
            Err(e) => failures.push(format!("{}: {e}", case.name)),
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for case in CASES {
        let (a, b) = (run(case.args), run(case.args));
        assert_eq!(a.stdout, b.stdout, "{}", case.name);
    }
}

#[test]
fn json_reports_carry_schema_version_and_digests() {
    let out = run(&["--json", "norm", "g2q3_3P.fus", "chi24"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    let digest = v["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert!(digest.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(v["steps"].as_array().unwrap().len(), 2);
    assert!(v["steps"].as_array().unwrap().iter().all(|s| s["status"] == "irreducible"));
}

fn tmp(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("brestrict-cli-test-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

fn shipped(name: &str) -> String {
    fs::read_to_string(brestrict::data::data_dir().join(name)).unwrap()
}

#[test]
fn corrupted_class_length_fails_validation() {
    let bad = shipped("s3.tbl").replace("class 2A length 3", "class 2A length 4");
    let out = run(&["validate", &tmp("bad_s3.tbl", &bad)]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[class-length-sum] fail"), "{text}");
}

#[test]
fn incomplete_fusion_fails_validation() {
    let bad = shipped("g2q3_3P.fus").replace("row B21 length 81", "row B21 length 80");
    let out = run(&["validate", &tmp("bad_3p.fus", &bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("[fusion-completeness] fail"));
}

#[test]
fn data_errors_exit_with_two() {
    for args in [
        &["norm", "no-such-file.fus", "chi1"][..],
        &["norm", "g2q3_3P.fus", "chi99"],
        &["degrees", "--q", "6"],
        &["screen", "--family", "sz", "--q", "8", "--ell", "2"],
        &["validate", &tmp("broken.tbl", "group X order 2 center 1 cover 1\nclass 1A length one\n")],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8(out.stderr).unwrap().starts_with("error:"), "{args:?}");
    }
}

#[test]
fn table_parse_errors_carry_line_numbers() {
    let out = run(&["validate", &tmp("broken2.tbl", "group X order 2 center 1 cover 1\nclass 1A length one\n")]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn expectations_file_controls_exit_status() {
    let good = tmp("good.expect", "# both branches\nbranch-0 irreducible\nbranch-1 irreducible\n");
    assert_eq!(run(&["norm", "g2q3_3P.fus", "chi24", "--expect", &good]).status.code(), Some(0));
    let bad = tmp("bad.expect", "branch-0 reducible\n");
    let out = run(&["norm", "g2q3_3P.fus", "chi24", "--expect", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("MISMATCH [branch-0] expected reducible, got irreducible"));
    let missing = tmp("missing.expect", "branch-7 irreducible\n");
    assert_eq!(run(&["norm", "g2q3_3P.fus", "chi24", "--expect", &missing]).status.code(), Some(1));
}

#[test]
fn data_directory_can_be_overridden() {
    let dir = std::env::temp_dir().join(format!("brestrict-data-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("tiny.tbl"), shipped("s3.tbl")).unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_brestrict"))
        .args(["validate", "tiny.tbl"])
        .env("BRESTRICT_DATA", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}
