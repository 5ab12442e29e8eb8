use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_planar-enum");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("PLANAR_ENUM_CACHE")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "table",
        "--family",
        "A1 A3",
        "--d",
        "5..7",
        "--format",
        "csv",
        "--no-cache",
    ];
    let first = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, run(&args).stdout);
    let args = ["verify", "--suite", "external", "--format", "json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn table_rows_match_single_computations() {
    let out = run(&["table", "--family", "A1^2 A2", "--d", "6..7", "--no-cache"]);
    assert!(out.status.success());
    let table: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = table["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let (d, r, s) = (
            row["d"].to_string(),
            row["r"].to_string(),
            row["s"].to_string(),
        );
        let single = run(&[
            "compute",
            "--d",
            &d,
            "--spec",
            "A1^2 A2",
            "--r",
            &r,
            "--s",
            &s,
            "--no-cache",
        ]);
        assert!(single.status.success());
        let v: serde_json::Value = serde_json::from_slice(&single.stdout).unwrap();
        assert_eq!(v["value"], row["value"]);
        let parsed: num_bigint::BigInt = v["value"].as_str().unwrap().parse().unwrap();
        assert!(parsed > num_bigint::BigInt::from(0));
    }
}

#[test]
fn cache_hits_equal_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("memo.tsv");
    let cache = path.to_str().unwrap();
    let args = |extra: &[&'static str]| {
        let mut v = vec![
            "table", "--family", "A1^4", "--d", "7..8", "--format", "csv",
        ];
        v.extend_from_slice(extra);
        v
    };
    let fresh = run(&args(&["--no-cache"]));
    let mut with_cache = args(&[]);
    with_cache.extend_from_slice(&["--cache", cache]);
    let cold = run(&with_cache);
    assert!(path.exists());
    let warm = run(&with_cache);
    assert_eq!(fresh.stdout, cold.stdout);
    assert_eq!(fresh.stdout, warm.stdout);

    let via_env = Command::new(BIN)
        .args(args(&[]))
        .env("PLANAR_ENUM_CACHE", cache)
        .output()
        .unwrap();
    assert_eq!(via_env.stdout, fresh.stdout);
    let header = std::fs::read_to_string(&path).unwrap();
    assert!(header.starts_with("planar-enum memo cache v1\n"));
}

#[test]
fn corrupt_cache_is_reported_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("memo.tsv");
    std::fs::write(&path, "not a cache\n").unwrap();
    let out = run(&[
        "compute",
        "--d",
        "4",
        "--spec",
        "A1",
        "--s",
        "0",
        "--cache",
        path.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("memo.tsv"), "{err}");
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&[
            "compute",
            "--d",
            "3",
            "--spec",
            "A2",
            "--r",
            "10",
            "--s",
            "0",
            "--no-cache"
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(
        run(&[
            "compute",
            "--d",
            "3",
            "--spec",
            "A2",
            "--r",
            "11",
            "--s",
            "0",
            "--no-cache"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "compute",
            "--d",
            "5",
            "--spec",
            "A1^4",
            "--s",
            "0",
            "--no-cache"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&["verify", "--suite", "closed-forms"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["verify", "--suite", "kp-cross", "--suite", "chern"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn table_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a2.tex");
    let out = run(&[
        "table",
        "--family",
        "A2",
        "--d",
        "2..4",
        "--format",
        "latex",
        "--output",
        path.to_str().unwrap(),
        "--no-cache",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let tex = std::fs::read_to_string(&path).unwrap();
    assert!(tex.contains("\\begin{tabular}") && tex.contains("$17760$"));
    let bad = run(&[
        "table",
        "--family",
        "A2",
        "--d",
        "3",
        "--output",
        "/nonexistent/dir/x.json",
        "--no-cache",
    ]);
    assert!(!bad.status.success());
    assert!(String::from_utf8(bad.stderr)
        .unwrap()
        .contains("/nonexistent/dir/x.json"));
}
