use std::path::Path;
use std::process::{Command, Output};

fn foldnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foldnet"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn single_point_rule(dir: &Path) {
    let o = foldnet(
        dir,
        &[
            "construct",
            "--base",
            "2",
            "--m",
            "1",
            "--n",
            "1",
            "--s",
            "1",
            "--alpha",
            "2",
            "--weights",
            "1",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn construct_writes_rule_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    single_point_rule(dir.path());
    let rule: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rule.json")).unwrap())
            .unwrap();
    assert_eq!(rule["q"], serde_json::json!([[1]]));
    assert_eq!(rule["p"], serde_json::json!([0, 1]));
    assert_eq!(rule["D"], serde_json::json!(1.0));
    let trace: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("trace.json")).unwrap())
            .unwrap();
    assert_eq!(trace["selected"], serde_json::json!([1]));
    assert_eq!(trace["B"], serde_json::json!([0.375]));
    assert!(trace["bound_lambda1"].as_f64().unwrap() >= 0.375);
}

#[test]
fn construct_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = foldnet(
        dir.path(),
        &[
            "construct",
            "--base",
            "2",
            "--m",
            "4",
            "--s",
            "2",
            "--alpha",
            "2",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("n = 4\n"));
    let rule: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rule.json")).unwrap())
            .unwrap();
    assert_eq!(rule["n"], serde_json::json!(4));
    assert_eq!(rule["gamma"], serde_json::json!([1.0, 0.25]));
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = foldnet(dir.path(), &["construct", "--base", "4", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("base must be prime"));
    let o = foldnet(
        dir.path(),
        &["construct", "--base", "2", "--m", "3", "--n", "2"],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = foldnet(dir.path(), &["construct", "--m", "2", "--nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(dir.path().join("bad.json"), "{\"b\": 2").unwrap();
    let o = foldnet(dir.path(), &["points", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
    single_point_rule(dir.path());
    let o = foldnet(
        dir.path(),
        &["integrate", "rule.json", "--function", "gaussian"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn points_csv() {
    let dir = tempfile::tempdir().unwrap();
    single_point_rule(dir.path());
    let o = foldnet(dir.path(), &["points", "rule.json"]);
    assert_eq!(stdout(&o), "x1\n0\n0.5\n");
    let o = foldnet(dir.path(), &["points", "rule.json", "--folded", "--exact"]);
    assert_eq!(stdout(&o), "x1\n0/1\n1/1\n");

    let o = foldnet(
        dir.path(),
        &[
            "construct",
            "--base",
            "3",
            "--m",
            "2",
            "--s",
            "3",
            "--out",
            "r3.json",
            "--trace",
            "t3.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let o = foldnet(dir.path(), &["points", "r3.json", "--folded"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x1,x2,x3");
    assert_eq!(lines.len(), 1 + 9);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 3));
    assert!(!text.contains('\r'));
}

#[test]
fn analyze_reports() {
    let dir = tempfile::tempdir().unwrap();
    single_point_rule(dir.path());
    let o = foldnet(
        dir.path(),
        &["analyze", "rule.json", "--json", "--brute", "14"],
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["B"].as_f64().unwrap() - 0.375).abs() < 1e-14);
    assert!((v["e"].as_f64().unwrap() - (1.0f64 / 120.0).sqrt()).abs() < 1e-12);
    assert!((v["brute"]["value"].as_f64().unwrap() - 0.375).abs() < 1e-3);
    assert_eq!(v["e_le_b"], serde_json::json!(true));

    let o = foldnet(
        dir.path(),
        &[
            "construct",
            "--base",
            "2",
            "--m",
            "3",
            "--s",
            "2",
            "--weights",
            "0,0",
            "--out",
            "z.json",
            "--trace",
            "zt.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let o = foldnet(dir.path(), &["analyze", "z.json", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["B"].as_f64().unwrap(), 0.0);
    assert!(v["e"].as_f64().unwrap().abs() < 1e-7);
}

#[test]
fn scale_guards_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = foldnet(
        dir.path(),
        &["construct", "--base", "2", "--m", "13", "--s", "1"],
    );
    assert_eq!(o.status.code(), Some(0));
    let o = foldnet(dir.path(), &["analyze", "rule.json"]);
    assert_eq!(o.status.code(), Some(3));
    single_point_rule(dir.path());
    let o = foldnet(dir.path(), &["analyze", "rule.json", "--brute", "30"]);
    assert_eq!(o.status.code(), Some(3));
    let o = foldnet(dir.path(), &["convergence", "--m-range", "12:13"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = foldnet(
        dir.path(),
        &[
            "convergence",
            "--s",
            "2",
            "--weights",
            "1,0.25",
            "--m-range",
            "4:8",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,N,B,e,bound,slope"));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        let b: f64 = r[2].parse().unwrap();
        let e: f64 = r[3].parse().unwrap();
        assert!(e <= b);
    }
    let slope: f64 = rows[4][5].parse().unwrap();
    assert!(slope < -1.5);

    let o = foldnet(dir.path(), &["convergence", "--m-range", "5:5"]);
    assert_eq!(stdout(&o).lines().next(), Some("m,N,B,e,bound"));
}

#[test]
fn integrate_examples() {
    let dir = tempfile::tempdir().unwrap();
    single_point_rule(dir.path());
    let o = foldnet(dir.path(), &["integrate", "rule.json", "--c", "1"]);
    let text = stdout(&o);
    let q: f64 = text
        .lines()
        .next()
        .unwrap()
        .trim_start_matches("Q = ")
        .parse()
        .unwrap();
    assert!((q - 7.0 / 6.0).abs() < 1e-15);
    let o = foldnet(dir.path(), &["integrate", "rule.json", "--c", "0"]);
    assert!(stdout(&o).contains("error = 0\n"));
}

#[test]
fn pipeline_is_reproducible() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let o = foldnet(
            dir.path(),
            &[
                "construct",
                "--base",
                "2",
                "--m",
                "6",
                "--s",
                "3",
                "--alpha",
                "3",
            ],
        );
        assert_eq!(o.status.code(), Some(0));
        let pts = stdout(&foldnet(dir.path(), &["points", "rule.json", "--folded"]));
        let report = stdout(&foldnet(dir.path(), &["analyze", "rule.json", "--json"]));
        (
            std::fs::read(dir.path().join("rule.json")).unwrap(),
            pts,
            report,
        )
    };
    assert_eq!(run(), run());
}
