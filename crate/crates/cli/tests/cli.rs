use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use paxp_cli::BenchReport;
use paxp_core::{Explanation, ExplanationKind};
use tempfile::TempDir;

const SUM_MODEL: &str = r#"{
  "classes": ["neg", "pos"],
  "features": [
    {"name": "x1", "domain": ["1", "2", "3"]},
    {"name": "x2", "domain": ["1", "2", "3"]},
    {"name": "x3", "domain": ["1", "2", "3"]},
    {"name": "x4", "domain": ["1", "2", "3"]}
  ],
  "log_prior": [0.0, -7.0],
  "log_likelihood": [
    [[0.0, 1.0], [0.0, 2.0], [0.0, 3.0]],
    [[0.0, 1.0], [0.0, 2.0], [0.0, 3.0]],
    [[0.0, 1.0], [0.0, 2.0], [0.0, 3.0]],
    [[0.0, 1.0], [0.0, 2.0], [0.0, 3.0]]
  ]
}"#;

fn paxp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paxp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field<'a>(out: &'a str, key: &str) -> &'a str {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no '{key}' in:\n{out}"))
}

fn sum_model(dir: &TempDir) -> PathBuf {
    let p = dir.path().join("sum.json");
    std::fs::write(&p, SUM_MODEL).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn bundled() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic.csv").to_string()
}

#[test]
fn explain_sum_example_empty_explanation() {
    let dir = TempDir::new().unwrap();
    let m = sum_model(&dir);
    let o = paxp(&[
        "explain",
        s(&m),
        "--instance",
        "3,3,3,3",
        "--delta",
        "0.6",
        "--target-size",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(&out, "kind"), "ApproxPAXp");
    assert!(field(&out, "features").starts_with("{}"));
    assert_eq!(field(&out, "precision"), "50/81 (61.73%)");

    let o = paxp(&[
        "explain",
        s(&m),
        "--instance",
        "3,3,3,3",
        "--delta",
        "0.6",
        "--target-size",
        "1",
        "--json",
    ]);
    let e: Explanation = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(e.features.is_empty());
    assert_eq!(e.precision_fraction(), "50/81");
    let again: Explanation = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
    assert_eq!(again, e);
}

#[test]
fn explain_unit_threshold_and_large_target() {
    let dir = TempDir::new().unwrap();
    let m = sum_model(&dir);
    let o = paxp(&[
        "explain",
        s(&m),
        "--instance",
        "3,3,2,1",
        "--delta",
        "1",
        "--target-size",
        "0",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(field(&stdout(&o), "precision").starts_with("1/1 "));
    let o = paxp(&[
        "explain",
        s(&m),
        "--instance",
        "3,3,2,1",
        "--target-size",
        "4",
    ]);
    assert_eq!(field(&stdout(&o), "kind"), "AXp");
    let o = paxp(&[
        "explain",
        s(&m),
        "--instance",
        "1,1,1,2",
        "--order",
        "lex",
        "--target-size",
        "0",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "prediction"), "neg");
}

#[test]
fn count_sum_example() {
    let dir = TempDir::new().unwrap();
    let m = sum_model(&dir);
    let o = paxp(&["count", s(&m), "--instance", "3,1,3,3", "--fix", "2,4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(&out, "n_plus"), "6");
    assert_eq!(field(&out, "n_minus"), "3");
    assert_eq!(field(&out, "precision"), "2/3 (66.67%)");

    let o = paxp(&["count", s(&m), "--instance", "3,3,3,3", "--fix", ""]);
    let out = stdout(&o);
    assert_eq!(field(&out, "n_plus"), "50");
    assert_eq!(field(&out, "total"), "81");

    let o = paxp(&["count", s(&m), "--instance", "3,3,3,3", "--fix", "1,2,3,4"]);
    assert_eq!(field(&stdout(&o), "n_plus"), "1");
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    let m = sum_model(&dir);
    let o = paxp(&["explain", s(&m), "--instance", "3,3,9,3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("x3"), "{}", stderr(&o));

    let o = paxp(&["explain", s(&m), "--instance", "3,3,3,3", "--delta", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = paxp(&["count", s(&m), "--instance", "3,3,3,3", "--fix", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = paxp(&["explain"]);
    assert_eq!(o.status.code(), Some(2));
    let o = paxp(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let model = dir.path().join("m.json");
    let o = paxp(&["train", s(&empty), "--out", s(&model)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("EmptyDataset"), "{}", stderr(&o));

    let one = dir.path().join("one.csv");
    std::fs::write(&one, "a,b,y\nx,y,yes\nx,z,yes\n").unwrap();
    let o = paxp(&["train", s(&one), "--out", s(&model)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("SingleClassDataset"), "{}", stderr(&o));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b,y\nx,y,yes\nx,no\n").unwrap();
    let o = paxp(&["train", s(&bad), "--out", s(&model)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn train_keeps_values_seen_only_in_the_test_split() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("d.csv");
    let mut csv = String::from("color,size,label\n");
    for i in 0..40 {
        let c = if i % 2 == 0 { "red" } else { "blue" };
        let l = if i % 3 == 0 { "yes" } else { "no" };
        csv += &format!("{c},s{},{l}\n", i % 3);
    }
    csv += "green,s0,yes\n";
    std::fs::write(&data, csv).unwrap();
    let model = dir.path().join("m.json");
    let test = dir.path().join("t.csv");
    let o = paxp(&[
        "train",
        s(&data),
        "--out",
        s(&model),
        "--split",
        "0.8",
        "--seed",
        "3",
        "--test-out",
        s(&test),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(field(&out, "train rows").starts_with("33,"), "{out}");
    assert!(field(&out, "test rows").starts_with("8,"), "{out}");
    let text = std::fs::read_to_string(&model).unwrap();
    assert!(text.contains("green"));
    let o = paxp(&["explain", s(&model), "--instance", "green,s0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = paxp(&[
        "bench",
        s(&model),
        s(&test),
        "--targets",
        "1",
        "--deltas",
        "0.9",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn bench_is_reproducible_and_reports_round_trip() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("m.json");
    let test = dir.path().join("t.csv");
    let o = paxp(&[
        "train",
        &bundled(),
        "--out",
        s(&model),
        "--test-out",
        s(&test),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let run = |tag: &str, extra: &[&str]| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let json = dir.path().join(format!("{tag}.json"));
        let mut args = vec![
            "bench",
            s(&model),
            s(&test),
            "--max-instances",
            "12",
            "--seed",
            "9",
            "--csv",
            s(&csv),
            "--json",
            s(&json),
        ];
        args.extend_from_slice(extra);
        let o = paxp(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        (std::fs::read(&csv).unwrap(), json)
    };
    let (a, json) = run("a", &[]);
    let (b, _) = run("b", &["--jobs", "2"]);
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a.clone()).unwrap().lines().count(), 13);

    let report: BenchReport =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let again: BenchReport =
        serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(again, report);
    assert_eq!(report.rows.len(), 12);

    let o = paxp(&["export-report", s(&json), "--format", "csv"]);
    assert_eq!(o.stdout, a);
    let o = paxp(&["export-report", s(&json)]);
    assert!(stdout(&o).contains("precision %"));

    let (_, json) = run("one", &["--deltas", "0.95", "--targets", "7"]);
    let report: BenchReport =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(report.rows[0].precision_mean >= 95.0);

    let json = dir.path().join("single.json");
    let o = paxp(&[
        "bench",
        s(&model),
        s(&test),
        "--max-instances",
        "1",
        "--deltas",
        "0.95",
        "--targets",
        "7",
        "--json",
        s(&json),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let single: BenchReport =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(single.rows[0].instances, 1);
    assert!(single.rows[0].win_rate == 0.0 || single.rows[0].win_rate == 100.0);
}

#[test]
fn explanation_kinds_in_json() {
    let dir = TempDir::new().unwrap();
    let m = sum_model(&dir);
    let o = paxp(&[
        "explain",
        s(&m),
        "--instance",
        "3,3,3,3",
        "--target-size",
        "4",
        "--json",
    ]);
    let e: Explanation = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(e.kind, ExplanationKind::Axp);
    assert_eq!(e.features.len(), 2);
}
