use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

const JP99_X: &str = r#"["2/5","2/5","0.1","0.1"]"#;
const JP99_Y: &str = r#"["1/2","1/4","1/4","0"]"#;

fn schmidt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schmidt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn check_majorize_reports_failing_prefix() {
    let out = schmidt(&["check-majorize", "--x", JP99_X, "--y", JP99_Y]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["holds"], false);
    assert_eq!(v["failing_index"], 2);
    assert_eq!(v["prefix_gap"], "1/20");

    let out = schmidt(&["check-majorize", "--x", JP99_Y, "--y", JP99_Y]);
    assert_eq!(code(&out), 0);
}

#[test]
fn prob_single_and_multiple_copies() {
    let out = schmidt(&["prob", "--x", JP99_X, "--y", JP99_Y]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["probability"]["value"], "4/5");
    assert_eq!(json(&out)["probability"]["minimizing_index"], 3);

    let out = schmidt(&["prob", "--x", r#"["4/5","1/5"]"#, "--y", r#"["1/2","1/2"]"#, "--copies", "2"]);
    assert_eq!(json(&out)["probability"]["value"], "4/25");
}

#[test]
fn catalyze_verify_and_search() {
    let out = schmidt(&["catalyze", "--x", JP99_X, "--y", JP99_Y, "--catalyst", r#"["3/5","2/5"]"#]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["majorization"]["holds"], true);

    let out = schmidt(&["catalyze", "--x", JP99_X, "--y", JP99_Y, "--catalyst", r#"["1/2","1/2"]"#]);
    assert_eq!(code(&out), 1);

    let out = schmidt(&[
        "catalyze", "--x", JP99_X, "--y", JP99_Y, "--search", "--cat-dim", "2", "--cat-denom", "5",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["search"]["status"], "yes");
    assert_eq!(v["search"]["evidence"]["catalyst"], serde_json::json!(["3/5", "2/5"]));

    let out = schmidt(&[
        "catalyze", "--x", r#"["1/2","2/5","1/10"]"#, "--y", r#"["9/20","9/20","1/10"]"#, "--search",
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["search"]["status"], "no");

    let out = schmidt(&["catalyze", "--x", JP99_X, "--y", JP99_Y, "--search", "--cat-dim", "1"]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["search"]["status"], "unknown");

    let out = schmidt(&["catalyze", "--x", JP99_X, "--y", JP99_Y]);
    assert_eq!(code(&out), 3);
}

#[test]
fn multicopy_and_certify() {
    let out = schmidt(&["multicopy", "--x", JP99_X, "--y", JP99_Y, "--kmax", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["in_M"]["evidence"], 3);

    let out = schmidt(&["multicopy", "--x", JP99_X, "--y", JP99_Y, "--kmax", "2"]);
    assert_eq!(code(&out), 2);

    let x = r#"["3/4","7/64","21/256","11/256","1/64"]"#;
    let y = r#"["3/4","1/8","1/16","1/16","0"]"#;
    let out = schmidt(&["certify", "--x", x, "--y", y]);
    assert_eq!(code(&out), 1);
    let cert = &json(&out)["certificate"];
    assert_eq!(cert["kind"], "head");
    assert_eq!((cert["t"].as_u64(), cert["d"].as_u64()), (Some(1), Some(3)));

    let x = r#"["18/25","13/100","1/10","1/20"]"#;
    let y = r#"["2/5","3/10","1/5","1/10"]"#;
    let out = schmidt(&["multicopy", "--x", x, "--y", y, "--lambda", "1/2"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["in_M"]["evidence"]["kind"], "prob_tail");

    let out = schmidt(&["certify", "--x", JP99_X, "--y", JP99_Y]);
    assert_eq!(code(&out), 2);
    assert!(json(&out)["certificate"].is_null());
}

#[test]
fn witness_and_augment() {
    let out = schmidt(&["augment", "--y", JP99_Y, "--a", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out), serde_json::json!(["3/4", "1/8", "1/16", "1/16", "0/1"]));

    let y = r#"["3/4","1/8","1/16","1/16","0"]"#;
    let out = schmidt(&["witness", "--deterministic", "--y", y]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["witness"], serde_json::json!(["3/4", "7/64", "21/256", "11/256", "1/64"]));
    assert_eq!(v["non_membership"]["kind"], "head");
    assert_eq!(v["catalysis_evidence"]["status"], "found");

    let out = schmidt(&["witness", "--deterministic", "--y", JP99_Y]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("d < n - m"));

    let out = schmidt(&["witness", "--lambda", "1", "--y", y]);
    assert_eq!(code(&out), 3);
}

#[test]
fn classify_jp99() {
    let out = schmidt(&["classify", "--x", JP99_X, "--y", JP99_Y, "--lambda", "4/5"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["in_S"], false);
    assert_eq!(v["in_T"]["status"], "yes");
    assert_eq!(v["in_M"]["evidence"], 3);
    assert_eq!(v["P"], "4/5");
    assert_eq!(v["lambda"]["in_S_lambda"], true);
}

#[test]
fn file_inputs_and_scan_output() {
    let dir = tempfile::tempdir().unwrap();
    let y_path = dir.path().join("y.json");
    fs::write(&y_path, JP99_Y).unwrap();
    let csv_path = dir.path().join("scan.csv");
    let y_arg = format!("@{}", y_path.display());

    let out = schmidt(&["prob", "--x", JP99_X, "--y", &y_arg]);
    assert_eq!(json(&out)["probability"]["value"], "4/5");

    let out = schmidt(&[
        "scan", "--y", &y_arg, "--resolution", "4", "--lambda", "1/2", "--output", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = json(&out)["rows"].as_u64().unwrap();
    let text = fs::read_to_string(&csv_path).unwrap();
    assert!(text.starts_with("x_1,x_2,x_3,x_4,P,in_S,in_T,in_M,interior_T_sufficient"));
    assert_eq!(text.lines().count() as u64, rows + 1);

    let out = schmidt(&["scan", "--y", r#"["1/3","2/3"]"#, "--resolution", "4"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.contains(&"3/4,1/4,3/4,false,no,unknown,false,3/4"));
    assert!(lines.contains(&"1/2,1/2,1/1,true,yes,yes,true,1/1"));
}

#[test]
fn input_errors_exit_three() {
    for args in [
        vec!["prob", "--x", "not json", "--y", JP99_Y],
        vec!["prob", "--x", r#"["-1/2","3/2"]"#, "--y", r#"["1/2","1/2"]"#],
        vec!["prob", "--x", JP99_X, "--y", r#"["1/2"]"#],
        vec!["prob", "--x", JP99_X, "--y", "@/nonexistent/file.json"],
        vec!["bogus"],
    ] {
        let out = schmidt(&args);
        assert_eq!(code(&out), 3, "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}
