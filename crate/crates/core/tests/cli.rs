use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hypocontract::{parse_matrix, serialize_matrix, OperatorMatrix};
use serde_json::Value;
use tempfile::TempDir;

const DAMPED: &str =
    r#"{"dim":2,"entries":[[0,0],[0.5,0],[-0.5,0],[1,0]],"label":"the damped oscillator"}"#;
const COERCIVE: &str = r#"{"dim":2,"entries":[[1,0],[0.5,0],[-0.5,0],[1,0]]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypocontract"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("process exited normally")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

#[test]
fn analyze_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "b.json", DAMPED);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b_out.json");
    for out in [&a, &b] {
        let o = run(&[
            "analyze",
            "--matrix",
            m.to_str().unwrap(),
            "--tau",
            "1e-2:1e2:5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn analyze_report_shape() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "b.json", DAMPED);
    let o = run(&["analyze", "--matrix", m.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        [
            "coercivity_bounds",
            "decay_rate",
            "hc_index",
            "hypocoercive",
            "input",
            "marginal",
            "schema_version",
            "schemes",
            "semi_dissipative",
            "step_size_windows",
            "tolerances",
            "tool",
        ]
    );
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["input"]["label"], "the damped oscillator");
    assert_eq!(v["hc_index"]["status"], "ok");
    assert_eq!(v["hc_index"]["value"]["index"], 1);
    assert_eq!(v["semi_dissipative"]["value"], true);
    assert_eq!(v["hypocoercive"]["hypocoercive"], true);
    // default θ ∈ {0, ½, 1} at τ = 1
    let schemes = v["schemes"].as_array().unwrap();
    assert_eq!(schemes.len(), 3);
    assert_eq!(
        schemes[0]["result"]["value"]["contractivity"]["class"],
        "expanding"
    );
    assert_eq!(
        schemes[1]["result"]["value"]["dhc_index"]["value"]["index"],
        1
    );
    assert_eq!(schemes[1]["result"]["value"]["first_contraction_index"], 2);
    assert_eq!(
        schemes[2]["result"]["value"]["contractivity"]["class"],
        "contractive"
    );
    assert_eq!(
        v["step_size_windows"][0]["window"]["value"]["kind"],
        "empty"
    );
}

/// d.dddddddddddddddde±x: one leading digit and sixteen after the point.
fn is_seventeen_digit_float(token: &str) -> bool {
    let t = token.strip_prefix('-').unwrap_or(token);
    let Some((mantissa, exponent)) = t.split_once('e') else {
        return false;
    };
    let Some((lead, frac)) = mantissa.split_once('.') else {
        return false;
    };
    lead.len() == 1
        && frac.len() == 16
        && lead
            .chars()
            .chain(frac.chars())
            .all(|ch| ch.is_ascii_digit())
        && exponent
            .strip_prefix('-')
            .unwrap_or(exponent)
            .parse::<u32>()
            .is_ok()
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "b.json", COERCIVE);
    let o = run(&["analyze", "--matrix", m.to_str().unwrap(), "--theta", "0"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut floats = 0;
    for token in text.split(|ch: char| ch.is_whitespace() || ",[]{}:".contains(ch)) {
        let numeric = token.starts_with(|ch: char| ch.is_ascii_digit() || ch == '-');
        if numeric && (token.contains('.') || token.contains('e')) {
            assert!(is_seventeen_digit_float(token), "{token}");
            floats += 1;
        }
    }
    assert!(floats > 20);
    let v: Value = serde_json::from_str(&text).unwrap();
    let tau0 = v["step_size_windows"][0]["window"]["value"]["tau0"]
        .as_f64()
        .unwrap();
    assert!((tau0 - 1.6).abs() < 1e-9);
}

#[test]
fn analyze_csv_format() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "b.json", DAMPED);
    let o = run(&[
        "analyze",
        "--matrix",
        m.to_str().unwrap(),
        "--theta",
        "0.5",
        "--tau",
        "0.5,1,2",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(std::str::from_utf8(&o.stdout).unwrap());
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r[6], "1");
        assert_eq!(r[7], "2");
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let p = |name: &str, text: &str| write(dir.path(), name, text).to_str().unwrap().to_owned();
    let good = p("good.json", DAMPED);
    let broken = p("broken.json", "{\"dim\": 2, \"entries\": [");
    let short = p("short.json", r#"{"dim":2,"entries":[[0,0]]}"#);
    let neg = p("neg.json", r#"{"dim":1,"entries":[[-1,0]]}"#);
    let huge = p(
        "huge.json",
        r#"{"dim":2,"entries":[[1e300,0],[1e300,0],[-1e300,0],[1e300,0]]}"#,
    );
    let missing = dir.path().join("nope.json").to_str().unwrap().to_owned();

    assert_eq!(code(&run(&["analyze", "--matrix", &good])), 0);
    assert_eq!(code(&run(&["analyze", "--matrix", &broken])), 2);
    assert_eq!(code(&run(&["analyze", "--matrix", &short])), 2);
    assert_eq!(code(&run(&["analyze", "--matrix", &missing])), 2);
    assert_eq!(
        code(&run(&["analyze", "--matrix", &good, "--theta", "2"])),
        2
    );
    assert_eq!(
        code(&run(&["analyze", "--matrix", &good, "--tau", "abc"])),
        2
    );
    // I + θτB is singular for B = −1, θ = τ = 1
    assert_eq!(
        code(&run(&[
            "analyze", "--matrix", &neg, "--theta", "1", "--tau", "1"
        ])),
        3
    );
    assert_eq!(code(&run(&["analyze", "--matrix", &huge])), 4);

    let o = run(&["analyze", "--matrix", &broken]);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn sweep_brackets_the_explicit_euler_threshold() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "b.json", COERCIVE);
    let out = dir.path().join("sweep.csv");
    let o = run(&[
        "sweep",
        "--matrix",
        m.to_str().unwrap(),
        "--theta",
        "0",
        "--tau",
        "1e-2:1e1:61",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 61);
    let taus: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    let ok: Vec<bool> = rows.iter().map(|r| r[2] != "expanding").collect();
    let last_ok = ok.iter().rposition(|&b| b).unwrap();
    assert!(ok[..=last_ok].iter().all(|&b| b));
    assert!(ok[last_ok + 1..].iter().all(|&b| !b));
    assert!(taus[last_ok] <= 1.6 && 1.6 < taus[last_ok + 1]);
}

#[test]
fn sweep_implicit_euler_damped_is_all_contractive() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "b.json", DAMPED);
    let out = dir.path().join("sweep.json");
    let o = run(&[
        "sweep",
        "--matrix",
        m.to_str().unwrap(),
        "--theta",
        "1",
        "--tau",
        "1e-3:1e3:20",
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 20);
    assert!(rows
        .iter()
        .all(|r| r["result"]["value"]["class"] == "contractive"));
}

#[test]
fn sweep_rejects_single_point_range() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "b.json", COERCIVE);
    let out = dir.path().join("sweep.csv");
    let o = run(&[
        "sweep",
        "--matrix",
        m.to_str().unwrap(),
        "--theta",
        "0",
        "--tau",
        "1e-2:1:1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn curve_continuous_fit() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "b.json", DAMPED);
    let out = dir.path().join("curve.csv");
    let o = run(&[
        "curve",
        "--matrix",
        m.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let summary: Value = serde_json::from_slice(&o.stdout).unwrap();
    let a = summary["fit"]["value"]["a_hat"].as_f64().unwrap();
    assert!((a - 3.0).abs() < 0.1, "{a}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t,norm\n"));
    assert_eq!(csv_rows(&text).len(), 50);
}

#[test]
fn curve_discrete_plateau() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "b.json", DAMPED);
    let out = dir.path().join("curve.json");
    let o = run(&[
        "curve",
        "--matrix",
        m.to_str().unwrap(),
        "--mode",
        "discrete",
        "--theta",
        "0.5",
        "--tau",
        "1",
        "--k-max",
        "6",
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["first_contraction_index"], 2);
    assert_eq!(v["curve"]["values"].as_array().unwrap().len(), 7);

    let o = run(&[
        "curve",
        "--matrix",
        m.to_str().unwrap(),
        "--mode",
        "discrete",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn curve_without_decay_reports_it() {
    let dir = TempDir::new().unwrap();
    let m = write(
        dir.path(),
        "b.json",
        r#"{"dim":2,"entries":[[0,0],[1,0],[-1,0],[0,0]]}"#,
    );
    let out = dir.path().join("curve.csv");
    let o = run(&[
        "curve",
        "--matrix",
        m.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let summary: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["fit"]["status"], "error");
    assert!(summary["fit"]["value"]["message"]
        .as_str()
        .unwrap()
        .contains("no decay detected"));
}

#[test]
fn matrix_documents_round_trip() {
    for text in [DAMPED, COERCIVE] {
        let m = parse_matrix(text.as_bytes()).unwrap();
        let again = parse_matrix(serialize_matrix(&m, None).as_bytes()).unwrap();
        assert_eq!(m, again);
    }
    let m = OperatorMatrix::from_real_rows([[0.1, 1.0 / 3.0], [f64::MIN_POSITIVE, -7e-300]]);
    assert_eq!(
        parse_matrix(serialize_matrix(&m, Some("x")).as_bytes()).unwrap(),
        m
    );
}
