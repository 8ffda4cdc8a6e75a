use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn xtorsion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xtorsion")).args(args).env_remove("XTORSION_PRECISION").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn golden(args: &[&str], file: &str) {
    let o = xtorsion(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let expected = std::fs::read_to_string(data(file)).unwrap();
    assert_eq!(stdout(&o), expected, "golden mismatch for {file}");
}

#[test]
fn cz_of_half_reeb_on_c2_prints_two() {
    let o = xtorsion(&["cz", &data("reeb_half_n2.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "2");
    golden(&["--format", "json", "cz", &data("reeb_half_n2.json")], "cz_reeb_half_n2.golden.json");
}

#[test]
fn mu_is_cz_minus_n() {
    let v = json(&xtorsion(&["--format", "json", "mu", &data("reeb_half_n2.json")]));
    assert_eq!(v["mu"], 0);
    assert_eq!(v["right_limit"], false);
}

#[test]
fn inline_isotopy_input() {
    let inline = r#"{"segments": [{"type": "exp", "S": [[9.42477796076938, 0], [0, 9.42477796076938]], "duration": 1}]}"#;
    let o = xtorsion(&["cz", inline]);
    assert_eq!(stdout(&o).trim(), "3");
}

#[test]
fn spectrum_of_half_reeb() {
    let v = json(&xtorsion(&["--format", "json", "spectrum", &data("reeb_half_n2.json"), "--window", "0,1"]));
    let distinct: Vec<f64> = serde_json::from_value(v["distinct"].clone()).unwrap();
    assert_eq!(distinct.len(), 1);
    assert!((distinct[0] - 0.5).abs() < 1e-9);
    assert!((v["c_r"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn paths_example() {
    let o = xtorsion(&["--format", "json", "paths", "--n", "3", "--cube", "1/2,1/2"]);
    let v = json(&o);
    assert_eq!(v["taus"], serde_json::json!(["0", "7/4", "5/2", "3"]));
    golden(&["--format", "json", "paths", "--n", "3", "--cube", "1/2,1/2"], "paths_half_half.golden.json");
    let text = stdout(&xtorsion(&["paths", "--n", "3", "--cube", "1/2,1/2"]));
    assert!(text.starts_with("taus  0 7/4 5/2 3"), "{text}");
}

#[test]
fn paths_rejects_bad_coordinates() {
    assert_eq!(xtorsion(&["paths", "--n", "3", "--cube", "1/2"]).status.code(), Some(2));
    assert_eq!(xtorsion(&["paths", "--n", "2", "--cube", "3/2"]).status.code(), Some(2));
    assert_eq!(xtorsion(&["paths", "--n", "2", "--cube", "x"]).status.code(), Some(2));
}

#[test]
fn nerve_verify_exit_codes() {
    golden(&["--format", "json", "nerve-verify", &data("strict_triangle.json")], "nerve_strict.golden.json");
    let o = xtorsion(&["--format", "json", "nerve-verify", &data("broken_triangle.json")]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["all_vanish"], false);
    assert!(v["residuals"][3]["residual"].is_object());
}

#[test]
fn cone_of_multiplication_by_x() {
    golden(&["--format", "json", "cone", &data("cone_x.json")], "cone_x.golden.json");
    let v = json(&xtorsion(&["--format", "json", "cone", &data("cone_x.json")]));
    assert_eq!(v["x_torsion"], true);
    assert_eq!(v["homology"]["even"]["torsion"], serde_json::json!([1]));
}

#[test]
fn diagram_mu_profile() {
    golden(&["--format", "json", "diagram-mu", &data("diagram_x.json")], "diagram_x.golden.json");
    let v = json(&xtorsion(&["--format", "json", "mu", &data("diagram_x.json"), "--at", "0"]));
    assert_eq!(v["mu"], serde_json::json!({ "kind": "finite", "value": 0 }));
}

#[test]
fn morse_eq_builtins() {
    golden(&["--format", "json", "morse-eq", "pt:p=3"], "morse_pt_p3.golden.json");
    let v = json(&xtorsion(&["--format", "json", "morse-eq", "free-orbit:p=2"]));
    assert_eq!(v["unit"]["class"], "torsion");
    assert_eq!(v["dichotomy_holds"], true);
    assert_eq!(xtorsion(&["morse-eq", "nowhere:p=3"]).status.code(), Some(2));
}

#[test]
fn compose_checks_endpoints() {
    let v = json(&xtorsion(&["--format", "json", "compose", &data("compose_reeb.json")]));
    assert_eq!(v["holds"], true);
    assert_eq!(v["mu"]["end"]["mu"], 2);
    assert_eq!(xtorsion(&["compose", &data("compose_gap.json")]).status.code(), Some(2));
}

#[test]
fn malformed_input_reports_position() {
    let o = xtorsion(&["--format", "json", "cz", &data("malformed.json")]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(json(&o)["error"].as_str().unwrap().contains("line 3"));
    assert_eq!(xtorsion(&["cz", &data("missing.json")]).status.code(), Some(2));
}

#[test]
fn precision_from_environment() {
    let run = |env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_xtorsion"));
        c.args(["--format", "json", "morse-eq", "pt:p=3"]);
        match env {
            Some(v) => c.env("XTORSION_PRECISION", v),
            None => c.env_remove("XTORSION_PRECISION"),
        };
        c.output().unwrap()
    };
    assert_eq!(json(&run(None))["precision"], 16);
    assert_eq!(json(&run(Some("6")))["precision"], 6);
    assert_eq!(run(Some("zero")).status.code(), Some(2));
}

#[test]
fn json_output_is_deterministic() {
    let args = ["--format", "json", "diagram-mu", &data("diagram_x.json")];
    assert_eq!(xtorsion(&args).stdout, xtorsion(&args).stdout);
    let args = ["--format", "json", "selftest", "--only", "1,6,10"];
    assert_eq!(xtorsion(&args).stdout, xtorsion(&args).stdout);
}

#[test]
fn selftest_names_the_corrupted_identity() {
    let o = xtorsion(&["--format", "json", "selftest", "--only", "6", "--corrupt-sign", "delta_corner"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["all_pass"], false);
    let failures = v["criteria"][0]["failures"].to_string();
    assert!(failures.contains("delta_corner flipped"), "{failures}");
    assert!(failures.contains("chain map") || failures.contains("= 0") || failures.contains("dK + Kd"), "{failures}");
    assert_eq!(xtorsion(&["selftest", "--corrupt-sign", "bogus"]).status.code(), Some(2));
}

#[test]
fn full_selftest_passes() {
    let o = xtorsion(&["selftest"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 10, "{text}");
}
