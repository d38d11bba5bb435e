use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use condrisk_cli::scenario::Scenario;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn condrisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condrisk"))
        .args(args)
        .env_remove("CONDRISK_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn rows<'a>(report: &'a serde_json::Value, position: &str, quantity: &str) -> Vec<&'a serde_json::Value> {
    report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["position"] == position && r["quantity"] == quantity)
        .collect()
}

/// Deterministic pseudo-random scenario with 9 states in 3 atoms.
fn write_random_scenario(dir: &Path) -> PathBuf {
    let n = 9;
    let raw: Vec<f64> = (0..n).map(|i| 0.3 + (i as f64 * 1.7).sin().abs()).collect();
    let total: f64 = raw.iter().sum();
    let states: Vec<serde_json::Value> = raw
        .iter()
        .enumerate()
        .map(|(i, p)| serde_json::json!({"name": format!("w{i}"), "prob": p / total}))
        .collect();
    let atoms = serde_json::json!([["w0", "w4", "w8"], ["w1", "w2"], ["w3", "w5", "w6", "w7"]]);
    let x: Vec<f64> = (0..n).map(|i| 5.0 * (i as f64 * 2.3 + 0.4).cos()).collect();
    let y: Vec<f64> = (0..n).map(|i| 5.0 * (i as f64 * 0.9 - 1.1).sin()).collect();
    let doc = serde_json::json!({"states": states, "atoms": atoms, "positions": {"x": x, "y": y}});
    let path = dir.join("random.json");
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    path
}

#[test]
fn oce_kl_two_state_matches_entropic_value() {
    let file = scenario("two_state.json");
    let out = condrisk(&["oce", file.to_str().unwrap(), "--position", "x", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let row = rows(&report, "x", "oce")[0];
    assert!((row["value"].as_f64().unwrap() - 0.4700036292457356).abs() < 1e-9);
    assert!(row["residual"].as_f64().unwrap() <= 1e-10);
    assert!(row["argmax"].is_number());
}

#[test]
fn constant_position_returns_the_constant() {
    let file = scenario("two_state.json");
    for gen in ["kl", "chi2", "power:3"] {
        let out = condrisk(&[
            "oce",
            file.to_str().unwrap(),
            "--position",
            "flat",
            "--divergence",
            gen,
            "--format",
            "json",
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(rows(&json(&out), "flat", "oce")[0]["value"].as_f64(), Some(2.5));
    }
}

#[test]
fn unknown_generator_is_a_usage_error() {
    let file = scenario("two_state.json");
    let out = condrisk(&["oce", file.to_str().unwrap(), "--divergence", "hellinger"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    for name in ["kl", "chi2", "power:<alpha>"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn gap_on_random_scenario_is_small() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_random_scenario(dir.path());
    for gen in ["kl", "chi2", "power:2", "power:3"] {
        let out = condrisk(&[
            "gap",
            file.to_str().unwrap(),
            "--divergence",
            gen,
            "--tol",
            "1e-6",
            "--format",
            "json",
        ]);
        assert_eq!(out.status.code(), Some(0), "{gen}: {}", stdout(&out));
        let report = json(&out);
        for pos in ["x", "y"] {
            let gaps = rows(&report, pos, "gap");
            assert_eq!(gaps.len(), 3);
            assert!(gaps.iter().all(|r| r["value"].as_f64().unwrap() <= 1e-6));
        }
    }
}

#[test]
fn dual_reports_multiplier_and_density() {
    let file = scenario("two_period.json");
    let out = condrisk(&[
        "dual",
        file.to_str().unwrap(),
        "--position",
        "call",
        "--divergence",
        "chi2",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let duals = rows(&report, "call", "dual");
    assert_eq!(duals.len(), 2);
    assert!(duals
        .iter()
        .all(|r| r["multiplier"].is_number() && r["residual"].is_number()));
    // the density integrates to one on each atom: 0.4 * y_uu + 0.6 * y_ud = 1
    let d = |name: &str| {
        rows(&report, "call", &format!("density[{name}]"))[0]["value"]
            .as_f64()
            .unwrap()
    };
    assert!((0.4 * d("uu") + 0.6 * d("ud") - 1.0).abs() < 1e-10);
}

#[test]
fn entropic_matches_oce_kl() {
    let file = scenario("two_period.json");
    let e = json(&condrisk(&["entropic", file.to_str().unwrap(), "--format", "json"]));
    let o = json(&condrisk(&["oce", file.to_str().unwrap(), "--format", "json"]));
    for pos in ["call", "short", "stock"] {
        let ev = rows(&e, pos, "entropic");
        let ov = rows(&o, pos, "oce");
        assert!(ev[0]["residual"].is_null());
        for (a, b) in ev.iter().zip(&ov) {
            assert!((a["value"].as_f64().unwrap() - b["value"].as_f64().unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn divergence_of_base_measure_is_zero() {
    let file = scenario("two_state.json");
    let out = condrisk(&[
        "divergence",
        file.to_str().unwrap(),
        "--measure",
        "base",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&json(&out), "base", "divergence")[0]["value"].as_f64(), Some(0.0));

    // nu = (0.75, 0.25) against the uniform base: 0.5 phi(1.5) + 0.5 phi(0.5)
    let out = condrisk(&[
        "divergence",
        file.to_str().unwrap(),
        "--measure",
        "tilted",
        "--divergence",
        "chi2",
        "--format",
        "json",
    ]);
    assert_eq!(
        rows(&json(&out), "tilted", "divergence")[0]["value"].as_f64(),
        Some(0.25)
    );
}

#[test]
fn divergence_mass_mismatch_names_the_field() {
    let file = scenario("two_period.json");
    let out = condrisk(&["divergence", file.to_str().unwrap(), "--measure", "call"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("positions.call"), "{err}");
}

#[test]
fn check_entropic_passes_and_squared_expectation_fails() {
    let file = scenario("two_period.json");
    let out = condrisk(&[
        "check",
        file.to_str().unwrap(),
        "--operator",
        "entropic",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["rows"].as_array().unwrap().len(), 6);
    assert!(report["rows"].as_array().unwrap().iter().all(|r| r["passed"] == true));

    let out = condrisk(&[
        "check",
        file.to_str().unwrap(),
        "--operator",
        "squared-expectation",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    let ti = report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["axiom"] == "translation-invariance")
        .unwrap();
    assert_eq!(ti["passed"], false);
    assert!(ti["counterexample"].as_str().unwrap().contains("shift"));
}

#[test]
fn check_niveloidified_i_phi_passes() {
    let file = scenario("two_period.json");
    let raw = condrisk(&[
        "check",
        file.to_str().unwrap(),
        "--operator",
        "iphi:chi2",
        "--samples",
        "20",
    ]);
    assert_eq!(raw.status.code(), Some(1));
    let niv = condrisk(&[
        "check",
        file.to_str().unwrap(),
        "--operator",
        "niv:iphi:chi2",
        "--samples",
        "20",
    ]);
    assert_eq!(niv.status.code(), Some(0), "{}", stdout(&niv));
}

#[test]
fn echo_input_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["two_state.json", "two_period.json"] {
        let file = scenario(name);
        let out = condrisk(&["oce", file.to_str().unwrap(), "--format", "json", "--echo-input"]);
        assert_eq!(out.status.code(), Some(0));
        let echoed = dir.path().join(format!("report-{name}"));
        std::fs::write(&echoed, &out.stdout).unwrap();
        let original = Scenario::load(&file).unwrap();
        let reparsed = Scenario::load(&echoed).unwrap();
        assert_eq!(original, reparsed);

        // the report itself is a valid input
        let again = condrisk(&["oce", echoed.to_str().unwrap(), "--format", "json", "--echo-input"]);
        assert_eq!(again.stdout, out.stdout);
    }
}

#[test]
fn output_is_deterministic() {
    let file = scenario("two_period.json");
    for format in ["table", "json", "csv"] {
        let a = condrisk(&[
            "gap",
            file.to_str().unwrap(),
            "--divergence",
            "power:2.5",
            "--format",
            format,
        ]);
        let b = condrisk(&[
            "gap",
            file.to_str().unwrap(),
            "--divergence",
            "power:2.5",
            "--format",
            format,
        ]);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn csv_has_one_line_per_row() {
    let file = scenario("two_period.json");
    let out = condrisk(&["oce", file.to_str().unwrap(), "--format", "csv"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "position,atom,quantity,value,residual,iterations,argmax,multiplier"
    );
    assert_eq!(lines.len(), 1 + 3 * 2);
}

#[test]
fn residual_above_tolerance_exits_3() {
    let file = scenario("two_state.json");
    let out = condrisk(&["oce", file.to_str().unwrap(), "--position", "x", "--tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("oce"));
}

#[test]
fn gap_above_tolerance_exits_4() {
    let file = scenario("two_period.json");
    let out = condrisk(&[
        "gap",
        file.to_str().unwrap(),
        "--divergence",
        "chi2",
        "--position",
        "short",
        "--tol",
        "1e-300",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn tolerance_from_environment() {
    let file = scenario("two_state.json");
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_condrisk"))
            .args(["oce", file.to_str().unwrap(), "--position", "x"])
            .env("CONDRISK_TOL", tol)
            .output()
            .unwrap()
    };
    assert_eq!(run("1e-300").status.code(), Some(3));
    assert_eq!(run("1e-8").status.code(), Some(0));
    assert!(stdout(&run("1e-8")).contains("tol=1e-8"));
    assert_eq!(run("-1").status.code(), Some(2));
}

#[test]
fn malformed_files_are_usage_errors_with_locations() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        "{\n  \"states\": [\n    {\"name\": \"a\", \"prob\": 1.0,}\n  ]\n}\n",
    )
    .unwrap();
    let out = condrisk(&["oce", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 3"));

    std::fs::write(
        &bad,
        r#"{"states": [{"name": "a", "prob": 0.5}, {"name": "b", "prob": 0.5}], "atoms": [["a", "b"]], "positions": {"x": [1, 2, 3]}}"#,
    )
    .unwrap();
    let out = condrisk(&["oce", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("positions.x"));

    let out = condrisk(&["oce", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn echo_input_requires_json() {
    let file = scenario("two_state.json");
    let out = condrisk(&["oce", file.to_str().unwrap(), "--echo-input"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_position_and_operator() {
    let file = scenario("two_state.json");
    assert_eq!(
        condrisk(&["oce", file.to_str().unwrap(), "--position", "nope"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        condrisk(&["check", file.to_str().unwrap(), "--operator", "var"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(condrisk(&["frobnicate"]).status.code(), Some(2));
}
