use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_condstate");

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/scenarios").join(name)
}

fn condstate(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("CONDSTATE_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout))
    })
}

fn run_file(name: &str) -> Value {
    let path = scenario(name);
    let o = condstate(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    json(&o)
}

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), text).unwrap();
    f
}

fn output<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .find(|o| o["name"] == name)
        .map(|o| &o["value"])
        .unwrap_or_else(|| panic!("no output `{name}` in {r}"))
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

/// `[[[re, im]]]` to `(re, im)` rows.
fn entries(m: &Value) -> Vec<Vec<(f64, f64)>> {
    m.as_array()
        .unwrap()
        .iter()
        .map(|row| {
            row.as_array()
                .unwrap()
                .iter()
                .map(|z| (z[0].as_f64().unwrap(), z[1].as_f64().unwrap()))
                .collect()
        })
        .collect()
}

fn assert_real_matrix(m: &Value, expected: &[&[f64]], tol: f64) {
    let got = entries(m);
    assert_eq!(got.len(), expected.len());
    for (i, row) in expected.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let (re, im) = got[i][j];
            assert!((re - x).abs() < tol && im.abs() < tol, "entry ({i},{j}) is {re}+{im}i, expected {x}");
        }
    }
}

fn assert_close(got: &[f64], expected: &[f64], tol: f64) {
    assert_eq!(got.len(), expected.len(), "{got:?} vs {expected:?}");
    for (g, e) in got.iter().zip(expected) {
        assert!((g - e).abs() < tol, "{got:?} vs {expected:?}");
    }
}

fn check_names(r: &Value) -> Vec<String> {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn born_rule() {
    let r = run_file("propagate-born.json");
    assert_eq!(r["task"], "propagate");
    assert_close(&floats(&output(&r, "output")["probs"]), &[0.75, 0.25], 1e-12);
    assert_eq!(r["passed"], true);
    assert!(r.get("seed").is_none());
}

#[test]
fn propagate_through_damping_then_measure() {
    // |1><1| under amplitude damping with gamma = 0.36 ends as diag(0.36, 0.64)
    let r = run_file("propagate-chain.json");
    assert_real_matrix(&output(&r, "after damping")["matrix"], &[&[0.36, 0.0], &[0.0, 0.64]], 1e-12);
    assert_close(&floats(&output(&r, "output")["probs"]), &[0.36, 0.64], 1e-12);
}

#[test]
fn bayes_inversion_marginal_and_checks() {
    // prior [[1/2, 1/4], [1/4, 1/2]] under damping: [[0.68, 0.2], [0.2, 0.32]]
    let r = run_file("bayes-invert.json");
    assert_real_matrix(&output(&r, "marginal")["matrix"], &[&[0.68, 0.2], &[0.2, 0.32]], 1e-12);
    let inv = output(&r, "inverse");
    assert_eq!(inv["conditioned"], serde_json::json!(["A"]));
    assert_eq!(inv["conditioning"], serde_json::json!(["B"]));
    assert_eq!(check_names(&r), ["joint-symmetry", "double-inversion"]);
}

#[test]
fn unbiased_source_retrodiction() {
    let r = run_file("retrodict.json");
    // uniform prior over four qubit states: retrodictive POVM element is rho_x / 2
    let comps = output(&r, "retrodictive-povm")["components"].as_array().unwrap().clone();
    assert_eq!(comps.len(), 4);
    assert_real_matrix(&comps[0], &[&[0.5, 0.0], &[0.0, 0.0]], 1e-12);
    assert_real_matrix(&comps[2], &[&[0.25, 0.25], &[0.25, 0.25]], 1e-12);
    assert_real_matrix(&comps[3], &[&[0.25, -0.25], &[-0.25, 0.25]], 1e-12);
    // P(x, y) in (X, Y) order
    let joint = [0.25, 0.0, 0.0, 0.25, 0.125, 0.125, 0.125, 0.125];
    assert_close(&floats(&output(&r, "predictive-joint")["probs"]), &joint, 1e-12);
    assert_close(&floats(&output(&r, "retrodictive-joint")["probs"]), &joint, 1e-12);
    assert_eq!(r["passed"], true);
}

#[test]
fn steering_a_bell_pair() {
    let r = run_file("steer.json");
    assert_close(&floats(output(&r, "probabilities")), &[0.5, 0.5], 1e-12);
    let states = output(&r, "steered-states").as_array().unwrap();
    assert_eq!(states.len(), 2);
    assert_real_matrix(&states[0]["matrix"], &[&[1.0, 0.0], &[0.0, 0.0]], 1e-12);
    assert_real_matrix(&states[1]["matrix"], &[&[0.0, 0.0], &[0.0, 1.0]], 1e-12);
    // X on one half and Z on the other are uncorrelated
    for j in ["direct-joint", "rightward-joint", "leftward-joint"] {
        assert_close(&floats(&output(&r, j)["probs"]), &[0.25; 4], 1e-12);
    }
    assert_eq!(r["passed"], true);
}

#[test]
fn conditioning_on_a_measurement_outcome() {
    // sqrt(rho)|+><+|sqrt(rho) / (1/2) for rho = diag(3/4, 1/4)
    let r = run_file("condition.json");
    assert_close(&floats(output(&r, "probabilities")), &[0.5, 0.5], 1e-12);
    let off = 3f64.sqrt() / 4.0;
    assert_real_matrix(&output(&r, "posterior")["matrix"], &[&[0.75, off], &[off, 0.25]], 1e-12);
}

#[test]
fn conditioning_an_ensemble_on_its_label() {
    let r = run_file("condition-ensemble.json");
    let m = entries(&output(&r, "state")["matrix"]);
    let expected = [[(0.5, 0.0), (0.0, -0.5)], [(0.0, 0.5), (0.5, 0.0)]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((m[i][j].0 - expected[i][j].0).abs() < 1e-12);
            assert!((m[i][j].1 - expected[i][j].1).abs() < 1e-12);
        }
    }
}

#[test]
fn lueders_update_on_plus() {
    let r = run_file("instrument-update.json");
    assert_close(&floats(output(&r, "probabilities")), &[0.5, 0.5], 1e-12);
    assert_real_matrix(&output(&r, "nonselective")["matrix"], &[&[0.5, 0.0], &[0.0, 0.5]], 1e-12);
    assert_real_matrix(&output(&r, "conditioned-output")["matrix"], &[&[1.0, 0.0], &[0.0, 0.0]], 1e-12);
    // a pure input conditioned on any outcome stays itself
    assert_real_matrix(&output(&r, "retrodicted-input")["matrix"], &[&[0.5, 0.5], &[0.5, 0.5]], 1e-12);
    let id = output(&r, "information-disturbance");
    assert_eq!(id["informative"], true);
    assert_eq!(id["disturbing"], true);
}

#[test]
fn validate_lists_every_object() {
    let path = scenario("validate.json");
    let o = condstate(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["command"], "validate");
    let names: Vec<&str> = r["outputs"].as_array().unwrap().iter().map(|o| o["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["plus", "damping", "z", "lueders-z"]);
    assert_eq!(output(&r, "damping")["kind"], "channel");
    // the validate command ignores the declared task
    let born = scenario("propagate-born.json");
    let r = json(&condstate(&["validate", born.to_str().unwrap()]));
    assert_eq!(r["task"], "validate");
}

#[test]
fn every_worked_example_passes() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/scenarios");
    let mut files: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(files.len() >= 7);
    for f in files {
        let o = condstate(&["run", f.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}: {}", f.display(), String::from_utf8_lossy(&o.stderr));
        assert_eq!(json(&o)["passed"], true, "{}", f.display());
    }
}

#[test]
fn non_square_matrix_is_rejected_by_name() {
    let f = write_temp(
        r#"{"regions": [{"label": "A", "dim": 2}],
            "objects": [{"kind": "operator", "name": "lopsided", "regions": ["A"],
                         "matrix": [[1, 0, 0], [0, 0, 0]]}],
            "task": "validate"}"#,
    );
    let o = condstate(&["run", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("lopsided") && err.contains("not square"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn wrong_size_matrix_is_rejected_by_name() {
    let f = write_temp(
        r#"{"regions": [{"label": "A", "dim": 3}],
            "objects": [{"kind": "operator", "name": "small", "regions": ["A"],
                         "matrix": [[1, 0], [0, 0]]}],
            "task": "validate"}"#,
    );
    let o = condstate(&["run", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`small`"));
}

#[test]
fn syntax_errors_report_a_position() {
    let f = write_temp("{\"regions\": [\n  {\"label\": \"A\" \"dim\": 2}]}");
    let o = condstate(&["run", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2 column"), "{err}");
}

#[test]
fn unknown_fields_and_references_are_structural_errors() {
    let f = write_temp(
        r#"{"regions": [{"label": "A", "dim": 2}], "objects": [], "task": "validate", "colour": 1}"#,
    );
    assert_eq!(code(&condstate(&["run", f.path().to_str().unwrap()])), 1);
    let f = write_temp(
        r#"{"regions": [{"label": "A", "dim": 2}], "objects": [],
            "task": "propagate", "task_args": {"state": "ghost", "through": []}}"#,
    );
    let o = condstate(&["run", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ghost"));
}

#[test]
fn missing_file_exits_one() {
    assert_eq!(code(&condstate(&["run", "/nonexistent/scenario.json"])), 1);
}

#[test]
fn invalid_povm_is_a_validation_failure() {
    let f = write_temp(
        r#"{"regions": [{"label": "A", "dim": 2}, {"label": "Y", "dim": 2, "classical": true}],
            "objects": [{"kind": "povm", "name": "short", "regions": ["A"], "outcome": "Y",
                         "elements": [[[1, 0], [0, 0]], [[0, 0], [0, 0.5]]]}],
            "task": "validate"}"#,
    );
    let o = condstate(&["run", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`short`"));
}

#[test]
fn non_positive_state_is_a_validation_failure() {
    let f = write_temp(
        r#"{"regions": [{"label": "A", "dim": 2}, {"label": "Y", "dim": 2, "classical": true}],
            "objects": [
              {"kind": "operator", "name": "rho", "regions": ["A"], "matrix": [[1.25, 0], [0, -0.25]]},
              {"kind": "povm", "name": "z", "regions": ["A"], "outcome": "Y",
               "elements": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]}],
            "task": "propagate", "task_args": {"state": "rho", "through": "z"}}"#,
    );
    assert_eq!(code(&condstate(&["run", f.path().to_str().unwrap()])), 2);
}

#[test]
fn zero_probability_outcome_is_a_domain_error() {
    let f = write_temp(
        r#"{"regions": [{"label": "A", "dim": 2}, {"label": "Y", "dim": 2, "classical": true}],
            "objects": [
              {"kind": "operator", "name": "zero", "regions": ["A"], "matrix": [[1, 0], [0, 0]]},
              {"kind": "povm", "name": "z", "regions": ["A"], "outcome": "Y",
               "elements": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]}],
            "task": "condition", "task_args": {"state": "zero", "measurement": "z", "outcome": 1}}"#,
    );
    let o = condstate(&["run", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn reports_are_byte_identical() {
    for name in ["steer.json", "random-propagate.json"] {
        let path = scenario(name);
        let a = condstate(&["run", path.to_str().unwrap(), "--seed", "99"]);
        let b = condstate(&["run", path.to_str().unwrap(), "--seed", "99"]);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{name}");
    }
}

#[test]
fn seed_is_reported_and_changes_random_payloads() {
    let path = scenario("random-propagate.json");
    let a = json(&condstate(&["run", path.to_str().unwrap(), "--seed", "1"]));
    let b = json(&condstate(&["run", path.to_str().unwrap(), "--seed", "2"]));
    assert_eq!(a["seed"], 1);
    assert_eq!(a["generator"], "pcg32-xsh-rr-64/32");
    assert_ne!(output(&a, "output"), output(&b, "output"));
}

#[test]
fn seed_environment_variable_is_honoured() {
    let path = scenario("random-propagate.json");
    let flag = condstate(&["run", path.to_str().unwrap(), "--seed", "31337"]);
    let env = Command::new(BIN)
        .args(["run", path.to_str().unwrap()])
        .env("CONDSTATE_SEED", "31337")
        .output()
        .unwrap();
    assert_eq!(code(&env), 0);
    assert_eq!(flag.stdout, env.stdout);
    assert_eq!(json(&env)["seed"], 31337);
}

#[test]
fn tolerance_flag_overrides_equality_tolerance() {
    let path = scenario("steer.json");
    let r = json(&condstate(&["run", path.to_str().unwrap(), "--tol", "1e-3"]));
    assert_eq!(r["checks"][0]["threshold"], 1e-3);
    // too strict for the objects to be accepted at all
    assert_eq!(code(&condstate(&["run", path.to_str().unwrap(), "--tol", "1e-20"])), 2);
    let bad = condstate(&["run", path.to_str().unwrap(), "--tol=-1"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn verify_jamiolkowski_round_trips() {
    let o = condstate(&["verify", "--suite", "jamiolkowski", "--seed", "7", "--count", "50"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["seed"], 7);
    let suites = r["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    for c in suites[0]["checks"].as_array().unwrap() {
        assert_eq!(c["passed"], true);
        // 50 per dimension pair
        assert_eq!(c["instances"], 150);
    }
}

#[test]
fn verify_limitations() {
    let o = condstate(&["verify", "--suite", "limitations"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    let checks = r["suites"][0]["checks"].as_array().unwrap();
    let w = checks.iter().find(|c| c["name"] == "limitations.w-state-chain-rule-fails").unwrap();
    assert!(w["value"].as_f64().unwrap() > 1e-3);
    let closed = checks.iter().find(|c| c["name"] == "limitations.mixed-causal-closed-form").unwrap();
    assert!(closed["value"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn verify_classical() {
    let o = condstate(&["verify", "--suite", "classical"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["passed"], true);
}

#[test]
fn verify_is_reproducible() {
    let a = condstate(&["verify", "--suite", "steering", "--count", "10", "--seed", "5"]);
    let b = condstate(&["verify", "--suite", "steering", "--count", "10", "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn unknown_suite_lists_available() {
    let o = condstate(&["verify", "--suite", "nonsense"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("jamiolkowski"));
}

#[test]
fn demos_run() {
    for name in [
        "w-state",
        "mixed-causal",
        "unbiased-retrodiction",
        "steering-epr",
        "projection-vs-conditioning",
        "alt-conditionals",
    ] {
        let o = condstate(&["demo", name]);
        assert_eq!(code(&o), 0, "{name}");
        let r = json(&o);
        assert_eq!(r["demo"], name);
        assert!(!r["operators"].as_array().unwrap().is_empty(), "{name}");
    }
    let w = json(&condstate(&["demo", "w-state"]));
    assert_eq!(w["verdict"], "sides differ");
}

#[test]
fn unknown_demo_lists_available() {
    let o = condstate(&["demo", "teleportation"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    for name in ["w-state", "mixed-causal", "alt-conditionals"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&condstate(&["frobnicate"])), 1);
    assert_eq!(code(&condstate(&["verify", "--seed", "minus-one"])), 1);
    assert_eq!(code(&condstate(&["--help"])), 0);
}
