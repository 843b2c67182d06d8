//! JSON reports. Field order is fixed by the struct definitions and all
//! collections are vectors, so identical inputs serialize to identical bytes.

use condstate::conditional::{ConditionalState, Flavor};
use condstate::demos::Demo;
use condstate::hybrid::HybridConditional;
use condstate::random::GENERATOR;
use condstate::verify::{Bound, Check, SuiteReport};
use condstate::{Matrix, Operator, Region, C64};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Serialize)]
pub struct Named {
    pub name: String,
    pub value: Value,
}

#[derive(Debug, Serialize)]
pub struct CheckOut {
    pub name: String,
    pub passed: bool,
    /// `null` when the measured value is not finite.
    pub value: Option<f64>,
    pub threshold: f64,
    pub bound: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckOut {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        CheckOut {
            name: name.into(),
            passed: value <= threshold,
            value: finite(value),
            threshold,
            bound: "at-most",
            instances: None,
            error: None,
        }
    }

    pub fn failed(name: impl Into<String>, threshold: f64, error: String) -> Self {
        CheckOut {
            name: name.into(),
            passed: false,
            value: None,
            threshold,
            bound: "at-most",
            instances: None,
            error: Some(error),
        }
    }
}

impl From<&Check> for CheckOut {
    fn from(c: &Check) -> Self {
        CheckOut {
            name: c.name.clone(),
            passed: c.passed,
            value: finite(c.value),
            threshold: c.threshold,
            bound: match c.bound {
                Bound::AtMost => "at-most",
                Bound::Above => "above",
            },
            instances: Some(c.instances),
            error: c.error.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub task: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<&'static str>,
    pub outputs: Vec<Named>,
    pub checks: Vec<CheckOut>,
    pub passed: bool,
}

impl RunReport {
    pub fn new(command: &'static str, task: &'static str, seed: Option<u64>, outputs: Vec<Named>, checks: Vec<CheckOut>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        RunReport {
            command,
            task,
            seed,
            generator: seed.map(|_| GENERATOR),
            outputs,
            checks,
            passed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SuiteOut {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: Vec<CheckOut>,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub seed: u64,
    pub generator: &'static str,
    pub suites: Vec<SuiteOut>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn new(seed: u64, suites: &[SuiteReport]) -> Self {
        let suites: Vec<SuiteOut> = suites
            .iter()
            .map(|s| SuiteOut {
                suite: s.suite,
                passed: s.passed(),
                checks: s.checks.iter().map(CheckOut::from).collect(),
            })
            .collect();
        VerifyReport {
            command: "verify",
            seed,
            generator: GENERATOR,
            passed: suites.iter().all(|s| s.passed),
            suites,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DemoReport {
    pub command: &'static str,
    pub demo: &'static str,
    pub summary: &'static str,
    pub operators: Vec<Named>,
    pub values: Vec<Named>,
    pub verdict: String,
    pub passed: bool,
}

impl From<&Demo> for DemoReport {
    fn from(d: &Demo) -> Self {
        DemoReport {
            command: "demo",
            demo: d.name,
            summary: d.summary,
            operators: d
                .operators
                .iter()
                .map(|(n, op)| Named {
                    name: n.clone(),
                    value: operator(op),
                })
                .collect(),
            values: d
                .values
                .iter()
                .map(|(n, v)| Named {
                    name: n.clone(),
                    value: number(*v),
                })
                .collect(),
            verdict: d.verdict.clone(),
            passed: d.passed,
        }
    }
}

pub fn to_json<T: Serialize>(r: &T) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("reports contain only serializable data");
    s.push('\n');
    s
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(clean(x))
}

/// Maps `-0.0` to `0.0` so that sign-of-zero noise does not show up in reports.
fn clean(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

pub fn number(x: f64) -> Value {
    finite(x).map_or(Value::Null, Value::from)
}

pub fn complex(z: C64) -> Value {
    json!([number(z.re), number(z.im)])
}

pub fn matrix(m: &Matrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn regions(rs: &[Region]) -> Value {
    Value::Array(
        rs.iter()
            .map(|r| json!({"label": r.label, "dim": r.dim, "classical": r.classical}))
            .collect(),
    )
}

pub fn operator(op: &Operator) -> Value {
    json!({"regions": regions(op.regions()), "matrix": matrix(op.matrix())})
}

pub fn conditional(c: &ConditionalState) -> Value {
    let flavor = match c.flavor() {
        Flavor::Acausal => "acausal",
        Flavor::Causal => "causal",
    };
    let mut v = operator(c.op());
    let o = v.as_object_mut().expect("operator encodes as an object");
    o.insert("conditioned".into(), json!(c.conditioned_labels()));
    o.insert("conditioning".into(), json!(c.conditioning_labels()));
    o.insert("flavor".into(), json!(flavor));
    if let Some(s) = c.support() {
        o.insert("support_residual".into(), number(s.residual));
    }
    v
}

/// Conditional plus its per-value components.
pub fn hybrid(h: &HybridConditional) -> Value {
    let mut v = conditional(h.conditional());
    let o = v.as_object_mut().expect("conditional encodes as an object");
    o.insert(
        "components".into(),
        Value::Array(h.components().iter().map(|c| matrix(c.matrix())).collect()),
    );
    v
}

pub fn distribution(rs: &[Region], probs: &[f64]) -> Value {
    json!({"regions": regions(rs), "probs": probs.iter().map(|p| number(*p)).collect::<Vec<_>>()})
}

pub fn numbers(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| number(*x)).collect())
}
