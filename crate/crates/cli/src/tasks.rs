//! Scenario tasks. Each one reads its named inputs, calls the library and
//! attaches the consistency checks that apply to its result.

use condstate::bayes::{bayes_invert, condition_on_classical, fuchs_posterior_states, retrodict, retrodict_through_channel};
use condstate::channel::{jamiolkowski_to_state, propagate};
use condstate::classical::ClassicalDistribution;
use condstate::conditional::{ConditionalState, JointState};
use condstate::hybrid::{HybridConditional, HybridKind};
use condstate::instrument::{instrument_nonselective, instrument_to_conditional, instrument_update, Instrument};
use condstate::spectral::{check_density, star, support_rank};
use condstate::steering::{epr_joints, steering_ensemble};
use condstate::update::{info_disturbance_check, update_rule_decompose, INFO_DISTURBANCE_THRESHOLD};
use condstate::{frob_distance, Operator, Tolerances};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::report::{self, CheckOut, Named, RunReport};
use crate::scenario::{Loaded, Object, TaskKind};

struct Ctx<'a> {
    l: &'a Loaded,
    task: &'static str,
    tol: Tolerances,
    outputs: Vec<Named>,
    checks: Vec<CheckOut>,
}

impl<'a> Ctx<'a> {
    fn require<T: Clone>(&self, field: &str, v: &Option<T>) -> CliResult<T> {
        v.clone().ok_or_else(|| CliError::Task {
            task: self.task,
            msg: format!("missing task_args.{field}"),
        })
    }

    fn wrong_kind(&self, name: &str, expected: &str, found: &Object) -> CliError {
        CliError::Task {
            task: self.task,
            msg: format!("`{name}` is a {} but {expected} is needed", found.kind()),
        }
    }

    /// An operator, or a distribution embedded as a diagonal operator.
    fn state(&self, name: &str) -> CliResult<Operator> {
        match self.l.get(name)? {
            Object::Operator(op) => Ok(op.clone()),
            Object::Distribution(d) => Ok(d.embed()),
            o => Err(self.wrong_kind(name, "a state", o)),
        }
    }

    fn distribution(&self, name: &str) -> CliResult<ClassicalDistribution> {
        match self.l.get(name)? {
            Object::Distribution(d) => Ok(d.clone()),
            Object::Operator(op) => Ok(ClassicalDistribution::extract(op, &self.tol)?),
            o => Err(self.wrong_kind(name, "a distribution", o)),
        }
    }

    /// Anything with a conditional-state form.
    fn conditional(&self, name: &str) -> CliResult<ConditionalState> {
        let tol = &self.tol;
        match self.l.get(name)? {
            Object::Conditional(c) => Ok(c.clone()),
            Object::Channel(ch) => Ok(jamiolkowski_to_state(ch, tol)?),
            Object::Povm(h) | Object::Ensemble(h) => Ok(h.conditional().clone()),
            Object::Instrument(ins) => Ok(instrument_to_conditional(ins, tol)?),
            o => Err(self.wrong_kind(name, "a conditional, channel, POVM, ensemble or instrument", o)),
        }
    }

    fn povm(&self, name: &str) -> CliResult<HybridConditional> {
        match self.l.get(name)? {
            Object::Povm(h) => Ok(h.clone()),
            o => Err(self.wrong_kind(name, "a POVM", o)),
        }
    }

    fn ensemble(&self, name: &str) -> CliResult<HybridConditional> {
        match self.l.get(name)? {
            Object::Ensemble(h) => Ok(h.clone()),
            o => Err(self.wrong_kind(name, "an ensemble", o)),
        }
    }

    fn instrument(&self, name: &str) -> CliResult<Instrument> {
        match self.l.get(name)? {
            Object::Instrument(i) => Ok(i.clone()),
            o => Err(self.wrong_kind(name, "an instrument", o)),
        }
    }

    fn out(&mut self, name: impl Into<String>, value: Value) {
        self.outputs.push(Named { name: name.into(), value });
    }

    fn at_most(&mut self, name: &str, value: f64) {
        let t = self.tol.eq_tol;
        self.checks.push(CheckOut::at_most(name, value, t));
    }

    fn density_check(&mut self, name: &str, op: &Operator) {
        let t = self.tol.eq_tol;
        self.checks.push(match check_density(op, &self.tol) {
            Ok(()) => CheckOut::at_most(name, 0.0, t),
            Err(e) => CheckOut::failed(name, t, e.to_string()),
        });
    }
}

/// Fully classical operators are reported as distributions.
fn state_value(op: &Operator) -> Value {
    if op.regions().iter().all(|r| r.classical) {
        let probs: Vec<f64> = (0..op.side()).map(|i| op.matrix()[(i, i)].re).collect();
        report::distribution(op.regions(), &probs)
    } else {
        report::operator(op)
    }
}

fn optional_states(states: &[Option<Operator>]) -> Value {
    Value::Array(states.iter().map(|s| s.as_ref().map_or(Value::Null, report::operator)).collect())
}

pub fn run(l: &Loaded, command: &'static str, task: TaskKind) -> CliResult<RunReport> {
    let mut cx = Ctx {
        l,
        task: task.as_str(),
        tol: l.tol,
        outputs: Vec::new(),
        checks: Vec::new(),
    };
    match task {
        TaskKind::Validate => validate(&mut cx)?,
        TaskKind::Propagate => propagate_task(&mut cx)?,
        TaskKind::BayesInvert => bayes_task(&mut cx)?,
        TaskKind::Retrodict => retrodict_task(&mut cx)?,
        TaskKind::Steer => steer_task(&mut cx)?,
        TaskKind::Condition => condition_task(&mut cx)?,
        TaskKind::InstrumentUpdate => instrument_task(&mut cx)?,
    }
    Ok(RunReport::new(command, cx.task, l.seed, cx.outputs, cx.checks))
}

fn validate(cx: &mut Ctx) -> CliResult<()> {
    for (name, obj) in &cx.l.objects {
        let regions = match obj {
            Object::Operator(op) => op.regions().to_vec(),
            Object::Povm(h) | Object::Ensemble(h) => h.op().regions().to_vec(),
            Object::Channel(ch) => vec![ch.input().clone(), ch.output().clone()],
            Object::Instrument(i) => vec![i.input().clone(), i.output().clone(), i.outcome().clone()],
            Object::Distribution(d) => d.regions().to_vec(),
            Object::Conditional(c) => c.op().regions().to_vec(),
        };
        let mut v = json!({"kind": obj.kind(), "regions": report::regions(&regions)});
        if let Object::Operator(op) = obj {
            v["density"] = json!(check_density(op, &cx.tol).is_ok());
        }
        cx.out(name.clone(), v);
        cx.checks.push(CheckOut::at_most(format!("{name}.valid"), 0.0, 0.0));
    }
    Ok(())
}

fn propagate_task(cx: &mut Ctx) -> CliResult<()> {
    let a = &cx.l.args;
    let state = cx.require("state", &a.state)?;
    let through = cx.require("through", &a.through)?.names();
    if through.is_empty() {
        return Err(CliError::Task {
            task: cx.task,
            msg: "task_args.through is empty".into(),
        });
    }
    let mut rho = cx.state(&state)?;
    let last = through.len() - 1;
    for (k, name) in through.iter().enumerate() {
        let c = cx.conditional(name)?;
        rho = propagate(&rho, &c, &cx.tol)?.hermitian_part();
        if k < last {
            cx.out(format!("after {name}"), state_value(&rho));
        }
    }
    cx.out("output", state_value(&rho));
    cx.density_check("output-is-density", &rho);
    Ok(())
}

fn full_rank(op: &Operator, tol: &Tolerances) -> CliResult<bool> {
    Ok(support_rank(op, tol)? == op.side())
}

fn bayes_task(cx: &mut Ctx) -> CliResult<()> {
    let a = &cx.l.args;
    let c = cx.conditional(&cx.require("conditional", &a.conditional)?)?;
    let prior = cx.state(&cx.require("prior", &a.prior)?)?;
    let tol = cx.tol;
    let inv = bayes_invert(&c, &prior, &tol)?;
    let rho_b = propagate(&prior, &c, &tol)?.hermitian_part();
    cx.out("inverse", report::conditional(&inv));
    cx.out("marginal", state_value(&rho_b));

    let forward = star(c.op(), &prior, &tol)?;
    let backward = star(inv.op(), &rho_b, &tol)?;
    cx.at_most("joint-symmetry", frob_distance(&forward, &backward));
    if full_rank(&prior, &tol)? && full_rank(&rho_b, &tol)? {
        let back = bayes_invert(&inv, &rho_b, &tol)?;
        cx.at_most("double-inversion", frob_distance(back.op(), c.op()));
    }
    Ok(())
}

fn retrodict_task(cx: &mut Ctx) -> CliResult<()> {
    let a = &cx.l.args;
    let prior = cx.distribution(&cx.require("prior", &a.prior)?)?;
    let ens = cx.ensemble(&cx.require("ensemble", &a.ensemble)?)?;
    let povm = cx.povm(&cx.require("measurement", &a.measurement)?)?;
    let tol = cx.tol;
    let (pred, retro) = match &a.channel {
        Some(ch) => {
            let ch = cx.conditional(ch)?;
            retrodict_through_channel(&prior, &ens, &ch, &povm, &tol)?
        }
        None => {
            let r = retrodict(&prior, &ens, &povm, &tol)?;
            cx.out("input-state", state_value(&r.rho_a));
            cx.out("outcome-distribution", state_value(&r.rho_y));
            cx.out("retrodicted-states", report::hybrid(&r.retro_states));
            cx.out("retrodictive-povm", report::hybrid(&r.retro_povm));
            (r.predictive_joint, r.retrodictive_joint)
        }
    };
    cx.out("predictive-joint", state_value(&pred));
    cx.out("retrodictive-joint", state_value(&retro));
    cx.at_most("predictive-equals-retrodictive", frob_distance(&pred, &retro));
    Ok(())
}

fn steer_task(cx: &mut Ctx) -> CliResult<()> {
    let a = &cx.l.args;
    let op = cx.state(&cx.require("state", &a.state)?)?;
    let povm_b = cx.povm(&cx.require("measurement", &a.measurement)?)?;
    let tol = cx.tol;
    let joint = JointState::acausal(op, &tol)?;
    let s = steering_ensemble(&joint, &povm_b, &tol)?;
    cx.out("probabilities", report::numbers(&s.probabilities));
    cx.out("steered-states", optional_states(&s.states));
    cx.out("steered-conditional", report::hybrid(&s.steered));
    cx.out("effective-povm", report::hybrid(&s.effective_povm));
    cx.at_most("route-agreement", s.route_discrepancy);
    cx.at_most("no-signalling", s.no_signalling_defect);
    if let Some(other) = &a.other_measurement {
        let povm_a = cx.povm(other)?;
        let e = epr_joints(&joint, &povm_a, &povm_b, &tol)?;
        cx.out("direct-joint", state_value(&e.direct));
        cx.out("rightward-joint", state_value(&e.rightward));
        cx.out("leftward-joint", state_value(&e.leftward));
        cx.at_most("epr-joint-agreement", e.max_discrepancy());
    }
    Ok(())
}

fn condition_task(cx: &mut Ctx) -> CliResult<()> {
    let a = &cx.l.args;
    let tol = cx.tol;
    if let Some(ens) = &a.ensemble {
        let ens = cx.ensemble(ens)?;
        let x = cx.require("value", &a.value)?;
        let rho = condition_on_classical(&ens, x, &tol)?;
        cx.out("state", state_value(&rho));
        cx.density_check("state-is-density", &rho);
        return Ok(());
    }
    let rho = cx.state(&cx.require("state", &a.state)?)?;
    let povm = cx.povm(&cx.require("measurement", &a.measurement)?)?;
    if povm.kind() != HybridKind::Povm {
        return Err(CliError::Task {
            task: cx.task,
            msg: "measurement must be a POVM".into(),
        });
    }
    let post = fuchs_posterior_states(&povm, &rho, &tol)?;
    cx.out("probabilities", report::numbers(&post.probabilities));
    cx.out("posterior-states", optional_states(&post.states));
    if let Some(y) = a.outcome {
        let s = post
            .states
            .get(y)
            .ok_or_else(|| CliError::Task {
                task: cx.task,
                msg: format!("outcome {y} out of range ({} outcomes)", post.states.len()),
            })?
            .clone()
            .ok_or(condstate::Error::ZeroProbability(y))?;
        cx.out("posterior", report::operator(&s));
    }
    let mut avg = Operator::zeros(rho.regions())?;
    for (p, s) in post.probabilities.iter().zip(&post.states) {
        if let Some(s) = s {
            avg = avg.add(&s.scaled(*p))?;
        }
    }
    cx.at_most("posterior-average", frob_distance(&avg, &rho));
    Ok(())
}

fn instrument_task(cx: &mut Ctx) -> CliResult<()> {
    let a = &cx.l.args;
    let ins = cx.instrument(&cx.require("instrument", &a.instrument)?)?;
    let rho = cx.state(&cx.require("state", &a.state)?)?;
    let tol = cx.tol;
    let hs = instrument_update(&ins, &rho, &tol)?;
    let probs = hs.probabilities();
    let states: Vec<Option<Operator>> = (0..hs.blocks.len())
        .map(|y| hs.conditional_state(y, &tol).ok())
        .collect();
    cx.out("probabilities", report::numbers(&probs));
    cx.out("post-measurement-states", optional_states(&states));
    cx.out("joint", report::operator(&hs.to_operator()?));
    let nonselective = propagate(&rho, &instrument_nonselective(&ins, &tol)?, &tol)?;
    cx.out("nonselective", report::operator(&nonselective));
    let mut sum = Operator::zeros(nonselective.regions())?;
    for b in &hs.blocks {
        sum = sum.add(b)?;
    }
    cx.at_most("blocks-sum-to-nonselective", frob_distance(&sum, &nonselective));

    if let Some(y) = a.outcome {
        let d = update_rule_decompose(&ins, &rho, y, &tol)?;
        cx.out("outcome-probability", report::number(d.probability));
        cx.out("conditioned-output", report::operator(&d.conditioned));
        cx.out("retrodicted-input", report::operator(&d.retrodictive));
        cx.at_most("factorization", d.factorization_defect);
    }
    if ins.input().dim == ins.output().dim {
        let id = info_disturbance_check(&ins, INFO_DISTURBANCE_THRESHOLD, &tol)?;
        cx.out(
            "information-disturbance",
            json!({
                "informative": id.informative,
                "disturbing": id.disturbing,
                "informativeness": report::number(id.informativeness),
                "disturbance": report::number(id.disturbance),
            }),
        );
        let violated = id.informative && !id.disturbing;
        cx.checks.push(CheckOut::at_most(
            "information-implies-disturbance",
            if violated { 1.0 } else { 0.0 },
            0.0,
        ));
    }
    Ok(())
}
