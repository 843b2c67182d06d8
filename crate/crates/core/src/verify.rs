//! Seeded property sweeps. Each suite draws its random instances from
//! [`crate::random`] and reports one [`Check`] per property, carrying the
//! worst value seen over all instances.

use nalgebra::DMatrix;
use rand::RngExt;

use crate::alternative::{alt_conditional, alt_conditional_support_restricted, AltOrder};
use crate::bayes::{barnum_knill_map, bayes_invert, pretty_good_measurement, retrodict, retrodict_through_channel};
use crate::channel::{
    apply_map, compose_conditionals, dual_apply, jamiolkowski_to_map, jamiolkowski_to_state,
    propagate, KrausChannel, MatrixMap,
};
use crate::classical::{ClassicalConditionalTable, ClassicalDistribution};
use crate::conditional::{conditional_from_joint, joint_from_conditional, Flavor, JointState};
use crate::error::{Error, Result};
use crate::hybrid::HybridConditional;
use crate::instrument::Instrument;
use crate::limitations::{mixed_causal_demo, w_state_demo};
use crate::random::{self, instance_seed, SeededRng};
use crate::region::{frob_distance, padded_mul, Matrix, Operator, Region, C64};
use crate::spectral::{support_projector, Tolerances};
use crate::steering::{epr_joints, steering_ensemble};
use crate::update::{info_disturbance_check, INFO_DISTURBANCE_THRESHOLD};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// Passes when the value is at most the threshold.
    AtMost,
    /// Passes when the value is strictly above the threshold.
    Above,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub bound: Bound,
    pub instances: usize,
    /// First error raised by an instance, if any. Such an instance counts as
    /// a failure with an infinite value.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub const SUITES: [&str; 10] = [
    "jamiolkowski",
    "causal-neutrality",
    "steering",
    "classical",
    "info-disturbance",
    "barnum-knill",
    "pgm",
    "duality",
    "alt-conditionals",
    "limitations",
];

pub const DEFAULT_SEED: u64 = 20_110_713;

/// Instance count used when none is given (per dimension pair for
/// `jamiolkowski`).
pub fn default_count(suite: &str) -> usize {
    match suite {
        "jamiolkowski" | "barnum-knill" | "pgm" | "alt-conditionals" => 50,
        "causal-neutrality" | "steering" => 100,
        "info-disturbance" => 500,
        "duality" => 200,
        _ => 1,
    }
}

/// Worst-case accumulator for one property.
struct Acc {
    name: &'static str,
    threshold: f64,
    bound: Bound,
    value: f64,
    instances: usize,
    error: Option<String>,
}

impl Acc {
    fn at_most(name: &'static str, threshold: f64) -> Self {
        Acc {
            name,
            threshold,
            bound: Bound::AtMost,
            value: 0.0,
            instances: 0,
            error: None,
        }
    }

    fn above(name: &'static str, threshold: f64) -> Self {
        Acc {
            name,
            threshold,
            bound: Bound::Above,
            value: f64::INFINITY,
            instances: 0,
            error: None,
        }
    }

    fn record(&mut self, v: Result<f64>) {
        self.instances += 1;
        match v {
            Ok(x) => match self.bound {
                Bound::AtMost => self.value = self.value.max(if x.is_nan() { f64::INFINITY } else { x }),
                Bound::Above => self.value = self.value.min(if x.is_nan() { f64::NEG_INFINITY } else { x }),
            },
            Err(e) => {
                self.value = match self.bound {
                    Bound::AtMost => f64::INFINITY,
                    Bound::Above => f64::NEG_INFINITY,
                };
                self.error.get_or_insert_with(|| e.to_string());
            }
        }
    }

    fn finish(self) -> Check {
        let passed = self.error.is_none()
            && self.instances > 0
            && match self.bound {
                Bound::AtMost => self.value <= self.threshold,
                Bound::Above => self.value > self.threshold,
            };
        Check {
            name: self.name.to_string(),
            passed,
            value: self.value,
            threshold: self.threshold,
            bound: self.bound,
            instances: self.instances,
            error: self.error,
        }
    }
}

/// Runs the named suites (all of them when `filter` is `None`).
pub fn verify(
    filter: Option<&str>,
    seed: u64,
    count: Option<usize>,
    tol: &Tolerances,
) -> Result<Vec<SuiteReport>> {
    let names: Vec<&'static str> = match filter {
        None => SUITES.to_vec(),
        Some(f) => match SUITES.iter().find(|s| **s == f) {
            Some(s) => vec![*s],
            None => {
                return Err(Error::Domain(format!(
                    "unknown suite `{f}`; available: {}",
                    SUITES.join(", ")
                )))
            }
        },
    };
    Ok(names
        .into_iter()
        .map(|s| run_suite(s, seed, count.unwrap_or_else(|| default_count(s)), tol))
        .collect())
}

pub fn run_suite(suite: &'static str, seed: u64, count: usize, tol: &Tolerances) -> SuiteReport {
    let checks = match suite {
        "jamiolkowski" => jamiolkowski_suite(seed, count, tol),
        "causal-neutrality" => causal_neutrality_suite(seed, count, tol),
        "steering" => steering_suite(seed, count, tol),
        "classical" => classical_suite(tol),
        "info-disturbance" => info_disturbance_suite(seed, count, tol),
        "barnum-knill" => barnum_knill_suite(seed, count, tol),
        "pgm" => pgm_suite(seed, count, tol),
        "duality" => duality_suite(seed, count, tol),
        "alt-conditionals" => alt_suite(seed, count, tol),
        "limitations" => limitations_suite(tol),
        _ => Vec::new(),
    };
    SuiteReport { suite, seed, checks }
}

fn dim(rng: &mut SeededRng) -> usize {
    rng.random_range(2..=3)
}

fn channel(a: Region, b: Region, rng: &mut SeededRng, tol: &Tolerances) -> Result<KrausChannel> {
    let n = rng.random_range(1..=3);
    let ks = random::kraus(a.dim, b.dim, n, rng);
    KrausChannel::new(a, b, ks, tol)
}

/// Density operator whose rank is drawn uniformly from `1..=d`.
fn state_any_rank(region: &Region, rng: &mut SeededRng) -> Operator {
    let rank = rng.random_range(1..=region.dim);
    Operator::new(vec![region.clone()], random::density_matrix(region.dim, rank, rng))
        .expect("square by construction")
}

fn full_rank_state(regions: &[Region], rng: &mut SeededRng) -> Operator {
    random::density(regions, rng)
}

fn povm(region: &Region, outcome: &str, rng: &mut SeededRng, tol: &Tolerances) -> Result<HybridConditional> {
    let n = rng.random_range(2..=3);
    let els = random::povm(region, n, rng);
    HybridConditional::from_povm(&els, &Region::classical(outcome, n), tol)
}

fn ensemble(
    region: &Region,
    value: &str,
    members: usize,
    rng: &mut SeededRng,
    tol: &Tolerances,
) -> Result<(HybridConditional, ClassicalDistribution)> {
    let states: Vec<Operator> = (0..members).map(|_| state_any_rank(region, rng)).collect();
    let x = Region::classical(value, members);
    let ens = HybridConditional::from_ensemble(&states, &x, tol)?;
    let prior = ClassicalDistribution::new(&[x], random::probabilities(members, rng), tol)?;
    Ok((ens, prior))
}

fn trace_real(m: &Operator) -> f64 {
    m.trace().re
}

fn jamiolkowski_suite(seed: u64, count: usize, tol: &Tolerances) -> Vec<Check> {
    let mut round = Acc::at_most("jamiolkowski.state-map-state", 1e-10);
    let mut action = Acc::at_most("jamiolkowski.map-state-map", 1e-10);
    // `count` channels for each dimension pair
    let shapes = [(2, 2), (2, 3), (3, 2)];
    for i in 0..(count * shapes.len()) as u64 {
        let mut rng = random::rng(instance_seed(seed, i));
        let (din, dout) = shapes[i as usize / count];
        let (a, b) = (Region::new("A", din), Region::new("B", dout));
        let r: Result<(f64, f64)> = (|| {
            let ch = channel(a.clone(), b.clone(), &mut rng, tol)?;
            let s = jamiolkowski_to_state(&ch, tol)?;
            let m = jamiolkowski_to_map(&s);
            let rebuilt = MatrixMap::from_action(&a, std::slice::from_ref(&b), Flavor::Causal, |x| {
                apply_map(&m, x)
            })?;
            let e1 = frob_distance(rebuilt.op(), s.op());
            let rho = state_any_rank(&a, &mut rng);
            let e2 = frob_distance(&apply_map(&m, &rho)?, &ch.apply(&rho)?);
            Ok((e1, e2))
        })();
        split_record(r, &mut round, &mut action);
    }
    vec![round.finish(), action.finish()]
}

fn causal_neutrality_suite(seed: u64, count: usize, tol: &Tolerances) -> Vec<Check> {
    let mut direct = Acc::at_most("retrodiction.predictive-equals-retrodictive", 1e-8);
    let mut through = Acc::at_most("retrodiction.through-channel", 1e-8);
    for i in 0..count as u64 {
        let mut rng = random::rng(instance_seed(seed, i));
        let a = Region::new("A", dim(&mut rng));
        let b = Region::new("B", dim(&mut rng));
        let nx = dim(&mut rng);
        let r: Result<(f64, f64)> = (|| {
            let (ens, prior) = ensemble(&a, "X", nx, &mut rng, tol)?;
            let povm_a = povm(&a, "Y", &mut rng, tol)?;
            let r = retrodict(&prior, &ens, &povm_a, tol)?;
            let e1 = frob_distance(&r.predictive_joint, &r.retrodictive_joint);
            let ch = jamiolkowski_to_state(&channel(a.clone(), b.clone(), &mut rng, tol)?, tol)?;
            let povm_b = povm(&b, "Y", &mut rng, tol)?;
            let (p, q) = retrodict_through_channel(&prior, &ens, &ch, &povm_b, tol)?;
            Ok((e1, frob_distance(&p, &q)))
        })();
        split_record(r, &mut direct, &mut through);
    }
    vec![direct.finish(), through.finish()]
}

fn split_record(r: Result<(f64, f64)>, x: &mut Acc, y: &mut Acc) {
    match r {
        Ok((a, b)) => {
            x.record(Ok(a));
            y.record(Ok(b));
        }
        Err(e) => {
            y.record(Err(Error::Domain(e.to_string())));
            x.record(Err(e));
        }
    }
}

fn steering_suite(seed: u64, count: usize, tol: &Tolerances) -> Vec<Check> {
    let mut routes = Acc::at_most("steering.rightward-leftward-direct", 1e-8);
    let mut avg = Acc::at_most("steering.ensemble-average", 1e-10);
    let mut bayes_routes = Acc::at_most("steering.bayes-propagate-order", 1e-8);
    for i in 0..count as u64 {
        let mut rng = random::rng(instance_seed(seed, i));
        let a = Region::new("A", dim(&mut rng));
        let b = Region::new("B", dim(&mut rng));
        let r: Result<(f64, f64, f64)> = (|| {
            let rho = full_rank_state(&[a.clone(), b.clone()], &mut rng);
            let joint = JointState::acausal(rho, tol)?;
            let pa = povm(&a, "X", &mut rng, tol)?;
            let pb = povm(&b, "Y", &mut rng, tol)?;
            let e = epr_joints(&joint, &pa, &pb, tol)?;
            let s = steering_ensemble(&joint, &pb, tol)?;
            Ok((e.max_discrepancy(), s.no_signalling_defect, s.route_discrepancy))
        })();
        match r {
            Ok((x, y, z)) => {
                routes.record(Ok(x));
                avg.record(Ok(y));
                bayes_routes.record(Ok(z));
            }
            Err(e) => {
                let m = e.to_string();
                routes.record(Err(e));
                avg.record(Err(Error::Domain(m.clone())));
                bayes_routes.record(Err(Error::Domain(m)));
            }
        }
    }
    vec![routes.finish(), avg.finish(), bayes_routes.finish()]
}

/// Every 3-entry probability vector with entries in `{0, ¼, ½, ¾, 1}`.
pub fn quarter_columns() -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for i in 0..=4u32 {
        for j in 0..=(4 - i) {
            let k = 4 - i - j;
            out.push([i as f64 / 4.0, j as f64 / 4.0, k as f64 / 4.0]);
        }
    }
    out
}

/// All 3×3 column-stochastic tables with quarter-dyadic entries (3375).
pub fn quarter_tables() -> Vec<DMatrix<f64>> {
    let cols = quarter_columns();
    let mut out = Vec::with_capacity(cols.len().pow(3));
    for c0 in &cols {
        for c1 in &cols {
            for c2 in &cols {
                out.push(DMatrix::from_fn(3, 3, |s, r| [c0, c1, c2][r][s]));
            }
        }
    }
    out
}

fn diag_of(op: &Operator, order: &[&str]) -> Result<Vec<f64>> {
    let m = op.matrix_in_order(order)?;
    Ok((0..m.nrows()).map(|k| m[(k, k)].re).collect())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn table_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    max_abs_diff(a.as_slice(), b.as_slice())
}

fn classical_suite(tol: &Tolerances) -> Vec<Check> {
    let mut prop = Acc::at_most("classical.propagation", 1e-12);
    let mut bayes = Acc::at_most("classical.bayes", 1e-12);
    let mut joint = Acc::at_most("classical.joint-and-conditional", 1e-12);
    let mut compose = Acc::at_most("classical.composition", 1e-12);
    let mut alt = Acc::at_most("classical.alternative-conditionals", 1e-12);
    let mut pgm = Acc::at_most("classical.pretty-good-measurement", 1e-12);
    let mut retro = Acc::at_most("classical.retrodiction", 1e-12);

    let (r, s) = (Region::classical("R", 3), Region::classical("S", 3));
    let u = Region::classical("U", 3);
    let later = DMatrix::from_row_slice(3, 3, &[0.5, 0.25, 0.0, 0.25, 0.5, 0.25, 0.25, 0.25, 0.75]);
    let later = ClassicalConditionalTable::new(std::slice::from_ref(&u), std::slice::from_ref(&s), later, tol)
        .expect("stochastic");
    let later_c = later.embed(tol).expect("valid");
    let priors = [[0.25, 0.25, 0.5], [0.5, 0.5, 0.0]];
    for t in quarter_tables() {
        let table = ClassicalConditionalTable::new(std::slice::from_ref(&s), std::slice::from_ref(&r), t.clone(), tol)
            .expect("stochastic");
        for p in &priors {
            let r_ = (|| -> Result<[f64; 7]> {
                let c = table.embed(tol)?;
                let prior = ClassicalDistribution::new(std::slice::from_ref(&r), p.to_vec(), tol)?;
                let rho_r = prior.embed();
                let out = [
                    max_abs_diff(&diag_of(&propagate(&rho_r, &c, tol)?, &["S"])?, &table.propagate(p)),
                    table_diff(
                        ClassicalConditionalTable::extract(&bayes_invert(&c, &rho_r, tol)?, tol)?.table(),
                        &table.invert(p),
                    ),
                    {
                        let j = joint_from_conditional(&c, &rho_r, tol)?;
                        let want: Vec<f64> = (0..9).map(|k| p[k / 3] * t[(k % 3, k / 3)]).collect();
                        let e1 = max_abs_diff(&diag_of(j.op(), &["R", "S"])?, &want);
                        let back = conditional_from_joint(&j, &["R"], tol)?;
                        let masked = DMatrix::from_fn(3, 3, |i, k| if p[k] > 0.0 { t[(i, k)] } else { 0.0 });
                        e1.max(table_diff(ClassicalConditionalTable::extract(&back, tol)?.table(), &masked))
                    },
                    table_diff(
                        ClassicalConditionalTable::extract(&compose_conditionals(&later_c, &c, tol)?, tol)?.table(),
                        &later.compose(&t),
                    ),
                    {
                        let j = joint_from_conditional(&c, &rho_r, tol)?.op().clone();
                        let masked: Vec<f64> = (0..9)
                            .map(|k| if p[k / 3] > 0.0 { t[(k % 3, k / 3)] } else { 0.0 })
                            .collect();
                        let mut e = 0.0f64;
                        for n in [1, 2, 3] {
                            let a = alt_conditional(&j, &["R"], AltOrder::Finite(n), tol)?;
                            e = e.max(max_abs_diff(&diag_of(&a.op, &["R", "S"])?, &masked));
                        }
                        let a = alt_conditional_support_restricted(&j, &["R"], tol)?;
                        // The support-restricted limit vanishes wherever the joint does.
                        let on_joint: Vec<f64> = (0..9)
                            .map(|k| if p[k / 3] * t[(k % 3, k / 3)] > 0.0 { 1.0 } else { 0.0 })
                            .zip(&masked)
                            .map(|(m, v)| m * v)
                            .collect();
                        e.max(max_abs_diff(&diag_of(&a.op, &["R", "S"])?, &on_joint))
                    },
                    {
                        let q = Region::new("Q", 3);
                        let states: Vec<Operator> = (0..3)
                            .map(|k| Operator::from_diagonal(std::slice::from_ref(&q), &[t[(0, k)], t[(1, k)], t[(2, k)]]))
                            .collect::<Result<_>>()?;
                        let ens = HybridConditional::from_ensemble(&states, &r, tol)?;
                        let pg = pretty_good_measurement(&ens, &prior, tol)?;
                        let inv = table.invert(p);
                        let mut e = 0.0f64;
                        for (k, comp) in pg.components().iter().enumerate() {
                            let want: Vec<f64> = (0..3).map(|sv| inv[(k, sv)]).collect();
                            e = e.max(max_abs_diff(&diag_of(comp, &["Q"])?, &want));
                        }
                        e
                    },
                    {
                        let q = Region::new("Q", 3);
                        let states: Vec<Operator> = (0..3)
                            .map(|k| Operator::from_diagonal(std::slice::from_ref(&q), &[t[(0, k)], t[(1, k)], t[(2, k)]]))
                            .collect::<Result<_>>()?;
                        let ens = HybridConditional::from_ensemble(&states, &r, tol)?;
                        let effects: Vec<Operator> = (0..3)
                            .map(|y| {
                                Operator::from_diagonal(
                                    std::slice::from_ref(&q),
                                    &[later.table()[(y, 0)], later.table()[(y, 1)], later.table()[(y, 2)]],
                                )
                            })
                            .collect::<Result<_>>()?;
                        let m = HybridConditional::from_povm(&effects, &Region::classical("Y", 3), tol)?;
                        let rr = retrodict(&prior, &ens, &m, tol)?;
                        let py = later.compose(&t);
                        let want: Vec<f64> = (0..9).map(|k| p[k / 3] * py[(k % 3, k / 3)]).collect();
                        max_abs_diff(&diag_of(&rr.predictive_joint, &["R", "Y"])?, &want)
                            .max(max_abs_diff(&diag_of(&rr.retrodictive_joint, &["R", "Y"])?, &want))
                    },
                ];
                Ok(out)
            })();
            let accs = [&mut prop, &mut bayes, &mut joint, &mut compose, &mut alt, &mut pgm, &mut retro];
            match r_ {
                Ok(v) => {
                    for (acc, x) in accs.into_iter().zip(v) {
                        acc.record(Ok(x));
                    }
                }
                Err(e) => {
                    for acc in accs {
                        acc.record(Err(Error::Domain(e.to_string())));
                    }
                }
            }
        }
    }
    vec![
        prop.finish(),
        bayes.finish(),
        joint.finish(),
        compose.finish(),
        alt.finish(),
        pgm.finish(),
        retro.finish(),
    ]
}

/// Qubit instruments drawn from five families: generic random, outcome-blind
/// unitary, outcome-blind identity, weak Lüders and Lüders followed by a
/// unitary.
pub fn random_qubit_instrument(i: u64, rng: &mut SeededRng, tol: &Tolerances) -> Result<Instrument> {
    let (a, b) = (Region::new("A", 2), Region::new("B", 2));
    let y = Region::classical("Y", 2);
    let scaled = |m: &Matrix, p: f64| m * C64::new(p.sqrt(), 0.0);
    match i % 5 {
        0 => {
            let n = rng.random_range(2..=3);
            let per = rng.random_range(1..=2);
            Instrument::new(a, b, y, random::instrument_elements(2, 2, n, per, rng), tol)
        }
        1 | 2 => {
            let u = if i % 5 == 1 { random::unitary(2, rng) } else { Matrix::identity(2, 2) };
            let n = rng.random_range(2..=3);
            let p = random::probabilities(n, rng);
            let els = p.iter().map(|&pk| vec![scaled(&u, pk)]).collect();
            Instrument::new(a, b, y, els, tol)
        }
        3 => {
            let eps = 10f64.powf(-rng.random_range(1.0..3.0));
            let v = random::pure_density(std::slice::from_ref(&a), rng);
            // E_± = (I ± ε(2|v⟩⟨v| - I)) / 2
            let id = Operator::identity(std::slice::from_ref(&a))?;
            let sigma = v.scaled(2.0).sub(&id)?;
            let plus = id.add(&sigma.scaled(eps))?.scaled(0.5);
            let minus = id.sub(&sigma.scaled(eps))?.scaled(0.5);
            Instrument::lueders(&[plus, minus], a, b, y, tol)
        }
        _ => {
            let n = rng.random_range(2..=3);
            let els = random::povm(&a, n, rng);
            let l = Instrument::lueders(&els, a.clone(), b.clone(), y.clone(), tol)?;
            let u = random::unitary(2, rng);
            let rotated = l.elements().iter().map(|ks| ks.iter().map(|k| &u * k).collect()).collect();
            Instrument::new(a, b, y, rotated, tol)
        }
    }
}

fn info_disturbance_suite(seed: u64, count: usize, tol: &Tolerances) -> Vec<Check> {
    let mut violations = 0usize;
    let mut informative = 0usize;
    let mut first_err = None;
    for i in 0..count as u64 {
        let mut rng = random::rng(instance_seed(seed, i));
        match random_qubit_instrument(i, &mut rng, tol)
            .and_then(|ins| info_disturbance_check(&ins, INFO_DISTURBANCE_THRESHOLD, tol))
        {
            Ok(r) => {
                if r.informative {
                    informative += 1;
                    if !r.disturbing {
                        violations += 1;
                    }
                }
            }
            Err(e) => {
                first_err.get_or_insert(e.to_string());
            }
        }
    }
    let mut v = Acc::at_most("info-disturbance.informative-without-disturbance", 0.0);
    v.record(Ok(violations as f64));
    v.instances = count;
    let mut s = Acc::above("info-disturbance.informative-instances", 0.0);
    s.record(Ok(informative as f64));
    s.instances = count;
    let mut out = vec![v.finish(), s.finish()];
    if let Some(e) = first_err {
        for c in &mut out {
            c.passed = false;
            c.error = Some(e.clone());
        }
    }
    out
}

fn barnum_knill_suite(seed: u64, count: usize, tol: &Tolerances) -> Vec<Check> {
    let mut eq = Acc::at_most("barnum-knill.equals-bayes-inversion", 1e-9);
    let mut rec = Acc::at_most("barnum-knill.unitary-recovery", 1e-8);
    let pairs = [(2, 2), (2, 3), (3, 2)];
    for i in 0..count as u64 {
        let mut rng = random::rng(instance_seed(seed, i));
        let (din, dout) = pairs[i as usize % 3];
        let (a, b) = (Region::new("A", din), Region::new("B", dout));
        eq.record((|| {
            let ch = channel(a.clone(), b.clone(), &mut rng, tol)?;
            let prior = full_rank_state(std::slice::from_ref(&a), &mut rng);
            let bk = barnum_knill_map(&ch, &prior, tol)?;
            let inv = bayes_invert(&jamiolkowski_to_state(&ch, tol)?, &prior, tol)?;
            Ok(frob_distance(bk.op(), jamiolkowski_to_map(&inv).op()))
        })());
        let d = dim(&mut rng);
        let (a, b) = (Region::new("A", d), Region::new("B", d));
        rec.record((|| {
            let ch = KrausChannel::unitary(a.clone(), b.clone(), random::unitary(d, &mut rng), tol)?;
            let prior = full_rank_state(std::slice::from_ref(&a), &mut rng);
            let bk = barnum_knill_map(&ch, &prior, tol)?;
            let mut e = 0.0f64;
            for j in 0..d {
                for k in 0..d {
                    let x = Operator::unit(&a, j, k)?;
                    e = e.max(frob_distance(&apply_map(&bk, &ch.apply(&x)?)?, &x));
                }
            }
            Ok(e)
        })());
    }
    vec![eq.finish(), rec.finish()]
}

fn pgm_suite(seed: u64, count: usize, tol: &Tolerances) -> Vec<Check> {
    let mut sum = Acc::at_most("pgm.sums-to-support-projector", 1e-10);
    let mut bayes = Acc::at_most("pgm.equals-hybrid-bayes", 1e-10);
    for i in 0..count as u64 {
        let mut rng = random::rng(instance_seed(seed, i));
        let a = Region::new("A", dim(&mut rng));
        let members = rng.random_range(2..=4);
        let r: Result<(f64, f64)> = (|| {
            let (ens, prior) = ensemble(&a, "X", members, &mut rng, tol)?;
            let pg = pretty_good_measurement(&ens, &prior, tol)?;
            let rho = propagate(&prior.embed(), ens.conditional(), tol)?;
            let mut total = Operator::zeros(std::slice::from_ref(&a))?;
            for e in pg.components() {
                total = total.add(e)?;
            }
            let e1 = frob_distance(&total, &support_projector(&rho, tol)?);
            let inv = HybridConditional::from_conditional(bayes_invert(ens.conditional(), &prior.embed(), tol)?, tol)?;
            let e2 = pg
                .components()
                .iter()
                .zip(inv.components())
                .fold(0.0f64, |m, (x, y)| m.max(frob_distance(x, y)));
            Ok((e1, e2))
        })();
        split_record(r, &mut sum, &mut bayes);
    }
    vec![sum.finish(), bayes.finish()]
}

fn duality_suite(seed: u64, count: usize, tol: &Tolerances) -> Vec<Check> {
    let mut expect = Acc::at_most("duality.expectation-values", 1e-10);
    let mut kraus = Acc::at_most("duality.dual-map-matches-kraus", 1e-10);
    for i in 0..count as u64 {
        let mut rng = random::rng(instance_seed(seed, i));
        let a = Region::new("A", dim(&mut rng));
        let b = Region::new("B", dim(&mut rng));
        let r: Result<(f64, f64)> = (|| {
            let ch = channel(a.clone(), b.clone(), &mut rng, tol)?;
            let m = jamiolkowski_to_map(&jamiolkowski_to_state(&ch, tol)?);
            let rho = state_any_rank(&a, &mut rng);
            let e = random::povm(&b, 2, &mut rng).swap_remove(0);
            let lhs = trace_real(&padded_mul(&e, &apply_map(&m, &rho)?)?);
            let dual = dual_apply(&m, &e)?;
            let rhs = trace_real(&padded_mul(&dual, &rho)?);
            Ok(((lhs - rhs).abs(), frob_distance(&dual, &ch.dual_apply(&e)?)))
        })();
        split_record(r, &mut expect, &mut kraus);
    }
    vec![expect.finish(), kraus.finish()]
}

/// `Σ_i p_i |a_i⟩⟨a_i| ⊗ σ_i` in a random basis `{a_i}`: commutes with
/// `ρ_A ⊗ I`.
pub fn commuting_joint(a: &Region, b: &Region, rng: &mut SeededRng) -> Result<Operator> {
    let u = random::unitary(a.dim, rng);
    let p = random::probabilities(a.dim, rng);
    let mut acc = Operator::zeros(&[a.clone(), b.clone()])?;
    for (i, pi) in p.iter().enumerate() {
        let col: Vec<C64> = (0..a.dim).map(|r| u[(r, i)]).collect();
        let proj = Operator::ket_bra(std::slice::from_ref(a), &col)?;
        let sigma = full_rank_state(std::slice::from_ref(b), rng);
        acc = acc.add(&crate::region::tensor(&proj, &sigma)?.scaled(*pi))?;
    }
    Ok(acc.hermitian_part())
}

fn alt_suite(seed: u64, count: usize, tol: &Tolerances) -> Vec<Check> {
    let mut one = Acc::at_most("alt-conditionals.order-one-is-standard", 1e-10);
    let mut comm = Acc::at_most("alt-conditionals.commuting-agreement", 1e-9);
    for i in 0..count as u64 {
        let mut rng = random::rng(instance_seed(seed, i));
        let a = Region::new("A", dim(&mut rng));
        let b = Region::new("B", dim(&mut rng));
        one.record((|| {
            let rho = full_rank_state(&[a.clone(), b.clone()], &mut rng);
            let alt = alt_conditional(&rho, &["A"], AltOrder::Finite(1), tol)?;
            let std = conditional_from_joint(&JointState::acausal(rho, tol)?, &["A"], tol)?;
            Ok(frob_distance(&alt.op, std.op()))
        })());
        comm.record((|| {
            let rho = commuting_joint(&a, &b, &mut rng)?;
            let ops = [AltOrder::Finite(1), AltOrder::Finite(2), AltOrder::Finite(3), AltOrder::Infinite]
                .into_iter()
                .map(|o| Ok(alt_conditional(&rho, &["A"], o, tol)?.op))
                .collect::<Result<Vec<_>>>()?;
            let mut e = 0.0f64;
            for x in &ops {
                for y in &ops {
                    e = e.max(frob_distance(x, y));
                }
            }
            Ok(e)
        })());
    }
    vec![one.finish(), comm.finish()]
}

fn limitations_suite(tol: &Tolerances) -> Vec<Check> {
    let mut w = Acc::above("limitations.w-state-chain-rule-fails", 1e-3);
    w.record(w_state_demo(tol).map(|r| r.distance));
    let mut mc = Acc::at_most("limitations.mixed-causal-closed-form", 1e-10);
    for d in [2, 3] {
        mc.record(mixed_causal_demo(d, tol).map(|r| r.star_error));
    }
    let mut marg = Acc::at_most("limitations.mixed-causal-marginal-pattern", 0.0);
    for d in [2, 3] {
        marg.record(mixed_causal_demo(d, tol).map(|r| {
            if r.star_marginals_ok == [false, true, false] { 0.0 } else { 1.0 }
        }));
    }
    vec![w.finish(), mc.finish(), marg.finish()]
}
