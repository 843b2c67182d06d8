//! Scenario files: JSON documents declaring regions, named objects and one
//! task. Complex entries are `[re, im]` pairs (a bare number is read as a
//! real entry); matrices are lists of rows.

use std::collections::BTreeMap;

use condstate::channel::KrausChannel;
use condstate::classical::ClassicalDistribution;
use condstate::conditional::{ConditionalState, Flavor};
use condstate::hybrid::HybridConditional;
use condstate::instrument::Instrument;
use condstate::random::{self, instance_seed};
use condstate::{Matrix, Operator, Region, Tolerances, C64};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub regions: Vec<RegionSpec>,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    pub task: TaskKind,
    #[serde(default)]
    pub task_args: TaskArgs,
    #[serde(default)]
    pub tolerances: Option<TolSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub label: String,
    pub dim: usize,
    #[serde(default)]
    pub classical: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolSpec {
    pub eig_zero: Option<f64>,
    pub herm_tol: Option<f64>,
    pub eq_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Validate,
    Propagate,
    BayesInvert,
    Retrodict,
    Steer,
    Condition,
    InstrumentUpdate,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Validate => "validate",
            TaskKind::Propagate => "propagate",
            TaskKind::BayesInvert => "bayes-invert",
            TaskKind::Retrodict => "retrodict",
            TaskKind::Steer => "steer",
            TaskKind::Condition => "condition",
            TaskKind::InstrumentUpdate => "instrument-update",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    pub fn names(&self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Names of objects a task works on; which ones are required depends on the
/// task.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskArgs {
    pub state: Option<String>,
    pub through: Option<OneOrMany>,
    pub conditional: Option<String>,
    pub prior: Option<String>,
    pub ensemble: Option<String>,
    pub measurement: Option<String>,
    pub other_measurement: Option<String>,
    pub channel: Option<String>,
    pub instrument: Option<String>,
    pub outcome: Option<usize>,
    pub value: Option<usize>,
}

impl TaskArgs {
    fn referenced(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let singles = [
            ("state", &self.state),
            ("conditional", &self.conditional),
            ("prior", &self.prior),
            ("ensemble", &self.ensemble),
            ("measurement", &self.measurement),
            ("other_measurement", &self.other_measurement),
            ("channel", &self.channel),
            ("instrument", &self.instrument),
        ];
        for (k, v) in singles {
            if let Some(v) = v {
                out.push((k, v.clone()));
            }
        }
        if let Some(t) = &self.through {
            for n in t.names() {
                out.push(("through", n));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Pair([re, im]) => C64::new(re, im),
            Entry::Real(re) => C64::new(re, 0.0),
        }
    }
}

pub type MatrixSpec = Vec<Vec<Entry>>;

/// Requests a seeded random payload instead of explicit entries.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    /// Rank of a random density operator or ensemble member.
    pub rank: Option<usize>,
    /// Number of Kraus operators (per outcome for instruments).
    pub kraus: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlavorSpec {
    Acausal,
    Causal,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObjectSpec {
    Operator {
        name: String,
        regions: Vec<String>,
        matrix: Option<MatrixSpec>,
        random: Option<RandomSpec>,
    },
    Povm {
        name: String,
        regions: Vec<String>,
        outcome: String,
        elements: Option<Vec<MatrixSpec>>,
        random: Option<RandomSpec>,
    },
    Ensemble {
        name: String,
        regions: Vec<String>,
        value: String,
        states: Option<Vec<MatrixSpec>>,
        random: Option<RandomSpec>,
    },
    Channel {
        name: String,
        input: String,
        output: String,
        kraus: Option<Vec<MatrixSpec>>,
        random: Option<RandomSpec>,
    },
    Instrument {
        name: String,
        input: String,
        output: String,
        outcome: String,
        elements: Option<Vec<Vec<MatrixSpec>>>,
        random: Option<RandomSpec>,
    },
    Distribution {
        name: String,
        regions: Vec<String>,
        probs: Vec<f64>,
    },
    Conditional {
        name: String,
        regions: Vec<String>,
        conditioned: Vec<String>,
        conditioning: Vec<String>,
        flavor: FlavorSpec,
        matrix: MatrixSpec,
    },
}

impl ObjectSpec {
    pub fn name(&self) -> &str {
        match self {
            ObjectSpec::Operator { name, .. }
            | ObjectSpec::Povm { name, .. }
            | ObjectSpec::Ensemble { name, .. }
            | ObjectSpec::Channel { name, .. }
            | ObjectSpec::Instrument { name, .. }
            | ObjectSpec::Distribution { name, .. }
            | ObjectSpec::Conditional { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Object {
    Operator(Operator),
    Povm(HybridConditional),
    Ensemble(HybridConditional),
    Channel(KrausChannel),
    Instrument(Instrument),
    Distribution(ClassicalDistribution),
    Conditional(ConditionalState),
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Operator(_) => "operator",
            Object::Povm(_) => "povm",
            Object::Ensemble(_) => "ensemble",
            Object::Channel(_) => "channel",
            Object::Instrument(_) => "instrument",
            Object::Distribution(_) => "distribution",
            Object::Conditional(_) => "conditional",
        }
    }
}

#[derive(Debug)]
pub struct Loaded {
    pub task: TaskKind,
    pub args: TaskArgs,
    pub tol: Tolerances,
    pub objects: Vec<(String, Object)>,
    /// Seed actually used, present only when some payload was random.
    pub seed: Option<u64>,
}

impl Loaded {
    pub fn get(&self, name: &str) -> CliResult<&Object> {
        self.objects
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, o)| o)
            .ok_or_else(|| CliError::structure(name, "not defined"))
    }
}

pub fn parse(text: &str) -> CliResult<Scenario> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

/// Parses and builds every object. `tol_override` replaces `eq_tol`.
pub fn load(text: &str, seed: u64, tol_override: Option<f64>) -> CliResult<Loaded> {
    let sc = parse(text)?;
    let mut regions: BTreeMap<String, Region> = BTreeMap::new();
    for r in &sc.regions {
        if r.dim == 0 {
            return Err(CliError::Parse(format!("region `{}` has dimension 0", r.label)));
        }
        let region = if r.classical {
            Region::classical(r.label.clone(), r.dim)
        } else {
            Region::new(r.label.clone(), r.dim)
        };
        if regions.insert(r.label.clone(), region).is_some() {
            return Err(CliError::Parse(format!("region `{}` declared twice", r.label)));
        }
    }
    let mut tol = Tolerances::default();
    if let Some(t) = &sc.tolerances {
        tol.eig_zero = t.eig_zero.unwrap_or(tol.eig_zero);
        tol.herm_tol = t.herm_tol.unwrap_or(tol.herm_tol);
        tol.eq_tol = t.eq_tol.unwrap_or(tol.eq_tol);
    }
    if let Some(x) = tol_override {
        tol.eq_tol = x;
    }
    tol.validate()?;

    let mut b = Builder {
        regions,
        tol,
        seed,
        randomized: false,
    };
    let mut objects: Vec<(String, Object)> = Vec::new();
    for (index, spec) in sc.objects.iter().enumerate() {
        let name = spec.name().to_string();
        if objects.iter().any(|(n, _)| *n == name) {
            return Err(CliError::structure(&name, "defined twice"));
        }
        let obj = b.build(spec, index as u64)?;
        objects.push((name, obj));
    }
    for (field, n) in sc.task_args.referenced() {
        if !objects.iter().any(|(m, _)| *m == n) {
            return Err(CliError::structure(&n, format!("referenced by task_args.{field} but not defined")));
        }
    }
    Ok(Loaded {
        task: sc.task,
        args: sc.task_args,
        tol,
        objects,
        seed: b.randomized.then_some(seed),
    })
}

struct Builder {
    regions: BTreeMap<String, Region>,
    tol: Tolerances,
    seed: u64,
    randomized: bool,
}

fn side(rs: &[Region]) -> usize {
    rs.iter().map(|r| r.dim).product()
}

fn matrix(name: &str, what: &str, spec: &MatrixSpec, rows: usize, cols: usize) -> CliResult<Matrix> {
    if spec.is_empty() {
        return Err(CliError::structure(name, format!("{what} is empty")));
    }
    let n = spec.len();
    for (i, row) in spec.iter().enumerate() {
        if row.len() != spec[0].len() {
            return Err(CliError::structure(
                name,
                format!("{what} row {i} has {} entries, expected {}", row.len(), spec[0].len()),
            ));
        }
    }
    let m = spec[0].len();
    if rows == cols && n != m {
        return Err(CliError::structure(name, format!("{what} is not square ({n}x{m})")));
    }
    if (n, m) != (rows, cols) {
        return Err(CliError::structure(
            name,
            format!("{what} is {n}x{m} but its regions need {rows}x{cols}"),
        ));
    }
    if let Some(z) = spec.iter().flatten().map(|e| e.value()).find(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(CliError::structure(name, format!("{what} has a non-finite entry {z}")));
    }
    Ok(Matrix::from_fn(rows, cols, |i, j| spec[i][j].value()))
}

fn exactly_one<'a, T>(name: &str, explicit: &'a Option<T>, random: &'a Option<RandomSpec>, field: &str) -> CliResult<Option<&'a T>> {
    match (explicit, random) {
        (Some(x), None) => Ok(Some(x)),
        (None, Some(_)) => Ok(None),
        (Some(_), Some(_)) => Err(CliError::structure(name, format!("give either `{field}` or `random`, not both"))),
        (None, None) => Err(CliError::structure(name, format!("missing `{field}` (or `random`)"))),
    }
}

impl Builder {
    fn region(&self, obj: &str, label: &str) -> CliResult<Region> {
        self.regions
            .get(label)
            .cloned()
            .ok_or_else(|| CliError::structure(obj, format!("unknown region `{label}`")))
    }

    fn regions(&self, obj: &str, labels: &[String]) -> CliResult<Vec<Region>> {
        if labels.is_empty() {
            return Err(CliError::structure(obj, "no regions given"));
        }
        labels.iter().map(|l| self.region(obj, l)).collect()
    }

    fn classical(&self, obj: &str, label: &str, count: usize) -> CliResult<Region> {
        let r = self.region(obj, label)?;
        if !r.classical {
            return Err(CliError::structure(obj, format!("region `{label}` must be declared classical")));
        }
        if r.dim != count {
            return Err(CliError::structure(
                obj,
                format!("region `{label}` has dimension {} but {count} entries were given", r.dim),
            ));
        }
        Ok(r)
    }

    fn rng(&mut self, index: u64) -> random::SeededRng {
        self.randomized = true;
        random::rng(instance_seed(self.seed, index))
    }

    fn build(&mut self, spec: &ObjectSpec, index: u64) -> CliResult<Object> {
        let tol = self.tol;
        let wrap = |name: &str| {
            let name = name.to_string();
            move |source: condstate::Error| CliError::Object { name, source }
        };
        match spec {
            ObjectSpec::Operator { name, regions, matrix: m, random: rnd } => {
                let rs = self.regions(name, regions)?;
                let d = side(&rs);
                let mat = match exactly_one(name, m, rnd, "matrix")? {
                    Some(m) => matrix(name, "matrix", m, d, d)?,
                    None => {
                        let rank = rnd.as_ref().and_then(|r| r.rank).unwrap_or(d).clamp(1, d);
                        random::density_matrix(d, rank, &mut self.rng(index))
                    }
                };
                Ok(Object::Operator(Operator::new(rs, mat).map_err(wrap(name))?))
            }
            ObjectSpec::Povm { name, regions, outcome, elements, random: rnd } => {
                let rs = self.regions(name, regions)?;
                let d = side(&rs);
                let mats = match exactly_one(name, elements, rnd, "elements")? {
                    Some(els) => els
                        .iter()
                        .enumerate()
                        .map(|(k, e)| matrix(name, &format!("element {k}"), e, d, d))
                        .collect::<CliResult<Vec<_>>>()?,
                    None => {
                        let n = self.region(name, outcome)?.dim;
                        random::povm_matrices(d, n, &mut self.rng(index))
                    }
                };
                let y = self.classical(name, outcome, mats.len())?;
                let ops = mats
                    .into_iter()
                    .map(|m| Operator::new(rs.clone(), m))
                    .collect::<condstate::Result<Vec<_>>>()
                    .map_err(wrap(name))?;
                Ok(Object::Povm(HybridConditional::from_povm(&ops, &y, &tol).map_err(wrap(name))?))
            }
            ObjectSpec::Ensemble { name, regions, value, states, random: rnd } => {
                let rs = self.regions(name, regions)?;
                let d = side(&rs);
                let mats = match exactly_one(name, states, rnd, "states")? {
                    Some(sts) => sts
                        .iter()
                        .enumerate()
                        .map(|(k, s)| matrix(name, &format!("state {k}"), s, d, d))
                        .collect::<CliResult<Vec<_>>>()?,
                    None => {
                        let n = self.region(name, value)?.dim;
                        let rank = rnd.as_ref().and_then(|r| r.rank).unwrap_or(d).clamp(1, d);
                        let mut g = self.rng(index);
                        (0..n).map(|_| random::density_matrix(d, rank, &mut g)).collect()
                    }
                };
                let x = self.classical(name, value, mats.len())?;
                let ops = mats
                    .into_iter()
                    .map(|m| Operator::new(rs.clone(), m))
                    .collect::<condstate::Result<Vec<_>>>()
                    .map_err(wrap(name))?;
                Ok(Object::Ensemble(HybridConditional::from_ensemble(&ops, &x, &tol).map_err(wrap(name))?))
            }
            ObjectSpec::Channel { name, input, output, kraus, random: rnd } => {
                let (a, b) = (self.region(name, input)?, self.region(name, output)?);
                let ks = match exactly_one(name, kraus, rnd, "kraus")? {
                    Some(ks) => ks
                        .iter()
                        .enumerate()
                        .map(|(k, m)| matrix(name, &format!("Kraus operator {k}"), m, b.dim, a.dim))
                        .collect::<CliResult<Vec<_>>>()?,
                    None => {
                        let n = rnd.as_ref().and_then(|r| r.kraus).unwrap_or(2);
                        random::kraus(a.dim, b.dim, n, &mut self.rng(index))
                    }
                };
                Ok(Object::Channel(KrausChannel::new(a, b, ks, &tol).map_err(wrap(name))?))
            }
            ObjectSpec::Instrument { name, input, output, outcome, elements, random: rnd } => {
                let (a, b) = (self.region(name, input)?, self.region(name, output)?);
                let els = match exactly_one(name, elements, rnd, "elements")? {
                    Some(els) => els
                        .iter()
                        .enumerate()
                        .map(|(y, ks)| {
                            ks.iter()
                                .enumerate()
                                .map(|(k, m)| matrix(name, &format!("outcome {y} Kraus operator {k}"), m, b.dim, a.dim))
                                .collect::<CliResult<Vec<_>>>()
                        })
                        .collect::<CliResult<Vec<_>>>()?,
                    None => {
                        let n = self.region(name, outcome)?.dim;
                        let per = rnd.as_ref().and_then(|r| r.kraus).unwrap_or(1);
                        random::instrument_elements(a.dim, b.dim, n, per, &mut self.rng(index))
                    }
                };
                let y = self.classical(name, outcome, els.len())?;
                Ok(Object::Instrument(Instrument::new(a, b, y, els, &tol).map_err(wrap(name))?))
            }
            ObjectSpec::Distribution { name, regions, probs } => {
                let rs = self.regions(name, regions)?;
                if let Some(r) = rs.iter().find(|r| !r.classical) {
                    return Err(CliError::structure(name, format!("region `{}` must be declared classical", r.label)));
                }
                if probs.len() != side(&rs) {
                    return Err(CliError::structure(
                        name,
                        format!("{} probabilities given but the regions have {} values", probs.len(), side(&rs)),
                    ));
                }
                Ok(Object::Distribution(
                    ClassicalDistribution::new(&rs, probs.clone(), &tol).map_err(wrap(name))?,
                ))
            }
            ObjectSpec::Conditional { name, regions, conditioned, conditioning, flavor, matrix: m } => {
                let rs = self.regions(name, regions)?;
                let d = side(&rs);
                let op = Operator::new(rs, matrix(name, "matrix", m, d, d)?).map_err(wrap(name))?;
                let flavor = match flavor {
                    FlavorSpec::Acausal => Flavor::Acausal,
                    FlavorSpec::Causal => Flavor::Causal,
                };
                Ok(Object::Conditional(
                    ConditionalState::new(op, conditioned, conditioning, flavor, &tol).map_err(wrap(name))?,
                ))
            }
        }
    }
}
