//! Conditional states, joint states and the chain rule.

use std::fmt;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::region::{partial_trace, partial_transpose, LabelSet, Matrix, Operator, Region, C64};
use crate::spectral::{
    check_acausal_conditional, check_causal_conditional, check_density, spectrum, star, star_inv,
    support_projector, Tolerances,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// Positive operator with `Tr_conditioned = I`; describes correlations
    /// between regions at one time.
    Acausal,
    /// Partial transpose (over the conditioning regions) of an acausal
    /// conditional; describes a CPT map from conditioning to conditioned.
    Causal,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Acausal => "acausal",
            Flavor::Causal => "causal",
        })
    }
}

/// Support restriction recorded when a conditional was built by inverting a
/// rank-deficient marginal.
#[derive(Clone, Debug)]
pub struct Support {
    /// Projector onto the support of the marginal; `Tr_conditioned` of the
    /// conditional equals this instead of the identity.
    pub projector: Operator,
    /// Frobenius weight of the joint outside `projector ⊗ I`.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct ConditionalState {
    op: Operator,
    conditioned: LabelSet,
    conditioning: LabelSet,
    flavor: Flavor,
    support: Option<Support>,
}

fn split_labels<S: AsRef<str>>(
    op: &Operator,
    conditioned: &[S],
    conditioning: &[S],
) -> Result<(LabelSet, LabelSet)> {
    let a: LabelSet = conditioned.iter().map(|s| s.as_ref().to_string()).collect();
    let b: LabelSet = conditioning.iter().map(|s| s.as_ref().to_string()).collect();
    if a.is_empty() {
        return Err(Error::InvalidConditional("no conditioned regions".into()));
    }
    if b.is_empty() {
        return Err(Error::InvalidConditional("no conditioning regions".into()));
    }
    if let Some(l) = a.intersection(&b).next() {
        return Err(Error::InvalidConditional(format!(
            "region `{l}` is both conditioned and conditioning"
        )));
    }
    for l in a.iter().chain(b.iter()) {
        if !op.has_label(l) {
            return Err(Error::LabelNotFound(l.clone()));
        }
    }
    if let Some(r) = op
        .regions()
        .iter()
        .find(|r| !a.contains(&r.label) && !b.contains(&r.label))
    {
        return Err(Error::InvalidConditional(format!(
            "region `{}` is neither conditioned nor conditioning",
            r.label
        )));
    }
    Ok((a, b))
}

impl ConditionalState {
    /// Validated conditional with full support on the conditioning regions.
    pub fn new<S: AsRef<str>>(
        op: Operator,
        conditioned: &[S],
        conditioning: &[S],
        flavor: Flavor,
        tol: &Tolerances,
    ) -> Result<Self> {
        let (conditioned, conditioning) = split_labels(&op, conditioned, conditioning)?;
        let c = ConditionalState {
            op,
            conditioned,
            conditioning,
            flavor,
            support: None,
        };
        c.validate(tol)?;
        Ok(c)
    }

    /// Validated conditional whose conditioning marginal is the given support
    /// projector rather than the identity.
    pub fn with_support<S: AsRef<str>>(
        op: Operator,
        conditioned: &[S],
        conditioning: &[S],
        flavor: Flavor,
        support: Support,
        tol: &Tolerances,
    ) -> Result<Self> {
        let (conditioned, conditioning) = split_labels(&op, conditioned, conditioning)?;
        if support.projector.labels() != conditioning {
            return Err(Error::InvalidConditional(
                "support projector must act on the conditioning regions".into(),
            ));
        }
        let full = support.projector.trace().re.round() as usize == support.projector.side();
        let c = ConditionalState {
            op,
            conditioned,
            conditioning,
            flavor,
            support: if full { None } else { Some(support) },
        };
        c.validate(tol)?;
        Ok(c)
    }

    pub(crate) fn from_parts(
        op: Operator,
        conditioned: LabelSet,
        conditioning: LabelSet,
        flavor: Flavor,
        support: Option<Support>,
    ) -> Self {
        ConditionalState {
            op,
            conditioned,
            conditioning,
            flavor,
            support,
        }
    }

    /// Re-validates the stored operator against its flavor.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let conditioning: Vec<String> = self.conditioning.iter().cloned().collect();
        let proj = self.support.as_ref().map(|s| &s.projector);
        match self.flavor {
            Flavor::Acausal => check_acausal_conditional(&self.op, &conditioning, proj, tol),
            Flavor::Causal => check_causal_conditional(&self.op, &conditioning, proj, tol),
        }
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_op(self) -> Operator {
        self.op
    }

    pub fn conditioned(&self) -> &LabelSet {
        &self.conditioned
    }

    pub fn conditioning(&self) -> &LabelSet {
        &self.conditioning
    }

    pub fn conditioned_labels(&self) -> Vec<String> {
        self.conditioned.iter().cloned().collect()
    }

    pub fn conditioning_labels(&self) -> Vec<String> {
        self.conditioning.iter().cloned().collect()
    }

    pub fn conditioned_regions(&self) -> Vec<Region> {
        self.regions_of(&self.conditioned)
    }

    pub fn conditioning_regions(&self) -> Vec<Region> {
        self.regions_of(&self.conditioning)
    }

    fn regions_of(&self, set: &LabelSet) -> Vec<Region> {
        self.op
            .regions()
            .iter()
            .filter(|r| set.contains(&r.label))
            .cloned()
            .collect()
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn support(&self) -> Option<&Support> {
        self.support.as_ref()
    }

    pub fn support_projector(&self) -> Option<&Operator> {
        self.support.as_ref().map(|s| &s.projector)
    }

    /// The acausal operator this conditional corresponds to: itself, or its
    /// partial transpose over the conditioning regions when causal.
    pub fn acausal_form(&self) -> Operator {
        match self.flavor {
            Flavor::Acausal => self.op.clone(),
            Flavor::Causal => partial_transpose(&self.op, &self.conditioning_labels())
                .expect("conditioning labels are on the operator"),
        }
    }

    /// Same conditional reinterpreted in the other flavor by a partial
    /// transpose over the conditioning regions. Validity is not preserved in
    /// general; the result is checked.
    pub fn flip_flavor(&self, tol: &Tolerances) -> Result<Self> {
        let op = partial_transpose(&self.op, &self.conditioning_labels())?;
        let flavor = match self.flavor {
            Flavor::Acausal => Flavor::Causal,
            Flavor::Causal => Flavor::Acausal,
        };
        // Tr_conditioned commutes with the partial transpose up to a
        // transpose of the marginal, so the support target flips too.
        let support = self.support.as_ref().map(|s| Support {
            projector: s.projector.map_matrix(|m| m.transpose()).expect("square"),
            residual: s.residual,
        });
        let c = ConditionalState::from_parts(
            op,
            self.conditioned.clone(),
            self.conditioning.clone(),
            flavor,
            support,
        );
        c.validate(tol)?;
        Ok(c)
    }

    /// True when every conditioned region or every conditioning region is
    /// classical. Such conditionals are valid in both flavors.
    pub fn is_hybrid(&self) -> bool {
        let all_classical = |set: &LabelSet| {
            self.op
                .regions()
                .iter()
                .filter(|r| set.contains(&r.label))
                .all(|r| r.classical)
        };
        all_classical(&self.conditioned) || all_classical(&self.conditioning)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JointFlavor {
    Acausal,
    /// Joint over an input region set and an output region set; its partial
    /// transpose over `input` is a density operator.
    Causal { input: LabelSet, output: LabelSet },
}

#[derive(Clone, Debug)]
pub struct JointState {
    op: Operator,
    flavor: JointFlavor,
}

impl JointState {
    pub fn acausal(op: Operator, tol: &Tolerances) -> Result<Self> {
        check_density(&op, tol)?;
        Ok(JointState {
            op,
            flavor: JointFlavor::Acausal,
        })
    }

    pub fn causal<S: AsRef<str>>(
        op: Operator,
        input: &[S],
        output: &[S],
        tol: &Tolerances,
    ) -> Result<Self> {
        let (output, input) = split_labels(&op, output, input)?;
        let inp: Vec<String> = input.iter().cloned().collect();
        check_density(&partial_transpose(&op, &inp)?, tol)
            .map_err(|e| Error::InvalidState(format!("causal joint: {e}")))?;
        Ok(JointState {
            op,
            flavor: JointFlavor::Causal { input, output },
        })
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn flavor(&self) -> &JointFlavor {
        &self.flavor
    }

    pub fn marginal<S: AsRef<str>>(&self, keep: &[S]) -> Result<Operator> {
        for k in keep {
            if !self.op.has_label(k.as_ref()) {
                return Err(Error::LabelNotFound(k.as_ref().to_string()));
            }
        }
        let traced: Vec<String> = self
            .op
            .labels()
            .into_iter()
            .filter(|l| !keep.iter().any(|k| k.as_ref() == l))
            .collect();
        partial_trace(&self.op, &traced)
    }
}

/// `ρ_{B|A} = ρ_AB ⋆ ρ_A^{-1}`, conditioning on the named regions. A
/// rank-deficient marginal is inverted on its support; the support projector
/// and the weight of the joint outside it are recorded on the result.
pub fn conditional_from_joint<S: AsRef<str>>(
    joint: &JointState,
    conditioning: &[S],
    tol: &Tolerances,
) -> Result<ConditionalState> {
    let conditioning: LabelSet = conditioning.iter().map(|s| s.as_ref().to_string()).collect();
    for l in &conditioning {
        if !joint.op.has_label(l) {
            return Err(Error::LabelNotFound(l.clone()));
        }
    }
    let conditioned: LabelSet = joint
        .op
        .labels()
        .into_iter()
        .filter(|l| !conditioning.contains(l))
        .collect();
    let flavor = match &joint.flavor {
        JointFlavor::Acausal => Flavor::Acausal,
        JointFlavor::Causal { input, output } => {
            if &conditioning != input && &conditioning != output {
                return Err(Error::Flavor(
                    "a causal joint can only be conditioned on its whole input or whole output"
                        .into(),
                ));
            }
            Flavor::Causal
        }
    };
    let traced: Vec<String> = conditioned.iter().cloned().collect();
    let marginal = partial_trace(&joint.op, &traced)?;
    let op = star_inv(&joint.op, &marginal, tol)?;
    let support = support_of(&marginal, &joint.op, tol)?;
    let c = ConditionalState::from_parts(op, conditioned, conditioning, flavor, support);
    c.validate(tol)?;
    Ok(c)
}

/// `Some(Support)` when `marginal` is rank-deficient; `residual` measures how
/// much of `full` lies outside `P ⊗ I`.
pub(crate) fn support_of(
    marginal: &Operator,
    full: &Operator,
    tol: &Tolerances,
) -> Result<Option<Support>> {
    let s = spectrum(marginal, tol)?;
    if s.support_rank == marginal.side() {
        return Ok(None);
    }
    let p = support_projector(marginal, tol)?;
    let pf = p.embed(full.regions())?;
    let inside = Operator::new(
        pf.regions().to_vec(),
        pf.matrix() * full.matrix() * pf.matrix(),
    )?;
    let residual = full.sub(&inside)?.frobenius_norm();
    Ok(Some(Support {
        projector: p,
        residual,
    }))
}

/// `ρ_AB = ρ_{B|A} ⋆ ρ_A`. For a causal conditional the result is a causal
/// joint with input equal to the conditioning regions.
pub fn joint_from_conditional(
    c: &ConditionalState,
    marginal: &Operator,
    tol: &Tolerances,
) -> Result<JointState> {
    if marginal.labels() != c.conditioning {
        return Err(Error::InvalidState(format!(
            "marginal acts on {:?} but the conditional is conditioned on {:?}",
            marginal.labels(),
            c.conditioning
        )));
    }
    check_density(marginal, tol)?;
    let op = star(&c.op, marginal, tol)?;
    match c.flavor {
        Flavor::Acausal => JointState::acausal(op, tol),
        Flavor::Causal => JointState::causal(
            op,
            &c.conditioning_labels(),
            &c.conditioned_labels(),
            tol,
        ),
    }
}

/// `ρ_{A1} ⋆`-chained with `ρ_{A2|A1}, ρ_{A3|A1A2}, …`.
#[derive(Clone, Debug)]
pub struct Chain {
    pub first: Operator,
    /// `links[k]` is the conditional of the `(k+2)`-th region given all
    /// earlier ones.
    pub links: Vec<ConditionalState>,
}

/// Decomposes an acausal joint along the given region order.
pub fn chain_decompose<S: AsRef<str>>(
    joint: &JointState,
    order: &[S],
    tol: &Tolerances,
) -> Result<Chain> {
    if joint.flavor != JointFlavor::Acausal {
        return Err(Error::Flavor(
            "chain decomposition needs an acausal joint".into(),
        ));
    }
    let order: Vec<String> = order.iter().map(|s| s.as_ref().to_string()).collect();
    let all = joint.op.labels();
    let given: LabelSet = order.iter().cloned().collect();
    if given.len() != order.len() || given != all {
        return Err(Error::InvalidState(
            "chain order must list every region of the joint exactly once".into(),
        ));
    }
    let first = joint.marginal(&order[..1])?;
    let mut links = Vec::new();
    for k in 1..order.len() {
        let m = JointState {
            op: joint.marginal(&order[..=k])?,
            flavor: JointFlavor::Acausal,
        };
        links.push(conditional_from_joint(&m, &order[..k], tol)?);
    }
    Ok(Chain { first, links })
}

/// Evaluates the chain right to left: `ρ_{An|…} ⋆ (… ⋆ (ρ_{A2|A1} ⋆ ρ_{A1}))`.
pub fn chain_recompose(chain: &Chain, tol: &Tolerances) -> Result<Operator> {
    let mut acc = chain.first.clone();
    for link in &chain.links {
        acc = star(link.op(), &acc, tol)?;
    }
    Ok(acc)
}

/// Acausal conditional of the pure state `Σ_j |j⟩_A ⊗ U|j⟩_B` for an
/// isometry `U` from `input` to `output`.
pub fn pure_conditional_from_isometry(
    u: &Matrix,
    input: &Region,
    output: &Region,
    tol: &Tolerances,
) -> Result<ConditionalState> {
    if u.nrows() != output.dim || u.ncols() != input.dim {
        return Err(Error::Shape {
            rows: u.nrows(),
            cols: u.ncols(),
            expected: output.dim,
        });
    }
    let defect = (u.adjoint() * u - Matrix::identity(input.dim, input.dim))
        .iter()
        .fold(0.0f64, |a, z| a.max(z.norm()));
    if defect > tol.eq_tol {
        return Err(Error::NotIsometry(defect));
    }
    let mut psi = DVector::<C64>::zeros(input.dim * output.dim);
    for j in 0..input.dim {
        for b in 0..output.dim {
            psi[j * output.dim + b] = u[(b, j)];
        }
    }
    let op = Operator::ket_bra(&[input.clone(), output.clone()], psi.as_slice())?;
    ConditionalState::new(
        op,
        &[output.label.as_str()],
        &[input.label.as_str()],
        Flavor::Acausal,
        tol,
    )
}
