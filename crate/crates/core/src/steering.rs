//! Remote measurement: the ensemble a measurement on `B` steers `A` into, and
//! the joint outcome distribution of measurements on both sides.

use crate::bayes::bayes_invert;
use crate::channel::{compose_conditionals, propagate};
use crate::conditional::{conditional_from_joint, JointState};
use crate::error::{Error, Result};
use crate::hybrid::{HybridConditional, HybridKind};
use crate::region::{frob_distance, padded_product, partial_trace, Operator};
use crate::spectral::{star, Tolerances};

#[derive(Clone, Debug)]
pub struct SteeringResult {
    pub probabilities: Vec<f64>,
    /// Steered state on `A` for each outcome; `None` when `P(y) = 0`.
    pub states: Vec<Option<Operator>>,
    /// `ρ_{A|Y}` obtained by Bayes-inverting the measurement on `B` and
    /// propagating through `ρ_{A|B}`.
    pub steered: HybridConditional,
    /// `E^A_y = Tr_B[ϱ_{Y|B} ρ_{B|A}]`, the measurement on `A` that produces
    /// the same statistics.
    pub effective_povm: HybridConditional,
    /// Distance between the two routes to `ρ_{A|Y}` (Bayes then propagate,
    /// propagate then Bayes).
    pub route_discrepancy: f64,
    /// `‖Σ_y P(y) ρ_y - ρ_A‖`.
    pub no_signalling_defect: f64,
}

fn split(joint: &JointState, povm: &HybridConditional) -> Result<(Vec<String>, Vec<String>)> {
    if povm.kind() != HybridKind::Povm {
        return Err(Error::InvalidPovm("expected a POVM conditional".into()));
    }
    let b: Vec<String> = povm.conditional().conditioning_labels();
    for l in &b {
        if !joint.op().has_label(l) {
            return Err(Error::LabelNotFound(l.clone()));
        }
    }
    let a: Vec<String> = joint
        .op()
        .labels()
        .into_iter()
        .filter(|l| !b.contains(l))
        .collect();
    if a.is_empty() {
        return Err(Error::InvalidState(
            "the joint state has no region left to steer".into(),
        ));
    }
    Ok((a, b))
}

pub fn steering_ensemble(
    joint: &JointState,
    povm_b: &HybridConditional,
    tol: &Tolerances,
) -> Result<SteeringResult> {
    let (a, b) = split(joint, povm_b)?;
    let rho_a = joint.marginal(&a)?;
    let rho_b = joint.marginal(&b)?;

    let a_given_b = conditional_from_joint(joint, &b, tol)?;
    let b_given_y = bayes_invert(povm_b.conditional(), &rho_b, tol)?;
    let steered = compose_conditionals(&a_given_b, &b_given_y, tol)?;

    let b_given_a = conditional_from_joint(joint, &a, tol)?;
    let y_given_a = compose_conditionals(povm_b.conditional(), &b_given_a, tol)?;
    let via_effective = bayes_invert(&y_given_a, &rho_a, tol)?;
    let route_discrepancy = frob_distance(steered.op(), via_effective.op());

    let rho_y = propagate(&rho_b, povm_b.conditional(), tol)?;
    let steered = HybridConditional::from_conditional(steered, tol)?;
    let mut probabilities = Vec::new();
    let mut states = Vec::new();
    let mut average = Operator::zeros(rho_a.regions())?;
    for (y, comp) in steered.components().iter().enumerate() {
        let p = rho_y.matrix()[(y, y)].re.max(0.0);
        probabilities.push(p);
        if p <= tol.eig_zero {
            states.push(None);
        } else {
            average = average.add(&comp.scaled(p))?;
            states.push(Some(comp.clone()));
        }
    }
    let no_signalling_defect = frob_distance(&average, &rho_a);
    Ok(SteeringResult {
        probabilities,
        states,
        steered,
        effective_povm: HybridConditional::from_conditional(y_given_a, tol)?,
        route_discrepancy,
        no_signalling_defect,
    })
}

/// Joint outcome distribution of measurements `X|A` and `Y|B` on `ρ_AB`,
/// computed three ways.
#[derive(Clone, Debug)]
pub struct EprJoints {
    /// `Tr_AB[(ϱ_{X|A} ϱ_{Y|B}) ρ_AB]`.
    pub direct: Operator,
    /// `Tr_AB[ϱ_{Y|B} ρ_{B|A} ϱ_{A|X}] ⋆ ρ_X`.
    pub rightward: Operator,
    /// `Tr_AB[ϱ_{X|A} ρ_{A|B} ϱ_{B|Y}] ⋆ ρ_Y`.
    pub leftward: Operator,
}

impl EprJoints {
    pub fn max_discrepancy(&self) -> f64 {
        frob_distance(&self.direct, &self.rightward)
            .max(frob_distance(&self.direct, &self.leftward))
            .max(frob_distance(&self.rightward, &self.leftward))
    }
}

pub fn epr_joints(
    joint: &JointState,
    povm_a: &HybridConditional,
    povm_b: &HybridConditional,
    tol: &Tolerances,
) -> Result<EprJoints> {
    let (_, b) = split(joint, povm_b)?;
    let (_, a) = split(joint, povm_a)?;
    let mut ab = a.clone();
    ab.extend(b.iter().cloned());
    if ab.len() != joint.op().regions().len() {
        return Err(Error::InvalidState(
            "the two measurements must cover the joint state's regions".into(),
        ));
    }
    let direct = partial_trace(
        &padded_product(&[povm_a.op(), povm_b.op(), joint.op()])?,
        &ab,
    )?;

    let rho_a = joint.marginal(&a)?;
    let rho_b = joint.marginal(&b)?;
    let rho_x = propagate(&rho_a, povm_a.conditional(), tol)?;
    let rho_y = propagate(&rho_b, povm_b.conditional(), tol)?;
    let a_given_x = bayes_invert(povm_a.conditional(), &rho_a, tol)?;
    let b_given_y = bayes_invert(povm_b.conditional(), &rho_b, tol)?;
    let b_given_a = conditional_from_joint(joint, &a, tol)?;
    let a_given_b = conditional_from_joint(joint, &b, tol)?;

    let right = partial_trace(
        &padded_product(&[povm_b.op(), b_given_a.op(), a_given_x.op()])?,
        &ab,
    )?;
    let left = partial_trace(
        &padded_product(&[povm_a.op(), a_given_b.op(), b_given_y.op()])?,
        &ab,
    )?;
    Ok(EprJoints {
        direct,
        rightward: star(&right, &rho_x, tol)?,
        leftward: star(&left, &rho_y, tol)?,
    })
}
