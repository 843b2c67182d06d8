//! State-update rules after a measurement, and the check that any instrument
//! which gains information disturbs its input.

use crate::bayes::bayes_invert;
use crate::channel::{jamiolkowski_to_state, propagate, KrausChannel};
use crate::conditional::{conditional_from_joint, JointState};
use crate::error::{Error, Result};
use crate::hybrid::HybridConditional;
use crate::instrument::{instrument_nonselective, instrument_povm, instrument_to_conditional, Instrument};
use crate::region::{frob_distance, padded_product, Operator};
use crate::spectral::{check_density, herm_sqrt, Tolerances};

/// One measurement outcome analysed three ways.
#[derive(Clone, Debug)]
pub struct UpdateDecomposition {
    pub probability: f64,
    /// Output state of the non-selective channel, `Tr_Y ρ_YB`.
    pub nonselective: Operator,
    /// `ρ_{B|Y=y}`: the output conditioned on the outcome, read from the
    /// conditional of the joint `ρ_YB` given `Y`.
    pub conditioned: Operator,
    /// `ρ^{1/2} E_y ρ^{1/2} / P(y)`: the input conditioned on the outcome.
    pub retrodictive: Operator,
    /// `‖Σ_y P(y) ρ_{B|Y=y} - nonselective‖`.
    pub factorization_defect: f64,
}

pub fn update_rule_decompose(
    ins: &Instrument,
    prior: &Operator,
    y: usize,
    tol: &Tolerances,
) -> Result<UpdateDecomposition> {
    check_density(prior, tol)?;
    if y >= ins.outcome().dim {
        return Err(Error::IndexOutOfRange {
            label: ins.outcome().label.clone(),
            index: y,
            dim: ins.outcome().dim,
        });
    }
    let nonselective = propagate(prior, &instrument_nonselective(ins, tol)?, tol)?;
    let yb = propagate(prior, &instrument_to_conditional(ins, tol)?, tol)?.hermitian_part();
    let probability = yb
        .slice(&ins.outcome().label, y, y)?
        .trace()
        .re;
    if probability <= tol.eig_zero {
        return Err(Error::ZeroProbability(y));
    }
    let joint = JointState::acausal(yb, tol)?;
    let b_given_y = conditional_from_joint(&joint, &[ins.outcome().label.as_str()], tol)?;
    let b_given_y = HybridConditional::from_conditional(b_given_y, tol)?;
    let conditioned = b_given_y.components()[y].clone();

    let mut mixture = Operator::zeros(nonselective.regions())?;
    let rho_y = joint.marginal(&[ins.outcome().label.as_str()])?;
    for (k, comp) in b_given_y.components().iter().enumerate() {
        mixture = mixture.add(&comp.scaled(rho_y.matrix()[(k, k)].re))?;
    }
    let factorization_defect = frob_distance(&mixture, &nonselective);

    let povm = instrument_povm(ins, tol)?;
    let retro = bayes_invert(povm.conditional(), prior, tol)?;
    let retro = HybridConditional::from_conditional(retro, tol)?;
    Ok(UpdateDecomposition {
        probability,
        nonselective,
        conditioned,
        retrodictive: retro.components()[y].clone(),
        factorization_defect,
    })
}

/// `E^{1/2} ρ E^{1/2} / Tr(E ρ)`; for a projector this is the projection
/// postulate.
pub fn generalized_projection(e: &Operator, rho: &Operator, tol: &Tolerances) -> Result<Operator> {
    let s = herm_sqrt(e, tol)?;
    let out = padded_product(&[&s, rho, &s])?;
    let p = out.trace().re;
    if p <= tol.eig_zero {
        return Err(Error::ZeroProbability(0));
    }
    Ok(out.scaled(1.0 / p))
}

/// `ρ^{1/2} E ρ^{1/2} / Tr(E ρ)`: conditioning the input on the outcome.
pub fn conditioned_state(e: &Operator, rho: &Operator, tol: &Tolerances) -> Result<Operator> {
    let s = herm_sqrt(rho, tol)?;
    let out = padded_product(&[&s, e, &s])?;
    let p = out.trace().re;
    if p <= tol.eig_zero {
        return Err(Error::ZeroProbability(0));
    }
    Ok(out.scaled(1.0 / p))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfoDisturbance {
    pub informative: bool,
    pub disturbing: bool,
    /// `max_y ‖E_y - Tr(E_y) I/d‖`.
    pub informativeness: f64,
    /// Distance of the non-selective conditional from the identity channel's.
    pub disturbance: f64,
}

pub const INFO_DISTURBANCE_THRESHOLD: f64 = 1e-8;

pub fn info_disturbance_check(
    ins: &Instrument,
    threshold: f64,
    tol: &Tolerances,
) -> Result<InfoDisturbance> {
    let (a, b) = (ins.input().clone(), ins.output().clone());
    if a.dim != b.dim {
        return Err(Error::Domain(format!(
            "input `{}` and output `{}` differ in dimension; disturbance is undefined",
            a.label, b.label
        )));
    }
    let d = a.dim as f64;
    let identity = Operator::identity(std::slice::from_ref(&a))?;
    let mut informativeness = 0.0f64;
    for e in ins.povm_elements()? {
        let flat = identity.scaled(e.trace().re / d);
        informativeness = informativeness.max(frob_distance(&e, &flat));
    }
    let ns = instrument_nonselective(ins, tol)?;
    let id = jamiolkowski_to_state(&KrausChannel::identity(a, b, tol)?, tol)?;
    let disturbance = frob_distance(ns.op(), id.op());
    Ok(InfoDisturbance {
        informative: informativeness > threshold,
        disturbing: disturbance > threshold,
        informativeness,
        disturbance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{Matrix, Region, C64};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn a() -> Region {
        Region::new("A", 2)
    }

    fn proj(v: [f64; 2]) -> Operator {
        Operator::ket_bra(&[a()], &[c(v[0]), c(v[1])]).unwrap()
    }

    #[test]
    fn lueders_z_on_plus() {
        let t = Tolerances::default();
        let s = 0.5f64.sqrt();
        let ins = Instrument::lueders(
            &[proj([1., 0.]), proj([0., 1.])],
            a(),
            Region::new("B", 2),
            Region::classical("Y", 2),
            &t,
        )
        .unwrap();
        let plus = proj([s, s]);
        let u = update_rule_decompose(&ins, &plus, 0, &t).unwrap();
        assert!((u.probability - 0.5).abs() < 1e-14);
        let zero_b = Operator::from_diagonal(&[Region::new("B", 2)], &[1.0, 0.0]).unwrap();
        assert!(frob_distance(&u.conditioned, &zero_b) < 1e-12);
        // A pure input conditioned on any possible outcome is unchanged.
        assert!(frob_distance(&u.retrodictive, &plus) < 1e-12);
        let mixed_b = Operator::identity(&[Region::new("B", 2)]).unwrap().scaled(0.5);
        assert!(frob_distance(&u.nonselective, &mixed_b) < 1e-13);
        assert!(u.factorization_defect < 1e-12);
    }

    #[test]
    fn projection_differs_from_conditioning() {
        let t = Tolerances::default();
        let s = 0.5f64.sqrt();
        let e = proj([s, s]);
        let rho = Operator::from_diagonal(&[a()], &[0.75, 0.25]).unwrap();
        let p = generalized_projection(&e, &rho, &t).unwrap();
        let q = conditioned_state(&e, &rho, &t).unwrap();
        assert!(frob_distance(&p, &e) < 1e-13);
        let h = 3f64.sqrt() / 4.0;
        let want = Operator::new(
            vec![a()],
            Matrix::from_row_slice(2, 2, &[c(0.75), c(h), c(h), c(0.25)]),
        )
        .unwrap();
        assert!(frob_distance(&q, &want) < 1e-13);
        assert!(frob_distance(&p, &q) > 0.05);
    }

    #[test]
    fn trivial_and_lueders_instruments() {
        let t = Tolerances::default();
        let half = Matrix::identity(2, 2) * c(0.5f64.sqrt());
        let trivial = Instrument::new(
            a(),
            Region::new("B", 2),
            Region::classical("Y", 2),
            vec![vec![half.clone()], vec![half]],
            &t,
        )
        .unwrap();
        let r = info_disturbance_check(&trivial, INFO_DISTURBANCE_THRESHOLD, &t).unwrap();
        assert!(!r.informative && !r.disturbing);
        let z = Instrument::lueders(
            &[proj([1., 0.]), proj([0., 1.])],
            a(),
            Region::new("B", 2),
            Region::classical("Y", 2),
            &t,
        )
        .unwrap();
        let r = info_disturbance_check(&z, INFO_DISTURBANCE_THRESHOLD, &t).unwrap();
        assert!(r.informative && r.disturbing);
    }
}
