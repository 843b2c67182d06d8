//! A family of alternative conditional operators,
//! `ρ^{(n)} = (ρ_AB^{1/n} ⋆ ρ_A^{-1/n})^n`, and its `n → ∞` limit
//! `exp(log ρ_AB - log ρ_A ⊗ I)`. All members coincide when `ρ_AB` commutes
//! with `ρ_A ⊗ I`; `n = 1` is the ordinary acausal conditional.

use crate::error::{Error, Result};
use crate::region::{partial_trace, LabelSet, Operator, Region};
use crate::spectral::{spectrum, support_pinv, support_projector, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AltOrder {
    Finite(u32),
    Infinite,
}

#[derive(Clone, Debug)]
pub struct AltConditional {
    pub op: Operator,
    pub order: AltOrder,
    /// Set when logarithms were taken on supports only because the joint or
    /// its marginal was rank-deficient.
    pub support_restricted: bool,
}

fn marginal<S: AsRef<str>>(joint: &Operator, conditioning: &[S]) -> Result<Operator> {
    let cond: LabelSet = conditioning.iter().map(|s| s.as_ref().to_string()).collect();
    for l in &cond {
        if !joint.has_label(l) {
            return Err(Error::LabelNotFound(l.clone()));
        }
    }
    let traced: Vec<String> = joint.labels().into_iter().filter(|l| !cond.contains(l)).collect();
    if traced.is_empty() {
        return Err(Error::InvalidConditional("no conditioned regions".into()));
    }
    partial_trace(joint, &traced)
}

fn power(m: &Operator, n: u32) -> Result<Operator> {
    let mut acc = m.clone();
    for _ in 1..n {
        acc = acc.map_matrix(|a| a * m.matrix())?;
    }
    Ok(acc)
}

/// Member `order` of the family. `Infinite` requires full-rank `ρ_AB` and
/// `ρ_A`; otherwise a domain error is returned and
/// [`alt_conditional_support_restricted`] can be used instead.
pub fn alt_conditional<S: AsRef<str>>(
    joint: &Operator,
    conditioning: &[S],
    order: AltOrder,
    tol: &Tolerances,
) -> Result<AltConditional> {
    let rho_a = marginal(joint, conditioning)?;
    match order {
        AltOrder::Finite(0) => Err(Error::Domain("order must be at least 1".into())),
        AltOrder::Finite(n) => {
            let k = n as f64;
            let root = support_pinv(joint, 1.0 / k, tol)?;
            let w = support_pinv(&rho_a, -0.5 / k, tol)?;
            let inner = crate::region::padded_product(&[&w, &root, &w])?;
            Ok(AltConditional {
                op: power(&inner, n)?,
                order,
                support_restricted: false,
            })
        }
        AltOrder::Infinite => {
            for (name, m) in [("joint", joint), ("marginal", &rho_a)] {
                let s = spectrum(m, tol)?;
                if s.support_rank < m.side() {
                    return Err(Error::Domain(format!(
                        "{name} has rank {} of {}; logarithm undefined",
                        s.support_rank,
                        m.side()
                    )));
                }
            }
            let op = log_difference_exp(joint, &rho_a, tol)?;
            Ok(AltConditional {
                op,
                order,
                support_restricted: false,
            })
        }
    }
}

/// The `n → ∞` member with logarithms taken on supports and the exponential
/// taken on the support of the joint.
pub fn alt_conditional_support_restricted<S: AsRef<str>>(
    joint: &Operator,
    conditioning: &[S],
    tol: &Tolerances,
) -> Result<AltConditional> {
    let rho_a = marginal(joint, conditioning)?;
    let op = log_difference_exp(joint, &rho_a, tol)?;
    let full = spectrum(joint, tol)?.support_rank == joint.side()
        && spectrum(&rho_a, tol)?.support_rank == rho_a.side();
    Ok(AltConditional {
        op,
        order: AltOrder::Infinite,
        support_restricted: !full,
    })
}

fn log_on_support(m: &Operator, tol: &Tolerances) -> Result<Operator> {
    let s = spectrum(m, tol)?;
    m.map_matrix(|_| s.apply_on_support(f64::ln))
}

fn log_difference_exp(joint: &Operator, rho_a: &Operator, tol: &Tolerances) -> Result<Operator> {
    let regions: Vec<Region> = joint.regions().to_vec();
    let p = support_projector(joint, tol)?;
    let diff = log_on_support(joint, tol)?.sub(&log_on_support(rho_a, tol)?.embed(&regions)?)?;
    let h = crate::region::padded_product(&[&p, &diff, &p])?.hermitian_part();
    // exp on range(P); the kernel of P is mapped to zero afterwards.
    let s = spectrum(&h, tol)?;
    let e = h.map_matrix(|_| s.apply(f64::exp))?;
    crate::region::padded_product(&[&p, &e, &p])
}
