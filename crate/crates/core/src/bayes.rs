//! Quantum Bayes inversion and its special cases: recovery maps, the
//! pretty-good measurement, posterior states and retrodiction.

use crate::channel::{compose_conditionals, propagate, KrausChannel, MatrixMap};
use crate::classical::ClassicalDistribution;
use crate::conditional::{support_of, ConditionalState, Flavor, Support};
use crate::error::{Error, Result};
use crate::hybrid::{HybridConditional, HybridKind};
use crate::region::{
    classical_block_sum, padded_mul, padded_product, partial_trace, Operator, Region,
};
use crate::spectral::{check_density, herm_sqrt, star, support_pinv, support_projector, Tolerances};

fn require_prior(prior: &Operator, c: &ConditionalState, tol: &Tolerances) -> Result<()> {
    if &prior.labels() != c.conditioning() {
        return Err(Error::InvalidState(format!(
            "prior acts on {:?} but the conditional is conditioned on {:?}",
            prior.labels(),
            c.conditioning()
        )));
    }
    check_density(prior, tol)
}

/// `ρ_{A|B} = ρ_{B|A} ⋆ (ρ_A ρ_B^{-1})`, i.e.
/// `(ρ_A^{1/2} ⊗ ρ_B^{-1/2}) ρ_{B|A} (ρ_A^{1/2} ⊗ ρ_B^{-1/2})` with
/// `ρ_B = Tr_A[ρ_{B|A} ρ_A]`. The flavor is preserved. When `ρ_B` is
/// rank-deficient the result is supported on `supp(ρ_B)`.
pub fn bayes_invert(
    c: &ConditionalState,
    prior: &Operator,
    tol: &Tolerances,
) -> Result<ConditionalState> {
    require_prior(prior, c, tol)?;
    let rho_b = propagate(prior, c, tol)?;
    let rho_b = rho_b.hermitian_part();
    let sa = herm_sqrt(prior, tol)?;
    let sb = support_pinv(&rho_b, -0.5, tol)?;
    let f = padded_mul(&sa, &sb)?;
    let op = padded_product(&[&f, c.op(), &f])?;
    let joint = star(c.op(), prior, tol)?;
    let support = support_of(&rho_b, &joint, tol)?;
    let out = ConditionalState::from_parts(
        op,
        c.conditioning().clone(),
        c.conditioned().clone(),
        c.flavor(),
        support,
    );
    out.validate(tol)?;
    Ok(out)
}

/// Barnum-Knill recovery map for a channel and a prior on its input:
/// `F(X) = ρ_A^{1/2} E†(ρ_B^{-1/2} X ρ_B^{-1/2}) ρ_A^{1/2}` with `ρ_B = E(ρ_A)`.
/// Built from the Kraus representation, independently of [`bayes_invert`].
pub fn barnum_knill_map(ch: &KrausChannel, prior: &Operator, tol: &Tolerances) -> Result<MatrixMap> {
    if prior.labels().into_iter().collect::<Vec<_>>() != vec![ch.input().label.clone()] {
        return Err(Error::InvalidState(format!(
            "prior must act on the channel input `{}`",
            ch.input().label
        )));
    }
    check_density(prior, tol)?;
    let rho_b = ch.apply(prior)?.hermitian_part();
    let sa = herm_sqrt(prior, tol)?;
    let sb = support_pinv(&rho_b, -0.5, tol)?;
    MatrixMap::from_action(ch.output(), std::slice::from_ref(ch.input()), Flavor::Causal, |x| {
        let inner = padded_product(&[&sb, x, &sb])?;
        let back = ch.dual_apply(&inner)?;
        padded_product(&[&sa, &back, &sa])
    })
}

fn ensemble_average(
    ens: &HybridConditional,
    prior: &ClassicalDistribution,
) -> Result<(Operator, Vec<f64>)> {
    if ens.kind() != HybridKind::Ensemble {
        return Err(Error::InvalidEnsemble("expected an ensemble conditional".into()));
    }
    if prior.regions().len() != 1 || prior.regions()[0].label != ens.classical().label {
        return Err(Error::InvalidClassical(format!(
            "prior must be a distribution over `{}`",
            ens.classical().label
        )));
    }
    let p = prior.probs().to_vec();
    if p.len() != ens.components().len() {
        return Err(Error::InvalidClassical(format!(
            "prior has {} values but the ensemble has {} members",
            p.len(),
            ens.components().len()
        )));
    }
    let mut rho = Operator::zeros(&ens.quantum_regions())?;
    for (px, r) in p.iter().zip(ens.components()) {
        rho = rho.add(&r.scaled(*px))?;
    }
    Ok((rho, p))
}

/// `E_x = P(x) ρ^{-1/2} ρ_x ρ^{-1/2}` with `ρ = Σ_x P(x) ρ_x`, as a hybrid
/// conditional `X|A`. The elements sum to the projector onto `supp(ρ)`.
pub fn pretty_good_measurement(
    ens: &HybridConditional,
    prior: &ClassicalDistribution,
    tol: &Tolerances,
) -> Result<HybridConditional> {
    let (rho, p) = ensemble_average(ens, prior)?;
    let w = support_pinv(&rho, -0.5, tol)?;
    let elements = ens
        .components()
        .iter()
        .zip(&p)
        .map(|(r, px)| Ok(padded_product(&[&w, r, &w])?.scaled(*px)))
        .collect::<Result<Vec<_>>>()?;
    let x = Region::classical(ens.classical().label.clone(), elements.len());
    let op = classical_block_sum(&x, &elements)?;
    let quantum: Vec<String> = ens.quantum_regions().into_iter().map(|r| r.label).collect();
    let projector = support_projector(&rho, tol)?;
    let cond = ConditionalState::with_support(
        op,
        &[x.label.clone()],
        &quantum,
        Flavor::Causal,
        Support {
            projector,
            residual: 0.0,
        },
        tol,
    )?;
    HybridConditional::from_conditional(cond, tol)
}

/// Posterior states `ρ_y = ρ^{1/2} E_y ρ^{1/2} / Tr(E_y ρ)`.
#[derive(Clone, Debug)]
pub struct PosteriorStates {
    pub probabilities: Vec<f64>,
    /// `None` for outcomes of zero probability.
    pub states: Vec<Option<Operator>>,
    /// Outcomes left out because their probability vanishes.
    pub omitted: Vec<usize>,
    /// `ϱ_{A|Y}`, supported on the outcomes with non-zero probability.
    pub conditional: HybridConditional,
}

/// Posterior states after a POVM, by the direct formula.
pub fn fuchs_posterior_states(
    povm: &HybridConditional,
    prior: &Operator,
    tol: &Tolerances,
) -> Result<PosteriorStates> {
    if povm.kind() != HybridKind::Povm {
        return Err(Error::InvalidPovm("expected a POVM conditional".into()));
    }
    require_prior(prior, povm.conditional(), tol)?;
    let s = herm_sqrt(prior, tol)?;
    let quantum = povm.quantum_regions();
    let mut probabilities = Vec::new();
    let mut states = Vec::new();
    let mut omitted = Vec::new();
    let mut blocks = Vec::new();
    for (y, e) in povm.components().iter().enumerate() {
        let p = padded_mul(e, prior)?.trace().re;
        probabilities.push(p.max(0.0));
        if p <= tol.eig_zero {
            omitted.push(y);
            states.push(None);
            blocks.push(Operator::zeros(&quantum)?);
        } else {
            let st = padded_product(&[&s, e, &s])?.scaled(1.0 / p);
            blocks.push(st.clone());
            states.push(Some(st));
        }
    }
    let y = Region::classical(povm.classical().label.clone(), blocks.len());
    let op = classical_block_sum(&y, &blocks)?;
    let mask: Vec<f64> = probabilities
        .iter()
        .enumerate()
        .map(|(k, _)| if omitted.contains(&k) { 0.0 } else { 1.0 })
        .collect();
    let projector = Operator::from_diagonal(std::slice::from_ref(&y), &mask)?;
    let qlabels: Vec<String> = quantum.iter().map(|r| r.label.clone()).collect();
    let cond = ConditionalState::with_support(
        op,
        &qlabels,
        &[y.label.clone()],
        Flavor::Causal,
        Support {
            projector,
            residual: 0.0,
        },
        tol,
    )?;
    Ok(PosteriorStates {
        probabilities,
        states,
        omitted,
        conditional: HybridConditional::from_conditional(cond, tol)?,
    })
}

/// Prepare-and-measure scenario analysed forwards and backwards.
#[derive(Clone, Debug)]
pub struct Retrodiction {
    /// `ρ_A = Tr_X[ϱ_{A|X} ρ_X]`.
    pub rho_a: Operator,
    /// `ρ_Y = Tr_A[ϱ_{Y|A} ρ_A]`.
    pub rho_y: Operator,
    /// `ϱ_{A|Y}`: states retrodicted from the outcomes.
    pub retro_states: HybridConditional,
    /// `ϱ_{X|A}`: retrodictive POVM for the preparation variable.
    pub retro_povm: HybridConditional,
    /// `Tr_A[ϱ_{Y|A} ϱ_{A|X}] ⋆ ρ_X`.
    pub predictive_joint: Operator,
    /// `Tr_A[ϱ_{X|A} ϱ_{A|Y}] ⋆ ρ_Y`.
    pub retrodictive_joint: Operator,
}

fn check_pipeline(ens: &HybridConditional, povm: &HybridConditional) -> Result<()> {
    if ens.kind() != HybridKind::Ensemble || povm.kind() != HybridKind::Povm {
        return Err(Error::InvalidConditional(
            "retrodiction needs an ensemble followed by a POVM".into(),
        ));
    }
    Ok(())
}

pub fn retrodict(
    prior: &ClassicalDistribution,
    ens: &HybridConditional,
    povm: &HybridConditional,
    tol: &Tolerances,
) -> Result<Retrodiction> {
    check_pipeline(ens, povm)?;
    let rho_x = prior.embed();
    let forward = compose_conditionals(povm.conditional(), ens.conditional(), tol)?;
    let predictive_joint = star(forward.op(), &rho_x, tol)?;

    let rho_a = propagate(&rho_x, ens.conditional(), tol)?;
    let retro_povm = bayes_invert(ens.conditional(), &rho_x, tol)?;
    let rho_y = propagate(&rho_a, povm.conditional(), tol)?;
    let retro_states = bayes_invert(povm.conditional(), &rho_a, tol)?;
    let backward = compose_conditionals(&retro_povm, &retro_states, tol)?;
    let retrodictive_joint = star(backward.op(), &rho_y, tol)?;
    Ok(Retrodiction {
        rho_a,
        rho_y,
        retro_states: HybridConditional::from_conditional(retro_states, tol)?,
        retro_povm: HybridConditional::from_conditional(retro_povm, tol)?,
        predictive_joint,
        retrodictive_joint,
    })
}

/// Prepare, transmit through `channel` (`B|A`), then measure (`Y|B`).
/// Returns `(predictive, retrodictive)` joints over `XY`:
/// `Tr_AB[ϱ_{Y|B} ϱ_{B|A} ϱ_{A|X}] ⋆ ρ_X` and
/// `Tr_AB[ϱ_{X|A} ϱ_{A|B} ϱ_{B|Y}] ⋆ ρ_Y`.
pub fn retrodict_through_channel(
    prior: &ClassicalDistribution,
    ens: &HybridConditional,
    channel: &ConditionalState,
    povm: &HybridConditional,
    tol: &Tolerances,
) -> Result<(Operator, Operator)> {
    check_pipeline(ens, povm)?;
    let rho_x = prior.embed();
    let mut ab: Vec<String> = channel.conditioning_labels();
    ab.extend(channel.conditioned_labels());
    let fwd = partial_trace(
        &padded_product(&[povm.op(), channel.op(), ens.op()])?,
        &ab,
    )?;
    let predictive = star(&fwd, &rho_x, tol)?;

    let rho_a = propagate(&rho_x, ens.conditional(), tol)?;
    let rho_b = propagate(&rho_a, channel, tol)?;
    let rho_y = propagate(&rho_b, povm.conditional(), tol)?;
    let x_given_a = bayes_invert(ens.conditional(), &rho_x, tol)?;
    let a_given_b = bayes_invert(channel, &rho_a, tol)?;
    let b_given_y = bayes_invert(povm.conditional(), &rho_b, tol)?;
    let bwd = partial_trace(
        &padded_product(&[x_given_a.op(), a_given_b.op(), b_given_y.op()])?,
        &ab,
    )?;
    let retrodictive = star(&bwd, &rho_y, tol)?;
    Ok((predictive, retrodictive))
}

/// `Tr_X[σ_{A|X} |x⟩⟨x|]`: the state assigned once `X = x` is learned.
pub fn condition_on_classical(
    ens: &HybridConditional,
    x: usize,
    tol: &Tolerances,
) -> Result<Operator> {
    if ens.kind() != HybridKind::Ensemble {
        return Err(Error::InvalidEnsemble("expected an ensemble conditional".into()));
    }
    let xr = ens.classical();
    if x >= xr.dim {
        return Err(Error::IndexOutOfRange {
            label: xr.label.clone(),
            index: x,
            dim: xr.dim,
        });
    }
    let point = Operator::unit(xr, x, x)?;
    propagate(&point, ens.conditional(), tol)
}

/// Jeffrey conditioning: keep `ρ_{B|A}` and propagate a revised marginal.
pub fn jeffrey_update(
    c: &ConditionalState,
    revised_marginal: &Operator,
    tol: &Tolerances,
) -> Result<Operator> {
    propagate(revised_marginal, c, tol)
}
