//! Small fixed examples that print both sides of an identity or inequality.

use crate::alternative::{alt_conditional, AltOrder};
use crate::bayes::retrodict;
use crate::classical::ClassicalDistribution;
use crate::conditional::JointState;
use crate::error::{Error, Result};
use crate::hybrid::HybridConditional;
use crate::limitations::{mixed_causal_demo, w_state, w_state_demo};
use crate::region::{frob_distance, Operator, Region, C64};
use crate::spectral::Tolerances;
use crate::steering::{epr_joints, steering_ensemble};
use crate::update::{conditioned_state, generalized_projection};

#[derive(Clone, Debug)]
pub struct Demo {
    pub name: &'static str,
    pub summary: &'static str,
    pub operators: Vec<(String, Operator)>,
    pub values: Vec<(String, f64)>,
    pub verdict: String,
    /// Whether the verdict is the expected one.
    pub passed: bool,
}

pub const DEMOS: [&str; 6] = [
    "w-state",
    "mixed-causal",
    "unbiased-retrodiction",
    "steering-epr",
    "projection-vs-conditioning",
    "alt-conditionals",
];

pub fn run_demo(name: &str, tol: &Tolerances) -> Result<Demo> {
    match name {
        "w-state" => w_state_report(tol),
        "mixed-causal" => mixed_causal_report(tol),
        "unbiased-retrodiction" => unbiased_retrodiction(tol),
        "steering-epr" => steering_epr(tol),
        "projection-vs-conditioning" => projection_vs_conditioning(tol),
        "alt-conditionals" => alt_conditionals(tol),
        _ => Err(Error::Domain(format!(
            "unknown demo `{name}`; available: {}",
            DEMOS.join(", ")
        ))),
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn ket(regions: &[Region], v: &[f64]) -> Result<Operator> {
    let v: Vec<C64> = v.iter().map(|x| c(*x)).collect();
    Operator::ket_bra(regions, &v)
}

fn w_state_report(tol: &Tolerances) -> Result<Demo> {
    let r = w_state_demo(tol)?;
    let differ = r.distance > 1e-3;
    Ok(Demo {
        name: "w-state",
        summary: "conditioning AB on C in one step versus chaining B|AC after A|C",
        operators: vec![
            ("rho_ABC".into(), w_state()),
            ("one_step".into(), r.lhs),
            ("chained".into(), r.rhs),
        ],
        values: vec![("distance".into(), r.distance)],
        verdict: if differ { "sides differ".into() } else { "sides agree".into() },
        passed: differ,
    })
}

fn mixed_causal_report(tol: &Tolerances) -> Result<Demo> {
    let r = mixed_causal_demo(2, tol)?;
    let ok = r.star_error <= 1e-10 && r.star_marginals_ok == [false, true, false];
    let [ab, ac, bc] = r.product_marginal_errors;
    Ok(Demo {
        name: "mixed-causal",
        summary: "identity channel A to B with A maximally entangled with C",
        operators: vec![
            ("star_joint".into(), r.star_joint),
            ("star_closed_form".into(), r.star_closed_form),
            ("product".into(), r.product),
        ],
        values: vec![
            ("star_error".into(), r.star_error),
            ("star_marginal_ab_ok".into(), r.star_marginals_ok[0] as u8 as f64),
            ("star_marginal_ac_ok".into(), r.star_marginals_ok[1] as u8 as f64),
            ("star_marginal_bc_ok".into(), r.star_marginals_ok[2] as u8 as f64),
            ("product_error".into(), r.product_error),
            ("product_hermiticity_defect".into(), r.product_hermiticity_defect),
            ("product_marginal_ab_error".into(), ab),
            ("product_marginal_ac_error".into(), ac),
            ("product_marginal_bc_error".into(), bc),
        ],
        verdict: if ok {
            "star joint is rho_AC (x) I_B/d and keeps only the AC marginal; the plain product keeps all marginals but is not Hermitian".into()
        } else {
            "unexpected mixed-causal joint".into()
        },
        passed: ok,
    })
}

fn unbiased_retrodiction(tol: &Tolerances) -> Result<Demo> {
    let a = Region::new("A", 2);
    let s = 0.5f64.sqrt();
    let states = vec![
        ket(std::slice::from_ref(&a), &[1.0, 0.0])?,
        ket(std::slice::from_ref(&a), &[0.0, 1.0])?,
        ket(std::slice::from_ref(&a), &[s, s])?,
        ket(std::slice::from_ref(&a), &[s, -s])?,
    ];
    let x = Region::classical("X", 4);
    let ens = HybridConditional::from_ensemble(&states, &x, tol)?;
    let prior = ClassicalDistribution::uniform(&x);
    let povm = HybridConditional::from_povm(
        &[
            Operator::from_diagonal(std::slice::from_ref(&a), &[1.0, 0.0])?,
            Operator::from_diagonal(std::slice::from_ref(&a), &[0.0, 1.0])?,
        ],
        &Region::classical("Y", 2),
        tol,
    )?;
    let r = retrodict(&prior, &ens, &povm, tol)?;
    let d = a.dim as f64;
    let mut povm_err = 0.0f64;
    for (k, st) in states.iter().enumerate() {
        let want = st.scaled(d * prior.probs()[k]);
        povm_err = povm_err.max(frob_distance(&r.retro_povm.components()[k], &want));
    }
    let mut state_err = 0.0f64;
    for (y, e) in povm.components().iter().enumerate() {
        let want = e.scaled(1.0 / e.trace().re);
        state_err = state_err.max(frob_distance(&r.retro_states.components()[y], &want));
    }
    let mixed = frob_distance(&r.rho_a, &Operator::identity(std::slice::from_ref(&a))?.scaled(0.5));
    let ok = povm_err <= 1e-12 && state_err <= 1e-12 && mixed <= 1e-12;
    let mut operators = vec![("rho_A".into(), r.rho_a.clone())];
    for (k, e) in r.retro_povm.components().iter().enumerate() {
        operators.push((format!("retro_povm_{k}"), e.clone()));
    }
    for (y, st) in r.retro_states.components().iter().enumerate() {
        operators.push((format!("retro_state_{y}"), st.clone()));
    }
    operators.push(("predictive_joint".into(), r.predictive_joint.clone()));
    operators.push(("retrodictive_joint".into(), r.retrodictive_joint.clone()));
    Ok(Demo {
        name: "unbiased-retrodiction",
        summary: "four qubit states with equal weights, so the average state is I/2, measured in the computational basis",
        operators,
        values: vec![
            ("avg_state_vs_identity_over_d".into(), mixed),
            ("retro_povm_vs_d_p_rho".into(), povm_err),
            ("retro_state_vs_normalized_effect".into(), state_err),
            (
                "predictive_vs_retrodictive".into(),
                frob_distance(&r.predictive_joint, &r.retrodictive_joint),
            ),
        ],
        verdict: if ok {
            "retrodictive POVM is d P(x) rho_x and retrodicted states are E_y / Tr E_y".into()
        } else {
            "unbiased-source forms not reproduced".into()
        },
        passed: ok,
    })
}

fn steering_epr(tol: &Tolerances) -> Result<Demo> {
    let (a, b) = (Region::new("A", 2), Region::new("B", 2));
    let s = 0.5f64.sqrt();
    let bell = ket(&[a.clone(), b.clone()], &[s, 0.0, 0.0, s])?;
    let joint = JointState::acausal(bell.clone(), tol)?;
    let z = HybridConditional::from_povm(
        &[
            Operator::from_diagonal(std::slice::from_ref(&a), &[1.0, 0.0])?,
            Operator::from_diagonal(std::slice::from_ref(&a), &[0.0, 1.0])?,
        ],
        &Region::classical("X", 2),
        tol,
    )?;
    let x = HybridConditional::from_povm(
        &[
            ket(std::slice::from_ref(&b), &[s, s])?,
            ket(std::slice::from_ref(&b), &[s, -s])?,
        ],
        &Region::classical("Y", 2),
        tol,
    )?;
    let e = epr_joints(&joint, &z, &x, tol)?;
    let st = steering_ensemble(&joint, &x, tol)?;
    let mut operators = vec![
        ("rho_AB".into(), bell),
        ("direct".into(), e.direct.clone()),
        ("rightward".into(), e.rightward.clone()),
        ("leftward".into(), e.leftward.clone()),
    ];
    for (y, s) in st.states.iter().enumerate() {
        if let Some(s) = s {
            operators.push((format!("steered_A_given_y{y}"), s.clone()));
        }
    }
    let disc = e.max_discrepancy();
    let ok = disc <= 1e-8 && st.no_signalling_defect <= 1e-10;
    let mut values = vec![
        ("route_discrepancy".into(), disc),
        ("no_signalling_defect".into(), st.no_signalling_defect),
    ];
    for (y, p) in st.probabilities.iter().enumerate() {
        values.push((format!("p_y{y}"), *p));
    }
    Ok(Demo {
        name: "steering-epr",
        summary: "Bell pair, Z measured on A, X measured on B",
        operators,
        values,
        verdict: if ok {
            "direct, rightward and leftward joints agree; steered ensemble averages to rho_A".into()
        } else {
            "steering routes disagree".into()
        },
        passed: ok,
    })
}

fn projection_vs_conditioning(tol: &Tolerances) -> Result<Demo> {
    let a = Region::new("A", 2);
    let s = 0.5f64.sqrt();
    let rho = Operator::from_diagonal(std::slice::from_ref(&a), &[0.75, 0.25])?;
    let plus = ket(std::slice::from_ref(&a), &[s, s])?;
    let zero = ket(std::slice::from_ref(&a), &[1.0, 0.0])?;
    let proj = generalized_projection(&plus, &rho, tol)?;
    let cond = conditioned_state(&plus, &rho, tol)?;
    let gap = frob_distance(&proj, &cond);
    let proj_c = generalized_projection(&zero, &rho, tol)?;
    let cond_c = conditioned_state(&zero, &rho, tol)?;
    let gap_c = frob_distance(&proj_c, &cond_c);
    let ok = gap > 1e-3 && gap_c <= 1e-12;
    Ok(Demo {
        name: "projection-vs-conditioning",
        summary: "rho = diag(3/4, 1/4); E = |+><+| (non-commuting) and E = |0><0| (commuting)",
        operators: vec![
            ("rho".into(), rho),
            ("E_plus".into(), plus),
            ("projected".into(), proj),
            ("conditioned".into(), cond),
            ("projected_commuting".into(), proj_c),
            ("conditioned_commuting".into(), cond_c),
        ],
        values: vec![
            ("distance_non_commuting".into(), gap),
            ("distance_commuting".into(), gap_c),
        ],
        verdict: if ok {
            "the two update formulas differ on the non-commuting instance and agree on the commuting one".into()
        } else {
            "unexpected agreement pattern".into()
        },
        passed: ok,
    })
}

fn alt_conditionals(tol: &Tolerances) -> Result<Demo> {
    let (a, b) = (Region::new("A", 2), Region::new("B", 2));
    let regions = [a.clone(), b.clone()];
    // 0.7 |ψ⟩⟨ψ| + 0.3 I/4 with |ψ⟩ = 0.8|00⟩ + 0.6|1+⟩.
    let h = 0.6 * 0.5f64.sqrt();
    let psi = ket(&regions, &[0.8, 0.0, h, h])?;
    let rho = psi
        .scaled(0.7)
        .add(&Operator::identity(&regions)?.scaled(0.3 / 4.0))?;
    let commuting = Operator::from_diagonal(&regions, &[0.1, 0.2, 0.3, 0.4])?;
    let orders = [AltOrder::Finite(1), AltOrder::Finite(2), AltOrder::Finite(3), AltOrder::Infinite];
    let label = |o: AltOrder| match o {
        AltOrder::Finite(n) => format!("n{n}"),
        AltOrder::Infinite => "n_inf".into(),
    };
    let mut operators = vec![("rho_AB".into(), rho.clone())];
    let mut values = Vec::new();
    let base = alt_conditional(&rho, &["A"], AltOrder::Finite(1), tol)?.op;
    let base_c = alt_conditional(&commuting, &["A"], AltOrder::Finite(1), tol)?.op;
    let standard = standard_conditional(&rho, tol)?;
    values.push(("n1_vs_standard".into(), frob_distance(&base, &standard)));
    let mut spread = 0.0f64;
    let mut spread_c = 0.0f64;
    for o in orders {
        let op = alt_conditional(&rho, &["A"], o, tol)?.op;
        let d = frob_distance(&op, &base);
        spread = spread.max(d);
        values.push((format!("{}_vs_n1", label(o)), d));
        operators.push((format!("conditional_{}", label(o)), op));
        let oc = alt_conditional(&commuting, &["A"], o, tol)?.op;
        let dc = frob_distance(&oc, &base_c);
        spread_c = spread_c.max(dc);
        values.push((format!("commuting_{}_vs_n1", label(o)), dc));
    }
    let ok = values[0].1 <= 1e-10 && spread > 1e-3 && spread_c <= 1e-9;
    Ok(Demo {
        name: "alt-conditionals",
        summary: "members n = 1, 2, 3 and the n -> infinity limit on a non-commuting and a commuting joint",
        operators,
        values,
        verdict: if ok {
            "members differ on the non-commuting joint and coincide on the commuting one".into()
        } else {
            "unexpected pattern across orders".into()
        },
        passed: ok,
    })
}

/// Ordinary acausal conditional `ρ_AB ⋆ ρ_A^{-1}`.
fn standard_conditional(rho: &Operator, tol: &Tolerances) -> Result<Operator> {
    let joint = JointState::acausal(rho.clone(), tol)?;
    Ok(crate::conditional::conditional_from_joint(&joint, &["A"], tol)?.into_op())
}
