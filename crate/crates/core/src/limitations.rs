//! Worked counterexamples where the ⋆-product calculus does not extend:
//! a three-party chain rule that fails, and joints mixing a causal link with
//! an acausal bystander.

use crate::channel::{jamiolkowski_to_state, KrausChannel};
use crate::conditional::ConditionalState;
use crate::error::Result;
use crate::region::{
    frob_distance, padded_mul, partial_trace, tensor, Matrix, Operator, Region, C64,
};
use crate::spectral::{star, star_inv, Tolerances};

#[derive(Clone, Debug)]
pub struct WStateReport {
    /// `ρ_C^{-1/2} ρ_ABC ρ_C^{-1/2}`.
    pub lhs: Operator,
    /// `ρ_{A|C}^{1/2} ρ_{B|AC} ρ_{A|C}^{1/2}` with each conditional built
    /// from the marginals of the same state.
    pub rhs: Operator,
    pub distance: f64,
}

/// `|ψ⟩ = ½(|001⟩ + |010⟩) + (1/√2)|100⟩` on `ABC`.
pub fn w_state() -> Operator {
    let q = |l: &str| Region::new(l, 2);
    let mut v = vec![C64::new(0.0, 0.0); 8];
    v[0b001] = C64::new(0.5, 0.0);
    v[0b010] = C64::new(0.5, 0.0);
    v[0b100] = C64::new(0.5f64.sqrt(), 0.0);
    Operator::ket_bra(&[q("A"), q("B"), q("C")], &v).expect("8-dimensional")
}

/// Conditioning `AB` on `C` in one step versus chaining `B|AC` after `A|C`.
pub fn w_state_demo(tol: &Tolerances) -> Result<WStateReport> {
    let rho = w_state();
    let rho_c = partial_trace(&rho, &["A", "B"])?;
    let rho_ac = partial_trace(&rho, &["B"])?;
    let lhs = star_inv(&rho, &rho_c, tol)?;
    let a_given_c = star_inv(&rho_ac, &rho_c, tol)?;
    let b_given_ac = star_inv(&rho, &rho_ac, tol)?;
    let rhs = star(&b_given_ac, &a_given_c, tol)?;
    let distance = frob_distance(&lhs, &rhs);
    Ok(WStateReport { lhs, rhs, distance })
}

#[derive(Clone, Debug)]
pub struct MixedCausalReport {
    pub dim: usize,
    /// `ϱ_{B|A} ⋆ ρ_AC` for the identity channel and a maximally entangled
    /// `ρ_AC`.
    pub star_joint: Operator,
    /// `ρ_AC ⊗ I_B / d`.
    pub star_closed_form: Operator,
    pub star_error: f64,
    /// Which bipartite marginals of the ⋆ joint are the expected ones
    /// (`AB`, `AC`, `BC`).
    pub star_marginals_ok: [bool; 3],
    /// Ordinary product `ϱ_{B|A} ρ_AC`.
    pub product: Operator,
    /// `(1/d) Σ_{jkm} |j⟩⟨k|_A ⊗ |m⟩⟨j|_B ⊗ |m⟩⟨k|_C`.
    pub product_closed_form: Operator,
    pub product_error: f64,
    /// Largest entry of `|P - P†|` for the ordinary product.
    pub product_hermiticity_defect: f64,
    /// Distances of the ordinary product's `AB`, `AC`, `BC` marginals from
    /// the expected ones.
    pub product_marginal_errors: [f64; 3],
}

fn max_entangled(x: &Region, y: &Region) -> Result<Operator> {
    let d = x.dim;
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for j in 0..d {
        v[j * d + j] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    Operator::ket_bra(&[x.clone(), y.clone()], &v)
}

pub fn mixed_causal_demo(d: usize, tol: &Tolerances) -> Result<MixedCausalReport> {
    let (a, b, c) = (Region::new("A", d), Region::new("B", d), Region::new("C", d));
    let link: ConditionalState =
        jamiolkowski_to_state(&KrausChannel::identity(a.clone(), b.clone(), tol)?, tol)?;
    let rho_ac = max_entangled(&a, &c)?;
    let inv_d = 1.0 / d as f64;

    let star_joint = star(link.op(), &rho_ac, tol)?;
    let star_closed_form = tensor(&rho_ac, &Operator::identity(std::slice::from_ref(&b))?.scaled(inv_d))?;
    let star_error = frob_distance(&star_joint, &star_closed_form);

    let want_ab = link.op().scaled(inv_d);
    let want_bc = max_entangled(&b, &c)?;
    let marg = |m: &Operator, traced: &str| partial_trace(m, &[traced]);
    let tol_ok = |x: f64| x <= tol.eq_tol;
    let star_marginals_ok = [
        tol_ok(frob_distance(&marg(&star_joint, "C")?, &want_ab)),
        tol_ok(frob_distance(&marg(&star_joint, "B")?, &rho_ac)),
        tol_ok(frob_distance(&marg(&star_joint, "A")?, &want_bc)),
    ];

    let product = padded_mul(link.op(), &rho_ac)?;
    let n = d * d * d;
    let mut m = Matrix::zeros(n, n);
    for j in 0..d {
        for k in 0..d {
            for mm in 0..d {
                // row |j m m⟩, column |k j k⟩ in (A, B, C) order
                m[(j * d * d + mm * d + mm, k * d * d + j * d + k)] = C64::new(inv_d, 0.0);
            }
        }
    }
    let product_closed_form = Operator::new(vec![a.clone(), b.clone(), c.clone()], m)?;
    let product_error = frob_distance(&product, &product_closed_form);
    let product_hermiticity_defect = product.hermiticity_defect();
    let product_marginal_errors = [
        frob_distance(&marg(&product, "C")?, &want_ab),
        frob_distance(&marg(&product, "B")?, &rho_ac),
        frob_distance(&marg(&product, "A")?, &want_bc),
    ];
    Ok(MixedCausalReport {
        dim: d,
        star_joint,
        star_closed_form,
        star_error,
        star_marginals_ok,
        product,
        product_closed_form,
        product_error,
        product_hermiticity_defect,
        product_marginal_errors,
    })
}

#[derive(Clone, Debug)]
pub struct LimitationReport {
    pub w_state: WStateReport,
    pub mixed_causal: MixedCausalReport,
}

pub fn limitation_demos(tol: &Tolerances) -> Result<LimitationReport> {
    Ok(LimitationReport {
        w_state: w_state_demo(tol)?,
        mixed_causal: mixed_causal_demo(2, tol)?,
    })
}
