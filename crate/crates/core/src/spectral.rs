//! Hermitian spectral kernels: square roots, support pseudo-inverses, the
//! ⋆-product and validity predicates.
//!
//! Eigenvalues below `eig_zero × spectral radius` count as zero. Negative
//! eigenvalues inside that band are clamped; anything more negative is an
//! error.

use nalgebra::{DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::region::{padded_mul, partial_trace, partial_transpose, Matrix, Operator, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative eigenvalue cutoff for support and negativity decisions.
    pub eig_zero: f64,
    /// Allowed `max |M - M†|`, relative to `max(1, max |M|)`.
    pub herm_tol: f64,
    /// Frobenius tolerance for equality checks.
    pub eq_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eig_zero: 1e-10,
            herm_tol: 1e-10,
            eq_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn new(eig_zero: f64, herm_tol: f64, eq_tol: f64) -> Result<Self> {
        let t = Tolerances {
            eig_zero,
            herm_tol,
            eq_tol,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eig_zero", self.eig_zero),
            ("herm_tol", self.herm_tol),
            ("eq_tol", self.eq_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Eigendecomposition of a Hermitian operator, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: Matrix,
    /// Number of eigenvalues above the cutoff.
    pub support_rank: usize,
    /// The absolute cutoff used: `eig_zero × spectral radius`.
    pub cutoff: f64,
}

impl HermitianSpectrum {
    pub fn of(m: &Matrix, tol: &Tolerances) -> Result<Self> {
        let scale = m.iter().fold(1.0f64, |a, z| a.max(z.norm()));
        let n = m.nrows();
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in i..n {
                defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if defect > tol.herm_tol * scale {
            return Err(Error::NotHermitian(defect));
        }
        let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = Matrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        let radius = eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let cutoff = tol.eig_zero * radius;
        let support_rank = eigenvalues.iter().filter(|&&v| v > cutoff).count();
        Ok(HermitianSpectrum {
            eigenvalues,
            eigenvectors,
            support_rank,
            cutoff,
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    fn require_psd(&self) -> Result<()> {
        let lo = self.min_eigenvalue();
        if lo < -self.cutoff {
            return Err(Error::NegativeEigenvalue {
                value: lo,
                cutoff: self.cutoff,
            });
        }
        Ok(())
    }

    /// `Σ f(λ) |v⟩⟨v|` over all eigenpairs.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let d = DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| C64::new(f(l), 0.0)),
        );
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= d[j];
        }
        scaled * v.adjoint()
    }

    /// Like [`apply`](Self::apply), but eigenvalues at or below the cutoff map to zero.
    pub fn apply_on_support(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let cut = self.cutoff;
        self.apply(|l| if l > cut { f(l) } else { 0.0 })
    }

    pub fn support_projector(&self) -> Matrix {
        self.apply_on_support(|_| 1.0)
    }
}

pub fn spectrum(m: &Operator, tol: &Tolerances) -> Result<HermitianSpectrum> {
    HermitianSpectrum::of(m.matrix(), tol)
}

/// Positive square root of a positive semidefinite operator.
pub fn herm_sqrt(m: &Operator, tol: &Tolerances) -> Result<Operator> {
    let s = spectrum(m, tol)?;
    s.require_psd()?;
    m.map_matrix(|_| s.apply(|l| l.max(0.0).sqrt()))
}

/// Power of a positive semidefinite operator taken on its support; the kernel
/// maps to zero. `power = -1` is the Moore-Penrose inverse.
pub fn support_pinv(m: &Operator, power: f64, tol: &Tolerances) -> Result<Operator> {
    let s = spectrum(m, tol)?;
    s.require_psd()?;
    m.map_matrix(|_| s.apply_on_support(|l| l.powf(power)))
}

/// Projector onto the support of a positive semidefinite operator.
pub fn support_projector(m: &Operator, tol: &Tolerances) -> Result<Operator> {
    let s = spectrum(m, tol)?;
    s.require_psd()?;
    m.map_matrix(|_| s.support_projector())
}

/// Rank of a positive semidefinite operator at the relative cutoff.
pub fn support_rank(m: &Operator, tol: &Tolerances) -> Result<usize> {
    let s = spectrum(m, tol)?;
    s.require_psd()?;
    Ok(s.support_rank)
}

/// `M ⋆ N = N^{1/2} M N^{1/2}` with identity padding. `N` must be positive
/// semidefinite.
pub fn star(m: &Operator, n: &Operator, tol: &Tolerances) -> Result<Operator> {
    let r = herm_sqrt(n, tol)?;
    padded_mul(&padded_mul(&r, m)?, &r)
}

/// `M ⋆ N^{-1} = N^{-1/2} M N^{-1/2}`, using the support pseudo-inverse.
pub fn star_inv(m: &Operator, n: &Operator, tol: &Tolerances) -> Result<Operator> {
    let r = support_pinv(n, -0.5, tol)?;
    padded_mul(&padded_mul(&r, m)?, &r)
}

/// Hermitian function of a Hermitian operator, `Σ f(λ)|v⟩⟨v|`.
pub fn herm_apply(m: &Operator, f: impl Fn(f64) -> f64, tol: &Tolerances) -> Result<Operator> {
    let s = spectrum(m, tol)?;
    m.map_matrix(|_| s.apply(f))
}

/// Checks that `m` is Hermitian, positive semidefinite and of unit trace.
pub fn check_density(m: &Operator, tol: &Tolerances) -> Result<()> {
    let s = spectrum(m, tol).map_err(|e| Error::InvalidState(e.to_string()))?;
    s.require_psd()
        .map_err(|e| Error::InvalidState(e.to_string()))?;
    let t = m.trace();
    if (t - C64::new(1.0, 0.0)).norm() > tol.eq_tol {
        return Err(Error::InvalidState(format!(
            "trace is {:.12} instead of 1",
            t.re
        )));
    }
    Ok(())
}

pub fn is_density(m: &Operator, tol: &Tolerances) -> bool {
    check_density(m, tol).is_ok()
}

/// Checks positivity and `Tr_conditioned m = target`, where `target` is the
/// identity on the conditioning regions unless a support projector is given.
pub fn check_acausal_conditional(
    m: &Operator,
    conditioning: &[String],
    support: Option<&Operator>,
    tol: &Tolerances,
) -> Result<()> {
    for l in conditioning {
        if !m.has_label(l) {
            return Err(Error::InvalidConditional(format!(
                "conditioning region `{l}` is not on the operator"
            )));
        }
    }
    let s = spectrum(m, tol).map_err(|e| Error::InvalidConditional(e.to_string()))?;
    s.require_psd()
        .map_err(|e| Error::InvalidConditional(format!("not positive: {e}")))?;
    check_marginal_identity(m, conditioning, support, tol)
}

fn check_marginal_identity(
    m: &Operator,
    conditioning: &[String],
    support: Option<&Operator>,
    tol: &Tolerances,
) -> Result<()> {
    let conditioned: Vec<String> = m
        .labels()
        .into_iter()
        .filter(|l| !conditioning.contains(l))
        .collect();
    let marginal = partial_trace(m, &conditioned)?;
    let target = match support {
        Some(p) => p.clone(),
        None => Operator::identity(marginal.regions())?,
    };
    let err = marginal.sub(&target)?.frobenius_norm();
    if err > tol.eq_tol {
        return Err(Error::InvalidConditional(format!(
            "trace over the conditioned regions differs from the {} by {err:.3e}",
            if support.is_some() {
                "support projector"
            } else {
                "identity"
            }
        )));
    }
    Ok(())
}

pub fn is_acausal_conditional(m: &Operator, conditioning: &[String], tol: &Tolerances) -> bool {
    check_acausal_conditional(m, conditioning, None, tol).is_ok()
}

/// Causal conditionals are partial transposes (on the conditioning regions)
/// of acausal ones. The marginal target is checked on `m` itself.
pub fn check_causal_conditional(
    m: &Operator,
    conditioning: &[String],
    support: Option<&Operator>,
    tol: &Tolerances,
) -> Result<()> {
    let pt = partial_transpose(m, conditioning)
        .map_err(|e| Error::InvalidConditional(e.to_string()))?;
    let s = spectrum(&pt, tol).map_err(|e| Error::InvalidConditional(e.to_string()))?;
    s.require_psd().map_err(|e| {
        Error::InvalidConditional(format!("partial transpose is not positive: {e}"))
    })?;
    check_marginal_identity(m, conditioning, support, tol)
}

pub fn is_causal_conditional(m: &Operator, conditioning: &[String], tol: &Tolerances) -> bool {
    check_causal_conditional(m, conditioning, None, tol).is_ok()
}
