//! Conditionals with one classical side: ensembles (quantum given classical)
//! and POVMs (classical given quantum).

use crate::conditional::{ConditionalState, Flavor, Support};
use crate::error::{Error, Result};
use crate::region::{classical_block_sum, partial_transpose, Operator, Region};
use crate::spectral::{check_density, spectrum, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HybridKind {
    /// `σ_{A|X} = Σ_x |x⟩⟨x| ⊗ ρ_x`: the components are states.
    Ensemble,
    /// `σ_{Y|A} = Σ_y |y⟩⟨y| ⊗ E_y`: the components are POVM elements.
    Povm,
}

#[derive(Clone, Debug)]
pub struct HybridConditional {
    cond: ConditionalState,
    classical: Region,
    kind: HybridKind,
    components: Vec<Operator>,
}

fn check_same_regions(ops: &[Operator], what: &str) -> Result<Vec<Region>> {
    let first = ops
        .first()
        .ok_or_else(|| Error::InvalidConditional(format!("{what} has no components")))?;
    for (k, o) in ops.iter().enumerate() {
        if o.regions() != first.regions() {
            return Err(Error::InvalidConditional(format!(
                "{what} component {k} acts on different regions than component 0"
            )));
        }
    }
    Ok(first.regions().to_vec())
}

impl HybridConditional {
    /// `σ_{Y|A} = Σ_y |y⟩⟨y| ⊗ E_y`. Elements must be positive and sum to the
    /// identity.
    pub fn from_povm(elements: &[Operator], outcome: &Region, tol: &Tolerances) -> Result<Self> {
        let y = Region::classical(outcome.label.clone(), elements.len());
        let quantum = check_same_regions(elements, "POVM")?;
        if quantum.iter().any(|r| r.label == y.label) {
            return Err(Error::LabelCollision(y.label));
        }
        let mut sum = Operator::zeros(&quantum)?;
        for (k, e) in elements.iter().enumerate() {
            let s = spectrum(e, tol).map_err(|err| Error::InvalidPovm(format!("element {k}: {err}")))?;
            if s.min_eigenvalue() < -tol.eig_zero * s.eigenvalues[0].abs().max(1.0) {
                return Err(Error::InvalidPovm(format!(
                    "element {k} has eigenvalue {:.3e}",
                    s.min_eigenvalue()
                )));
            }
            sum = sum.add(e)?;
        }
        let err = sum.sub(&Operator::identity(&quantum)?)?.frobenius_norm();
        if err > tol.eq_tol {
            return Err(Error::InvalidPovm(format!(
                "elements sum to the identity only within {err:.3e}"
            )));
        }
        let op = classical_block_sum(&y, elements)?;
        let conditioning: Vec<&str> = quantum.iter().map(|r| r.label.as_str()).collect();
        let cond = ConditionalState::new(op, &[y.label.as_str()], &conditioning, Flavor::Causal, tol)?;
        Ok(HybridConditional {
            cond,
            classical: y,
            kind: HybridKind::Povm,
            components: elements.to_vec(),
        })
    }

    /// `σ_{A|X} = Σ_x |x⟩⟨x| ⊗ ρ_x`. Members must be density operators.
    pub fn from_ensemble(states: &[Operator], value: &Region, tol: &Tolerances) -> Result<Self> {
        let x = Region::classical(value.label.clone(), states.len());
        let quantum = check_same_regions(states, "ensemble")?;
        if quantum.iter().any(|r| r.label == x.label) {
            return Err(Error::LabelCollision(x.label));
        }
        for (k, s) in states.iter().enumerate() {
            check_density(s, tol).map_err(|e| Error::InvalidEnsemble(format!("member {k}: {e}")))?;
        }
        let op = classical_block_sum(&x, states)?;
        let conditioned: Vec<&str> = quantum.iter().map(|r| r.label.as_str()).collect();
        let cond = ConditionalState::new(op, &conditioned, &[x.label.as_str()], Flavor::Causal, tol)?;
        Ok(HybridConditional {
            cond,
            classical: x,
            kind: HybridKind::Ensemble,
            components: states.to_vec(),
        })
    }

    /// Recognises a conditional with a single classical region on one side and
    /// reads off its components. The same operator is valid in both flavors,
    /// so components are read from it directly.
    pub fn from_conditional(cond: ConditionalState, tol: &Tolerances) -> Result<Self> {
        let pick = |regions: Vec<Region>| -> Option<Region> {
            match regions.as_slice() {
                [r] if r.classical => Some(r.clone()),
                _ => None,
            }
        };
        let (classical, kind) = if let Some(r) = pick(cond.conditioned_regions()) {
            (r, HybridKind::Povm)
        } else if let Some(r) = pick(cond.conditioning_regions()) {
            (r, HybridKind::Ensemble)
        } else {
            return Err(Error::InvalidConditional(
                "needs exactly one classical region on one side".into(),
            ));
        };
        let op = cond.op();
        let defect = op.off_diagonal_defect(&classical.label)?;
        let scale = op.max_abs_entry().max(1.0);
        if defect > tol.herm_tol * scale {
            return Err(Error::InvalidConditional(format!(
                "coherence {defect:.3e} between values of classical region `{}`",
                classical.label
            )));
        }
        let components = (0..classical.dim)
            .map(|k| op.slice(&classical.label, k, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(HybridConditional {
            cond,
            classical,
            kind,
            components,
        })
    }

    pub fn conditional(&self) -> &ConditionalState {
        &self.cond
    }

    pub fn into_conditional(self) -> ConditionalState {
        self.cond
    }

    pub fn op(&self) -> &Operator {
        self.cond.op()
    }

    pub fn classical(&self) -> &Region {
        &self.classical
    }

    pub fn kind(&self) -> HybridKind {
        self.kind
    }

    pub fn components(&self) -> &[Operator] {
        &self.components
    }

    /// The quantum regions (everything except the classical one).
    pub fn quantum_regions(&self) -> Vec<Region> {
        self.cond
            .op()
            .regions()
            .iter()
            .filter(|r| r.label != self.classical.label)
            .cloned()
            .collect()
    }

    pub fn support(&self) -> Option<&Support> {
        self.cond.support()
    }
}

/// Classical-quantum operator `Σ_y |y⟩⟨y| ⊗ B_y` with unnormalised blocks.
#[derive(Clone, Debug)]
pub struct HybridState {
    pub classical: Region,
    pub blocks: Vec<Operator>,
}

impl HybridState {
    pub fn from_operator(op: &Operator, classical: &str, tol: &Tolerances) -> Result<Self> {
        let region = op
            .region(classical)
            .cloned()
            .ok_or_else(|| Error::LabelNotFound(classical.to_string()))?;
        let defect = op.off_diagonal_defect(classical)?;
        if defect > tol.herm_tol * op.max_abs_entry().max(1.0) {
            return Err(Error::InvalidState(format!(
                "coherence {defect:.3e} between values of classical region `{classical}`"
            )));
        }
        let blocks = (0..region.dim)
            .map(|k| op.slice(classical, k, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(HybridState {
            classical: Region::classical(region.label, region.dim),
            blocks,
        })
    }

    pub fn to_operator(&self) -> Result<Operator> {
        classical_block_sum(&self.classical, &self.blocks)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.trace().re).collect()
    }

    /// Normalised block `y`; fails for zero-probability outcomes.
    pub fn conditional_state(&self, y: usize, tol: &Tolerances) -> Result<Operator> {
        let b = self.blocks.get(y).ok_or_else(|| Error::IndexOutOfRange {
            label: self.classical.label.clone(),
            index: y,
            dim: self.blocks.len(),
        })?;
        let p = b.trace().re;
        if p <= tol.eig_zero {
            return Err(Error::ZeroProbability(y));
        }
        Ok(b.scaled(1.0 / p))
    }
}

/// Partial transpose on a classical region leaves a block-diagonal operator
/// unchanged; this returns the discrepancy for checks.
pub fn classical_transpose_defect(op: &Operator, classical: &str) -> Result<f64> {
    let t = partial_transpose(op, &[classical])?;
    Ok(t.sub(op)?.frobenius_norm())
}
