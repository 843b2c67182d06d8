//! Quantum instruments: a family of completely positive, trace-non-increasing
//! maps indexed by a classical outcome whose sum is trace preserving.

use crate::channel::{apply_kraus, check_kraus_shapes, jamiolkowski_operator, kraus_sum, propagate, KrausChannel};
use crate::conditional::{ConditionalState, Flavor};
use crate::error::{Error, Result};
use crate::hybrid::{HybridConditional, HybridState};
use crate::region::{classical_block_sum, partial_trace, Matrix, Operator, Region};
use crate::spectral::{herm_sqrt, Tolerances};

#[derive(Clone, Debug)]
pub struct Instrument {
    input: Region,
    output: Region,
    outcome: Region,
    elements: Vec<Vec<Matrix>>,
}

impl Instrument {
    /// `elements[y]` are the Kraus operators of the map for outcome `y`.
    pub fn new(
        input: Region,
        output: Region,
        outcome: Region,
        elements: Vec<Vec<Matrix>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidInstrument("no outcomes".into()));
        }
        let outcome = Region::classical(outcome.label, elements.len());
        if outcome.label == input.label || outcome.label == output.label {
            return Err(Error::LabelCollision(outcome.label));
        }
        let mut all = Vec::new();
        for (y, ks) in elements.iter().enumerate() {
            check_kraus_shapes(&input, &output, ks)
                .map_err(|e| Error::InvalidInstrument(format!("outcome {y}: {e}")))?;
            all.extend(ks.iter().cloned());
        }
        let defect = (kraus_sum(&all, input.dim) - Matrix::identity(input.dim, input.dim))
            .iter()
            .fold(0.0f64, |a, z| a.max(z.norm()));
        if defect > tol.eq_tol {
            return Err(Error::InvalidInstrument(format!(
                "summed map is not trace preserving (defect {defect:.3e})"
            )));
        }
        Ok(Instrument {
            input,
            output,
            outcome,
            elements,
        })
    }

    /// Instrument with Kraus operators `E_y^{1/2}` (input and output of equal
    /// dimension).
    pub fn lueders(
        povm: &[Operator],
        input: Region,
        output: Region,
        outcome: Region,
        tol: &Tolerances,
    ) -> Result<Self> {
        if input.dim != output.dim {
            return Err(Error::DimensionMismatch {
                label: output.label,
                left: input.dim,
                right: output.dim,
            });
        }
        let elements = povm
            .iter()
            .map(|e| {
                let m = e.matrix_in_order(&[input.label.as_str()])?;
                let op = Operator::new(vec![input.clone()], m)?;
                Ok(vec![herm_sqrt(&op, tol)?.into_matrix()])
            })
            .collect::<Result<Vec<_>>>()?;
        Instrument::new(input, output, outcome, elements, tol)
    }

    pub fn input(&self) -> &Region {
        &self.input
    }

    pub fn output(&self) -> &Region {
        &self.output
    }

    pub fn outcome(&self) -> &Region {
        &self.outcome
    }

    pub fn elements(&self) -> &[Vec<Matrix>] {
        &self.elements
    }

    /// Applies the map for outcome `y` (unnormalised).
    pub fn apply_element(&self, y: usize, x: &Operator) -> Result<Operator> {
        let ks = self.elements.get(y).ok_or_else(|| Error::IndexOutOfRange {
            label: self.outcome.label.clone(),
            index: y,
            dim: self.elements.len(),
        })?;
        apply_kraus(&self.input, &self.output, ks, x)
    }

    /// The non-selective channel `Σ_y E_y`.
    pub fn nonselective_channel(&self, tol: &Tolerances) -> Result<KrausChannel> {
        KrausChannel::new(
            self.input.clone(),
            self.output.clone(),
            self.elements.iter().flatten().cloned().collect(),
            tol,
        )
    }

    /// POVM elements `E_y = Σ_μ K_{y,μ}† K_{y,μ}` on the input.
    pub fn povm_elements(&self) -> Result<Vec<Operator>> {
        self.elements
            .iter()
            .map(|ks| Operator::new(vec![self.input.clone()], kraus_sum(ks, self.input.dim)))
            .collect()
    }
}

/// `ϱ_{YB|A} = Σ_y |y⟩⟨y|_Y ⊗ ϱ_{Y=y,B|A}`, a causal conditional.
pub fn instrument_to_conditional(ins: &Instrument, tol: &Tolerances) -> Result<ConditionalState> {
    let blocks = ins
        .elements
        .iter()
        .map(|ks| jamiolkowski_operator(&ins.input, &ins.output, ks))
        .collect::<Result<Vec<_>>>()?;
    let op = classical_block_sum(&ins.outcome, &blocks)?;
    ConditionalState::new(
        op,
        &[ins.outcome.label.as_str(), ins.output.label.as_str()],
        &[ins.input.label.as_str()],
        Flavor::Causal,
        tol,
    )
}

/// `ρ_YB = Tr_A[ϱ_{YB|A} ρ_A]`; block `y` is `P(y) ρ_{B|Y=y}`.
pub fn instrument_update(ins: &Instrument, rho: &Operator, tol: &Tolerances) -> Result<HybridState> {
    let cond = instrument_to_conditional(ins, tol)?;
    let out = propagate(rho, &cond, tol)?;
    HybridState::from_operator(&out, &ins.outcome.label, tol)
}

/// `ϱ_{Y|A} = Tr_B ϱ_{YB|A}`, the POVM the instrument measures.
pub fn instrument_povm(ins: &Instrument, tol: &Tolerances) -> Result<HybridConditional> {
    let cond = instrument_to_conditional(ins, tol)?;
    let op = partial_trace(cond.op(), &[ins.output.label.as_str()])?;
    let y = ConditionalState::new(
        op,
        &[ins.outcome.label.as_str()],
        &[ins.input.label.as_str()],
        Flavor::Causal,
        tol,
    )?;
    HybridConditional::from_conditional(y, tol)
}

/// `ϱ_{B|A} = Tr_Y ϱ_{YB|A}`, the non-selective channel's conditional.
pub fn instrument_nonselective(ins: &Instrument, tol: &Tolerances) -> Result<ConditionalState> {
    let cond = instrument_to_conditional(ins, tol)?;
    let op = partial_trace(cond.op(), &[ins.outcome.label.as_str()])?;
    ConditionalState::new(
        op,
        &[ins.output.label.as_str()],
        &[ins.input.label.as_str()],
        Flavor::Causal,
        tol,
    )
}
