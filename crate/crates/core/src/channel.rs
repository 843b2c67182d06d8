//! Channels, the Jamiołkowski correspondence and belief propagation.
//!
//! The operator of a map `E: A → B` is `Σ_jk |j⟩⟨k|_A ⊗ E(|k⟩⟨j|)`, which is
//! the partial transpose over `A` of the Choi operator. Its action is
//! `E(X) = Tr_A[ϱ_{B|A} X]` for `X` on `A` and any bystander regions.

use crate::conditional::{ConditionalState, Flavor};
use crate::error::{Error, Result};
use crate::region::{
    padded_mul, partial_trace, tensor, LabelSet, Matrix, Operator, Region, C64,
};
use crate::spectral::{check_density, spectrum, Tolerances};

fn max_entry(m: &Matrix) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

/// Completely positive trace-preserving map given by Kraus operators
/// (`dim(output) × dim(input)` matrices).
#[derive(Clone, Debug)]
pub struct KrausChannel {
    input: Region,
    output: Region,
    kraus: Vec<Matrix>,
}

pub(crate) fn check_kraus_shapes(input: &Region, output: &Region, kraus: &[Matrix]) -> Result<()> {
    if input.label == output.label {
        return Err(Error::InvalidChannel(format!(
            "input and output must be distinct regions, both are `{}`",
            input.label
        )));
    }
    if kraus.is_empty() {
        return Err(Error::InvalidChannel("no Kraus operators".into()));
    }
    for (k, m) in kraus.iter().enumerate() {
        if m.nrows() != output.dim || m.ncols() != input.dim {
            return Err(Error::InvalidChannel(format!(
                "Kraus operator {k} is {}x{}, expected {}x{}",
                m.nrows(),
                m.ncols(),
                output.dim,
                input.dim
            )));
        }
    }
    Ok(())
}

pub(crate) fn kraus_sum(kraus: &[Matrix], dim: usize) -> Matrix {
    kraus
        .iter()
        .fold(Matrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k)
}

impl KrausChannel {
    pub fn new(input: Region, output: Region, kraus: Vec<Matrix>, tol: &Tolerances) -> Result<Self> {
        check_kraus_shapes(&input, &output, &kraus)?;
        let defect = max_entry(&(kraus_sum(&kraus, input.dim) - Matrix::identity(input.dim, input.dim)));
        if defect > tol.eq_tol {
            return Err(Error::InvalidChannel(format!(
                "Σ K†K differs from the identity by {defect:.3e}"
            )));
        }
        Ok(KrausChannel {
            input,
            output,
            kraus,
        })
    }

    pub fn identity(input: Region, output: Region, tol: &Tolerances) -> Result<Self> {
        if input.dim != output.dim {
            return Err(Error::DimensionMismatch {
                label: output.label,
                left: input.dim,
                right: output.dim,
            });
        }
        let d = input.dim;
        KrausChannel::new(input, output, vec![Matrix::identity(d, d)], tol)
    }

    pub fn unitary(input: Region, output: Region, u: Matrix, tol: &Tolerances) -> Result<Self> {
        KrausChannel::new(input, output, vec![u], tol)
    }

    /// `X ↦ Tr(X) I/d`.
    pub fn depolarizing(input: Region, output: Region, tol: &Tolerances) -> Result<Self> {
        let (di, dout) = (input.dim, output.dim);
        let s = C64::new(1.0 / (dout as f64).sqrt(), 0.0);
        let mut kraus = Vec::new();
        for b in 0..dout {
            for a in 0..di {
                let mut k = Matrix::zeros(dout, di);
                k[(b, a)] = s;
                kraus.push(k);
            }
        }
        KrausChannel::new(input, output, kraus, tol)
    }

    pub fn input(&self) -> &Region {
        &self.input
    }

    pub fn output(&self) -> &Region {
        &self.output
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    /// `Σ_k (K_k ⊗ I) X (K_k† ⊗ I)` for `X` on the input and any bystanders.
    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        apply_kraus(&self.input, &self.output, &self.kraus, x)
    }

    /// Heisenberg picture `Σ_k (K_k† ⊗ I) N (K_k ⊗ I)` for `N` on the output
    /// and any bystanders.
    pub fn dual_apply(&self, n: &Operator) -> Result<Operator> {
        let adj: Vec<Matrix> = self.kraus.iter().map(|k| k.adjoint()).collect();
        apply_kraus(&self.output, &self.input, &adj, n)
    }
}

pub(crate) fn apply_kraus(
    from: &Region,
    to: &Region,
    kraus: &[Matrix],
    x: &Operator,
) -> Result<Operator> {
    let r = x
        .region(&from.label)
        .ok_or_else(|| Error::LabelNotFound(from.label.clone()))?;
    if r.dim != from.dim {
        return Err(Error::DimensionMismatch {
            label: from.label.clone(),
            left: from.dim,
            right: r.dim,
        });
    }
    if x.has_label(&to.label) {
        return Err(Error::LabelCollision(to.label.clone()));
    }
    let rest: Vec<Region> = x
        .regions()
        .iter()
        .filter(|r| r.label != from.label)
        .cloned()
        .collect();
    let mut order: Vec<&str> = vec![from.label.as_str()];
    order.extend(rest.iter().map(|r| r.label.as_str()));
    let xm = x.matrix_in_order(&order)?;
    let nrest: usize = rest.iter().map(|r| r.dim).product();
    let id = Matrix::identity(nrest, nrest);
    let mut out = Matrix::zeros(to.dim * nrest, to.dim * nrest);
    for k in kraus {
        let kk = k.kronecker(&id);
        out += &kk * &xm * kk.adjoint();
    }
    let mut regions = vec![to.clone()];
    regions.extend(rest);
    Operator::new(regions, out)
}

/// Jamiołkowski operator of a channel, as a causal conditional.
pub fn jamiolkowski_to_state(ch: &KrausChannel, tol: &Tolerances) -> Result<ConditionalState> {
    let op = jamiolkowski_operator(&ch.input, &ch.output, &ch.kraus)?;
    ConditionalState::new(
        op,
        &[ch.output.label.as_str()],
        &[ch.input.label.as_str()],
        Flavor::Causal,
        tol,
    )
}

pub(crate) fn jamiolkowski_operator(
    input: &Region,
    output: &Region,
    kraus: &[Matrix],
) -> Result<Operator> {
    let mut acc = Operator::zeros(&[input.clone(), output.clone()])?;
    for j in 0..input.dim {
        for k in 0..input.dim {
            let image = apply_kraus(input, output, kraus, &Operator::unit(input, k, j)?)?;
            acc = acc.add(&tensor(&Operator::unit(input, j, k)?, &image)?)?;
        }
    }
    Ok(acc)
}

/// Linear map between region sets represented by its Jamiołkowski operator.
/// Maps built from acausal conditionals are positive but generally not
/// completely positive; `flavor` records which kind this is.
#[derive(Clone, Debug)]
pub struct MatrixMap {
    op: Operator,
    input: LabelSet,
    output: LabelSet,
    flavor: Flavor,
}

impl MatrixMap {
    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn input(&self) -> &LabelSet {
        &self.input
    }

    pub fn output(&self) -> &LabelSet {
        &self.output
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Only maps from causal conditionals are guaranteed completely positive.
    pub fn is_completely_positive(&self) -> bool {
        self.flavor == Flavor::Causal
    }

    pub fn input_regions(&self) -> Vec<Region> {
        self.regions_in(&self.input)
    }

    pub fn output_regions(&self) -> Vec<Region> {
        self.regions_in(&self.output)
    }

    fn regions_in(&self, set: &LabelSet) -> Vec<Region> {
        self.op
            .regions()
            .iter()
            .filter(|r| set.contains(&r.label))
            .cloned()
            .collect()
    }

    /// Builds the map from its action on matrix units of a single input
    /// region: `Σ_jk |j⟩⟨k| ⊗ f(|k⟩⟨j|)`.
    pub fn from_action(
        input: &Region,
        output: &[Region],
        flavor: Flavor,
        f: impl Fn(&Operator) -> Result<Operator>,
    ) -> Result<Self> {
        let mut regions = vec![input.clone()];
        regions.extend(output.iter().cloned());
        let mut acc = Operator::zeros(&regions)?;
        for j in 0..input.dim {
            for k in 0..input.dim {
                let image = f(&Operator::unit(input, k, j)?)?;
                acc = acc.add(&tensor(&Operator::unit(input, j, k)?, &image)?)?;
            }
        }
        Ok(MatrixMap {
            op: acc,
            input: std::iter::once(input.label.clone()).collect(),
            output: output.iter().map(|r| r.label.clone()).collect(),
            flavor,
        })
    }
}

/// The map whose Jamiołkowski operator is the given conditional.
pub fn jamiolkowski_to_map(c: &ConditionalState) -> MatrixMap {
    MatrixMap {
        op: c.op().clone(),
        input: c.conditioning().clone(),
        output: c.conditioned().clone(),
        flavor: c.flavor(),
    }
}

/// Conditional state of a map; the map's flavor decides which validity
/// check applies.
pub fn map_to_conditional(m: &MatrixMap, tol: &Tolerances) -> Result<ConditionalState> {
    let out: Vec<&str> = m.output.iter().map(|s| s.as_str()).collect();
    let inp: Vec<&str> = m.input.iter().map(|s| s.as_str()).collect();
    ConditionalState::new(m.op.clone(), &out, &inp, m.flavor, tol)
}

/// `Tr_in[ϱ X]` for `X` on the map's input regions and any bystanders.
pub fn apply_map(m: &MatrixMap, x: &Operator) -> Result<Operator> {
    for l in &m.input {
        if !x.has_label(l) {
            return Err(Error::LabelNotFound(l.clone()));
        }
    }
    if let Some(l) = m.output.iter().find(|l| x.has_label(l)) {
        return Err(Error::LabelCollision(l.clone()));
    }
    let inp: Vec<&String> = m.input.iter().collect();
    partial_trace(&padded_mul(&m.op, x)?, &inp)
}

/// Heisenberg picture `Tr_out[N ϱ]` for `N` on the output regions and any
/// bystanders.
pub fn dual_apply(m: &MatrixMap, n: &Operator) -> Result<Operator> {
    for l in &m.output {
        if !n.has_label(l) {
            return Err(Error::LabelNotFound(l.clone()));
        }
    }
    if let Some(l) = m.input.iter().find(|l| n.has_label(l)) {
        return Err(Error::LabelCollision(l.clone()));
    }
    let out: Vec<&String> = m.output.iter().collect();
    partial_trace(&padded_mul(n, &m.op)?, &out)
}

/// `ρ_B = Tr_A[c ρ_A]` for a density operator on exactly the conditioning
/// regions. Identical formula for both flavors.
pub fn propagate(state: &Operator, c: &ConditionalState, tol: &Tolerances) -> Result<Operator> {
    if &state.labels() != c.conditioning() {
        return Err(Error::InvalidState(format!(
            "state acts on {:?} but the conditional is conditioned on {:?}",
            state.labels(),
            c.conditioning()
        )));
    }
    check_density(state, tol)?;
    let cond: Vec<String> = c.conditioning_labels();
    partial_trace(&padded_mul(c.op(), state)?, &cond)
}

/// Flavor of `Tr_B[later · earlier]`. A map composed with the conjugate of
/// another map stays in its flavor; two maps of the same flavor compose to a
/// CPT map. Hybrid conditionals are valid in both flavors and adapt.
fn composed_flavor(later: &ConditionalState, earlier: &ConditionalState) -> Flavor {
    match (later.is_hybrid(), earlier.is_hybrid()) {
        (true, true) => Flavor::Causal,
        (true, false) => earlier.flavor(),
        (false, true) => later.flavor(),
        (false, false) => {
            if later.flavor() == earlier.flavor() {
                Flavor::Causal
            } else {
                Flavor::Acausal
            }
        }
    }
}

/// `ϱ_{C|A} = Tr_B[ϱ_{C|B} ϱ_{B|A}]`. The conditioned regions of `earlier`
/// must be exactly the conditioning regions of `later`.
pub fn compose_conditionals(
    later: &ConditionalState,
    earlier: &ConditionalState,
    tol: &Tolerances,
) -> Result<ConditionalState> {
    if earlier.conditioned() != later.conditioning() {
        return Err(Error::InvalidConditional(format!(
            "cannot compose: earlier produces {:?} but later is conditioned on {:?}",
            earlier.conditioned(),
            later.conditioning()
        )));
    }
    if let Some(l) = later
        .conditioned()
        .iter()
        .find(|l| earlier.conditioning().contains(*l))
    {
        return Err(Error::LabelCollision(l.clone()));
    }
    let mid: Vec<String> = later.conditioning_labels();
    let op = partial_trace(&padded_mul(later.op(), earlier.op())?, &mid)?;
    let flavor = composed_flavor(later, earlier);
    let support = earlier.support().cloned();
    let c = ConditionalState::from_parts(
        op,
        later.conditioned().clone(),
        earlier.conditioning().clone(),
        flavor,
        support,
    );
    c.validate(tol)?;
    Ok(c)
}

/// Largest deviation from complete positivity reported by the spectrum of the
/// Choi operator (negative values mean not CP).
pub fn choi_min_eigenvalue(m: &MatrixMap, tol: &Tolerances) -> Result<f64> {
    let inp: Vec<&String> = m.input.iter().collect();
    let choi = crate::region::partial_transpose(&m.op, &inp)?;
    Ok(spectrum(&choi, tol)?.min_eigenvalue())
}
