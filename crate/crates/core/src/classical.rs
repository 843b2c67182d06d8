//! Classical probability tables, their embedding as diagonal operators, and
//! plain arithmetic on them (marginals, Bayes, composition).

use nalgebra::DMatrix;

use crate::conditional::{ConditionalState, Flavor};
use crate::error::{Error, Result};
use crate::region::{Operator, Region};
use crate::spectral::Tolerances;

fn classical_copy(regions: &[Region]) -> Vec<Region> {
    regions
        .iter()
        .map(|r| Region::classical(r.label.clone(), r.dim))
        .collect()
}

fn joint_dim(regions: &[Region]) -> usize {
    regions.iter().map(|r| r.dim).product()
}

/// Probability distribution over the joint values of one or more classical
/// regions, indexed mixed-radix in the listed region order.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalDistribution {
    regions: Vec<Region>,
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(regions: &[Region], probs: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if probs.len() != joint_dim(regions) {
            return Err(Error::InvalidClassical(format!(
                "{} probabilities for {} values",
                probs.len(),
                joint_dim(regions)
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidClassical(format!("entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol.eq_tol {
            return Err(Error::InvalidClassical(format!("probabilities sum to {total}")));
        }
        Ok(ClassicalDistribution {
            regions: classical_copy(regions),
            probs,
        })
    }

    pub fn uniform(region: &Region) -> Self {
        ClassicalDistribution {
            regions: classical_copy(std::slice::from_ref(region)),
            probs: vec![1.0 / region.dim as f64; region.dim],
        }
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn embed(&self) -> Operator {
        Operator::from_diagonal(&self.regions, &self.probs).expect("sizes checked at construction")
    }

    /// Reads a diagonal density operator back as a distribution, in the
    /// operator's canonical region order.
    pub fn extract(op: &Operator, tol: &Tolerances) -> Result<Self> {
        let n = op.side();
        let m = op.matrix();
        for i in 0..n {
            for j in 0..n {
                if i != j && m[(i, j)].norm() > tol.herm_tol {
                    return Err(Error::InvalidClassical(format!(
                        "off-diagonal entry ({i}, {j}) has magnitude {:.3e}",
                        m[(i, j)].norm()
                    )));
                }
            }
            if m[(i, i)].im.abs() > tol.herm_tol {
                return Err(Error::InvalidClassical(format!("diagonal entry {i} is not real")));
            }
        }
        let probs = (0..n).map(|i| m[(i, i)].re.max(0.0)).collect();
        ClassicalDistribution::new(op.regions(), probs, tol)
    }
}

/// Column-stochastic table `P(of | given)`: rows index the joint values of
/// `of`, columns the joint values of `given`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalConditionalTable {
    of: Vec<Region>,
    given: Vec<Region>,
    table: DMatrix<f64>,
}

impl ClassicalConditionalTable {
    pub fn new(
        of: &[Region],
        given: &[Region],
        table: DMatrix<f64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if table.nrows() != joint_dim(of) || table.ncols() != joint_dim(given) {
            return Err(Error::InvalidClassical(format!(
                "table is {}x{} but regions need {}x{}",
                table.nrows(),
                table.ncols(),
                joint_dim(of),
                joint_dim(given)
            )));
        }
        if let Some(p) = table.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidClassical(format!("entry {p} is not a probability")));
        }
        for (k, col) in table.column_iter().enumerate() {
            let s: f64 = col.iter().sum();
            if (s - 1.0).abs() > tol.eq_tol {
                return Err(Error::InvalidClassical(format!("column {k} sums to {s}")));
            }
        }
        Ok(ClassicalConditionalTable {
            of: classical_copy(of),
            given: classical_copy(given),
            table,
        })
    }

    pub fn of(&self) -> &[Region] {
        &self.of
    }

    pub fn given(&self) -> &[Region] {
        &self.given
    }

    pub fn table(&self) -> &DMatrix<f64> {
        &self.table
    }

    /// `Σ_{r,s} P(s|r) |r s⟩⟨r s|` as a conditional state.
    pub fn embed(&self, tol: &Tolerances) -> Result<ConditionalState> {
        let mut regions = self.given.clone();
        regions.extend(self.of.iter().cloned());
        let (no, ng) = (self.table.nrows(), self.table.ncols());
        let mut diag = vec![0.0; no * ng];
        for g in 0..ng {
            for o in 0..no {
                diag[g * no + o] = self.table[(o, g)];
            }
        }
        let op = Operator::from_diagonal(&regions, &diag)?;
        let of: Vec<&str> = self.of.iter().map(|r| r.label.as_str()).collect();
        let given: Vec<&str> = self.given.iter().map(|r| r.label.as_str()).collect();
        ConditionalState::new(op, &of, &given, Flavor::Acausal, tol)
    }

    /// Reads a diagonal conditional state back as a table, keeping the
    /// canonical order of its region labels.
    pub fn extract(c: &ConditionalState, tol: &Tolerances) -> Result<Self> {
        let given = c.conditioning_regions();
        let of = c.conditioned_regions();
        let mut order: Vec<&str> = given.iter().map(|r| r.label.as_str()).collect();
        order.extend(of.iter().map(|r| r.label.as_str()));
        let m = c.op().matrix_in_order(&order)?;
        let n = m.nrows();
        for i in 0..n {
            for j in 0..n {
                if i != j && m[(i, j)].norm() > tol.herm_tol {
                    return Err(Error::InvalidClassical(format!(
                        "off-diagonal entry ({i}, {j}) has magnitude {:.3e}",
                        m[(i, j)].norm()
                    )));
                }
            }
        }
        let (no, ng) = (joint_dim(&of), joint_dim(&given));
        let table = DMatrix::from_fn(no, ng, |o, g| m[(g * no + o, g * no + o)].re.max(0.0));
        // Columns outside the support of a marginal are all zero; leave them
        // unnormalised rather than inventing values.
        let ok = table.column_iter().all(|col| {
            let s: f64 = col.iter().sum();
            (s - 1.0).abs() <= tol.eq_tol || s <= tol.eq_tol
        });
        if !ok {
            return Err(Error::InvalidClassical("columns do not sum to one".into()));
        }
        Ok(ClassicalConditionalTable { of, given, table })
    }

    /// `P(s) = Σ_r P(s|r) P(r)`.
    pub fn propagate(&self, prior: &[f64]) -> Vec<f64> {
        (0..self.table.nrows())
            .map(|s| (0..self.table.ncols()).map(|r| self.table[(s, r)] * prior[r]).sum())
            .collect()
    }

    /// Bayes' theorem: `P(r|s) = P(s|r) P(r) / P(s)`. Columns with `P(s) = 0`
    /// are left at zero.
    pub fn invert(&self, prior: &[f64]) -> DMatrix<f64> {
        let ps = self.propagate(prior);
        DMatrix::from_fn(self.table.ncols(), self.table.nrows(), |r, s| {
            if ps[s] > 0.0 {
                self.table[(s, r)] * prior[r] / ps[s]
            } else {
                0.0
            }
        })
    }

    /// `P(t|r) = Σ_s P(t|s) P(s|r)` for `self = P(t|s)`.
    pub fn compose(&self, earlier: &DMatrix<f64>) -> DMatrix<f64> {
        &self.table * earlier
    }
}

/// `Σ_x p_x |x⟩⟨x|` for a single classical region.
pub fn diag_operator(region: &Region, values: &[f64]) -> Result<Operator> {
    Operator::from_diagonal(std::slice::from_ref(region), values)
}
