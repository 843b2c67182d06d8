//! Region-labelled operators.
//!
//! An [`Operator`] is a dense complex matrix together with the list of regions
//! it acts on. Regions are kept sorted by label, and matrix entries use
//! mixed-radix row-major indexing over that order (the first region is the
//! most significant digit, matching the Kronecker product). Products between
//! operators on different region sets pad each side with identities first, so
//! `M_AB N_BC` means `(M_AB ⊗ I_C)(I_A ⊗ N_BC)`.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

pub type LabelSet = BTreeSet<String>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    pub label: String,
    pub dim: usize,
    pub classical: bool,
}

impl Region {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Region {
            label: label.into(),
            dim,
            classical: false,
        }
    }

    pub fn classical(label: impl Into<String>, dim: usize) -> Self {
        Region {
            label: label.into(),
            dim,
            classical: true,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.classical {
            write!(f, "{}[{}, classical]", self.label, self.dim)
        } else {
            write!(f, "{}[{}]", self.label, self.dim)
        }
    }
}

pub fn label_set<S: AsRef<str>>(labels: &[S]) -> LabelSet {
    labels.iter().map(|s| s.as_ref().to_string()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    regions: Vec<Region>,
    matrix: Matrix,
}

/// Offsets of every multi-index over `positions` inside the full index space
/// whose per-region strides are `strides`.
fn offsets(dims: &[usize], strides: &[usize], positions: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &p in positions {
        let mut next = Vec::with_capacity(out.len() * dims[p]);
        for &base in &out {
            for i in 0..dims[p] {
                next.push(base + i * strides[p]);
            }
        }
        out = next;
    }
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Reorders the tensor factors of `m`. The factor at position `k` of the
/// result is the factor at position `perm[k]` of the input.
fn permute_factors(m: &Matrix, dims: &[usize], perm: &[usize]) -> Matrix {
    if perm.iter().enumerate().all(|(k, &p)| k == p) {
        return m.clone();
    }
    let old_strides = strides(dims);
    let map = offsets(dims, &old_strides, perm);
    let n = map.len();
    Matrix::from_fn(n, n, |i, j| m[(map[i], map[j])])
}

fn merge_regions(a: &[Region], b: &[Region]) -> Result<Vec<Region>> {
    let mut out: Vec<Region> = a.to_vec();
    for r in b {
        match out.iter().find(|x| x.label == r.label) {
            Some(x) if x.dim != r.dim => {
                return Err(Error::DimensionMismatch {
                    label: r.label.clone(),
                    left: x.dim,
                    right: r.dim,
                })
            }
            Some(_) => {}
            None => out.push(r.clone()),
        }
    }
    out.sort_by(|x, y| x.label.cmp(&y.label));
    Ok(out)
}

impl Operator {
    /// Builds an operator whose matrix is indexed in the order the regions are
    /// given. The result is stored in canonical (label-sorted) order.
    pub fn new(regions: Vec<Region>, matrix: Matrix) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &regions {
            if r.dim == 0 {
                return Err(Error::ZeroDimension(r.label.clone()));
            }
            if !seen.insert(r.label.clone()) {
                return Err(Error::DuplicateLabel(r.label.clone()));
            }
        }
        let expected: usize = regions.iter().map(|r| r.dim).product();
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::Shape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected,
            });
        }
        let mut perm: Vec<usize> = (0..regions.len()).collect();
        perm.sort_by(|&x, &y| regions[x].label.cmp(&regions[y].label));
        let dims: Vec<usize> = regions.iter().map(|r| r.dim).collect();
        let matrix = permute_factors(&matrix, &dims, &perm);
        let regions = perm.iter().map(|&p| regions[p].clone()).collect();
        Ok(Operator { regions, matrix })
    }

    pub fn scalar(z: C64) -> Self {
        Operator {
            regions: Vec::new(),
            matrix: Matrix::from_element(1, 1, z),
        }
    }

    pub fn identity(regions: &[Region]) -> Result<Self> {
        let n: usize = regions.iter().map(|r| r.dim).product();
        Operator::new(regions.to_vec(), Matrix::identity(n, n))
    }

    pub fn zeros(regions: &[Region]) -> Result<Self> {
        let n: usize = regions.iter().map(|r| r.dim).product();
        Operator::new(regions.to_vec(), Matrix::zeros(n, n))
    }

    /// Diagonal operator; `diag` is indexed in the order the regions are given.
    pub fn from_diagonal(regions: &[Region], diag: &[f64]) -> Result<Self> {
        let n: usize = regions.iter().map(|r| r.dim).product();
        if diag.len() != n {
            return Err(Error::Shape {
                rows: diag.len(),
                cols: diag.len(),
                expected: n,
            });
        }
        let m = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Operator::new(regions.to_vec(), m)
    }

    /// Rank-one operator `|v⟩⟨v|`, with `v` indexed in the given region order.
    pub fn ket_bra(regions: &[Region], v: &[C64]) -> Result<Self> {
        let n: usize = regions.iter().map(|r| r.dim).product();
        if v.len() != n {
            return Err(Error::Shape {
                rows: v.len(),
                cols: 1,
                expected: n,
            });
        }
        let m = Matrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
        Operator::new(regions.to_vec(), m)
    }

    /// Matrix unit `|row⟩⟨col|` on a single region.
    pub fn unit(region: &Region, row: usize, col: usize) -> Result<Self> {
        for idx in [row, col] {
            if idx >= region.dim {
                return Err(Error::IndexOutOfRange {
                    label: region.label.clone(),
                    index: idx,
                    dim: region.dim,
                });
            }
        }
        let mut m = Matrix::zeros(region.dim, region.dim);
        m[(row, col)] = C64::new(1.0, 0.0);
        Ok(Operator {
            regions: vec![region.clone()],
            matrix: m,
        })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, label: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.label == label)
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.region(label).is_some()
    }

    pub fn labels(&self) -> LabelSet {
        self.regions.iter().map(|r| r.label.clone()).collect()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn side(&self) -> usize {
        self.matrix.nrows()
    }

    fn dims(&self) -> Vec<usize> {
        self.regions.iter().map(|r| r.dim).collect()
    }

    fn with_matrix(&self, matrix: Matrix) -> Self {
        Operator {
            regions: self.regions.clone(),
            matrix,
        }
    }

    fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut seen = BTreeSet::new();
        labels
            .iter()
            .map(|l| {
                let l = l.as_ref();
                if !seen.insert(l.to_string()) {
                    return Err(Error::DuplicateLabel(l.to_string()));
                }
                self.regions
                    .iter()
                    .position(|r| r.label == l)
                    .ok_or_else(|| Error::LabelNotFound(l.to_string()))
            })
            .collect()
    }

    /// The matrix with its tensor factors listed in `order` (which must name
    /// every region exactly once).
    pub fn matrix_in_order<S: AsRef<str>>(&self, order: &[S]) -> Result<Matrix> {
        let perm = self.positions(order)?;
        if perm.len() != self.regions.len() {
            let missing = self
                .regions
                .iter()
                .find(|r| !order.iter().any(|o| o.as_ref() == r.label))
                .map(|r| r.label.clone())
                .unwrap_or_default();
            return Err(Error::LabelNotFound(missing));
        }
        Ok(permute_factors(&self.matrix, &self.dims(), &perm))
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        self.with_matrix(self.matrix.adjoint())
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.with_matrix(self.matrix.map(|z| z * s))
    }

    pub fn scaled_c(&self, s: C64) -> Self {
        self.with_matrix(&self.matrix * s)
    }

    pub fn map_matrix(&self, f: impl FnOnce(&Matrix) -> Matrix) -> Result<Self> {
        let m = f(&self.matrix);
        if m.shape() != self.matrix.shape() {
            return Err(Error::Shape {
                rows: m.nrows(),
                cols: m.ncols(),
                expected: self.side(),
            });
        }
        Ok(self.with_matrix(m))
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        self.with_matrix((&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Largest entry of `|M - M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.side();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |a, z| a.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Pads with identities on the regions of `target` that are missing here.
    pub fn embed(&self, target: &[Region]) -> Result<Self> {
        let merged = merge_regions(&self.regions, target)?;
        if merged.len() == self.regions.len() {
            return Ok(self.clone());
        }
        let missing: Vec<Region> = merged
            .into_iter()
            .filter(|r| !self.has_label(&r.label))
            .collect();
        tensor(self, &Operator::identity(&missing)?)
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        let regions = merge_regions(&self.regions, &other.regions)?;
        let a = self.embed(&regions)?;
        let b = other.embed(&regions)?;
        Ok(a.with_matrix(&a.matrix + &b.matrix))
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// `⟨row|_label M |col⟩_label`, an operator on the remaining regions.
    pub fn slice(&self, label: &str, row: usize, col: usize) -> Result<Self> {
        let pos = self.positions(&[label])?[0];
        let dim = self.regions[pos].dim;
        for idx in [row, col] {
            if idx >= dim {
                return Err(Error::IndexOutOfRange {
                    label: label.to_string(),
                    index: idx,
                    dim,
                });
            }
        }
        let dims = self.dims();
        let st = strides(&dims);
        let kept: Vec<usize> = (0..dims.len()).filter(|&k| k != pos).collect();
        let ko = offsets(&dims, &st, &kept);
        let n = ko.len();
        let (r0, c0) = (row * st[pos], col * st[pos]);
        let m = Matrix::from_fn(n, n, |i, j| self.matrix[(ko[i] + r0, ko[j] + c0)]);
        Ok(Operator {
            regions: kept.iter().map(|&k| self.regions[k].clone()).collect(),
            matrix: m,
        })
    }

    /// Largest entry connecting different basis values of `label`.
    pub fn off_diagonal_defect(&self, label: &str) -> Result<f64> {
        let pos = self.positions(&[label])?[0];
        let dims = self.dims();
        let st = strides(&dims);
        let n = self.side();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if (i / st[pos]) % dims[pos] != (j / st[pos]) % dims[pos] {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        Ok(worst)
    }
}

/// Tensor product of operators on disjoint region sets.
pub fn tensor(a: &Operator, b: &Operator) -> Result<Operator> {
    if let Some(r) = b.regions.iter().find(|r| a.has_label(&r.label)) {
        return Err(Error::LabelCollision(r.label.clone()));
    }
    let mut regions = a.regions.clone();
    regions.extend(b.regions.iter().cloned());
    Operator::new(regions, a.matrix.kronecker(&b.matrix))
}

/// Product with implicit identity padding on the union of the region sets.
pub fn padded_mul(a: &Operator, b: &Operator) -> Result<Operator> {
    let regions = merge_regions(&a.regions, &b.regions)?;
    let pa = a.embed(&regions)?;
    let pb = b.embed(&regions)?;
    Ok(Operator {
        regions,
        matrix: &pa.matrix * &pb.matrix,
    })
}

/// Product of several operators, left to right, with identity padding.
pub fn padded_product(ops: &[&Operator]) -> Result<Operator> {
    let mut regions: Vec<Region> = Vec::new();
    for op in ops {
        regions = merge_regions(&regions, &op.regions)?;
    }
    let n: usize = regions.iter().map(|r| r.dim).product();
    let mut acc = Matrix::identity(n, n);
    for op in ops {
        acc *= op.embed(&regions)?.matrix;
    }
    Ok(Operator {
        regions,
        matrix: acc,
    })
}

/// Trace over the named regions. Tracing every region leaves a 1x1 operator
/// on the empty region set.
pub fn partial_trace<S: AsRef<str>>(m: &Operator, traced: &[S]) -> Result<Operator> {
    let tpos = m.positions(traced)?;
    if tpos.is_empty() {
        return Ok(m.clone());
    }
    let dims = m.dims();
    let st = strides(&dims);
    let kept: Vec<usize> = (0..dims.len()).filter(|k| !tpos.contains(k)).collect();
    let ko = offsets(&dims, &st, &kept);
    let to = offsets(&dims, &st, &tpos);
    let n = ko.len();
    let out = Matrix::from_fn(n, n, |i, j| {
        to.iter()
            .map(|&t| m.matrix[(ko[i] + t, ko[j] + t)])
            .sum::<C64>()
    });
    Ok(Operator {
        regions: kept.iter().map(|&k| m.regions[k].clone()).collect(),
        matrix: out,
    })
}

/// Transpose in the computational basis of the named regions only.
pub fn partial_transpose<S: AsRef<str>>(m: &Operator, flipped: &[S]) -> Result<Operator> {
    let fpos = m.positions(flipped)?;
    if fpos.is_empty() {
        return Ok(m.clone());
    }
    let dims = m.dims();
    let st = strides(&dims);
    let kept: Vec<usize> = (0..dims.len()).filter(|k| !fpos.contains(k)).collect();
    let ko = offsets(&dims, &st, &kept);
    let fo = offsets(&dims, &st, &fpos);
    let n = m.side();
    let mut out = Matrix::zeros(n, n);
    for &fa in &fo {
        for &fb in &fo {
            for &ka in &ko {
                for &kb in &ko {
                    out[(fb + ka, fa + kb)] = m.matrix[(fa + ka, fb + kb)];
                }
            }
        }
    }
    Ok(m.with_matrix(out))
}

/// Block sum `Σ_x |x⟩⟨x|_X ⊗ M_x`; all blocks must share a region set.
pub fn classical_block_sum(x: &Region, blocks: &[Operator]) -> Result<Operator> {
    if blocks.len() != x.dim {
        return Err(Error::Shape {
            rows: blocks.len(),
            cols: 1,
            expected: x.dim,
        });
    }
    let mut acc: Option<Operator> = None;
    for (k, b) in blocks.iter().enumerate() {
        let term = tensor(&Operator::unit(x, k, k)?, b)?;
        acc = Some(match acc {
            None => term,
            Some(a) => {
                if a.regions != term.regions {
                    let other = term
                        .regions
                        .iter()
                        .find(|r| !a.regions.contains(r))
                        .or_else(|| a.regions.iter().find(|r| !term.regions.contains(r)))
                        .map(|r| r.label.clone())
                        .unwrap_or_default();
                    return Err(Error::LabelNotFound(other));
                }
                a.add(&term)?
            }
        });
    }
    acc.ok_or_else(|| Error::ZeroDimension(x.label.clone()))
}

/// Frobenius distance after padding both operands to the union of their
/// regions. Returns infinity when a shared label has conflicting dimensions.
pub fn frob_distance(a: &Operator, b: &Operator) -> f64 {
    match a.sub(b) {
        Ok(d) => d.frobenius_norm(),
        Err(_) => f64::INFINITY,
    }
}
