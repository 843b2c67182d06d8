//! Seeded random states, channels, POVMs and instruments.
//!
//! The generator is PCG32 (`rand_pcg::Pcg32`, XSH-RR output on a 64-bit LCG
//! state) seeded with `SeedableRng::seed_from_u64`. Instance `i` of a sweep
//! uses [`instance_seed`]`(seed, i)`, so sweeps are reproducible and
//! independent of evaluation order.

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_distr::StandardNormal;
use rand_pcg::Pcg32;

use crate::region::{Matrix, Operator, Region, C64};
use crate::spectral::{HermitianSpectrum, Tolerances};

pub type SeededRng = Pcg32;

pub const GENERATOR: &str = "pcg32-xsh-rr-64/32";

pub fn rng(seed: u64) -> SeededRng {
    Pcg32::seed_from_u64(seed)
}

pub fn instance_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut SeededRng) -> Matrix {
    let s = 0.5f64.sqrt();
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// `G G† / Tr(G G†)` with `G` of shape `d × rank`; full rank almost surely
/// when `rank >= d`.
pub fn density_matrix(d: usize, rank: usize, rng: &mut SeededRng) -> Matrix {
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let t = m.trace();
    m / t
}

pub fn density(regions: &[Region], rng: &mut SeededRng) -> Operator {
    let d: usize = regions.iter().map(|r| r.dim).product();
    Operator::new(regions.to_vec(), density_matrix(d, d, rng)).expect("square by construction")
}

pub fn pure_density(regions: &[Region], rng: &mut SeededRng) -> Operator {
    let d: usize = regions.iter().map(|r| r.dim).product();
    Operator::new(regions.to_vec(), density_matrix(d, 1, rng)).expect("square by construction")
}

/// Haar-random unitary (QR of a Ginibre matrix with the phases of `R` fixed).
pub fn unitary(d: usize, rng: &mut SeededRng) -> Matrix {
    let qr = ginibre(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `S^{-1/2}` for the positive matrix `S = Σ K†K` (or `Σ G`).
fn inverse_sqrt(s: &Matrix) -> Matrix {
    let spec = HermitianSpectrum::of(s, &Tolerances::default()).expect("Hermitian by construction");
    spec.apply(|l| 1.0 / l.sqrt())
}

/// Gaussian Kraus operators whitened by `(Σ K†K)^{-1/2}`, giving a CPT map.
/// At least `⌈d_in / d_out⌉` operators are drawn so that `Σ K†K` is
/// invertible.
pub fn kraus(d_in: usize, d_out: usize, count: usize, rng: &mut SeededRng) -> Vec<Matrix> {
    let count = count.max(d_in.div_ceil(d_out.max(1))).max(1);
    let raw: Vec<Matrix> = (0..count).map(|_| ginibre(d_out, d_in, rng)).collect();
    let s = raw
        .iter()
        .fold(Matrix::zeros(d_in, d_in), |acc, k| acc + k.adjoint() * k);
    let w = inverse_sqrt(&s);
    raw.into_iter().map(|k| k * &w).collect()
}

/// POVM with `n` elements `S^{-1/2} G_y S^{-1/2}` from random positive `G_y`.
pub fn povm_matrices(d: usize, n: usize, rng: &mut SeededRng) -> Vec<Matrix> {
    let raw: Vec<Matrix> = (0..n)
        .map(|_| {
            let g = ginibre(d, d, rng);
            &g * g.adjoint()
        })
        .collect();
    let s = raw.iter().fold(Matrix::zeros(d, d), |acc, g| acc + g);
    let w = inverse_sqrt(&s);
    raw.into_iter()
        .map(|g| {
            let e = &w * g * &w;
            (&e + e.adjoint()) * C64::new(0.5, 0.0)
        })
        .collect()
}

pub fn povm(region: &Region, n: usize, rng: &mut SeededRng) -> Vec<Operator> {
    povm_matrices(region.dim, n, rng)
        .into_iter()
        .map(|m| Operator::new(vec![region.clone()], m).expect("square by construction"))
        .collect()
}

/// Probability vector with all entries bounded away from zero.
pub fn probabilities(n: usize, rng: &mut SeededRng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Random CPT Kraus set split into `outcomes` groups, each non-empty.
pub fn instrument_elements(
    d_in: usize,
    d_out: usize,
    outcomes: usize,
    kraus_per_outcome: usize,
    rng: &mut SeededRng,
) -> Vec<Vec<Matrix>> {
    let outcomes = outcomes.max(1);
    let per = kraus_per_outcome.max(1);
    let all = kraus(d_in, d_out, outcomes * per, rng);
    let mut groups: Vec<Vec<Matrix>> = vec![Vec::new(); outcomes];
    for (i, k) in all.into_iter().enumerate() {
        groups[(i / per).min(outcomes - 1)].push(k);
    }
    groups
}
