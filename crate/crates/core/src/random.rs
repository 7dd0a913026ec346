//! Seeded random operators and states for property checks and sweeps.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::{DenseOperator, Statevector, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Complex Ginibre matrix with standard normal entries.
pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseOperator {
    DenseOperator::from_matrix_unchecked(DMatrix::from_fn(dim, dim, |_, _| gaussian(rng)))
}

/// Haar-random unitary (QR of a Ginibre matrix with the R-diagonal phases removed).
pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseOperator {
    let qr = ginibre(dim, rng).into_matrix().qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            col *= d / d.norm();
        }
    }
    DenseOperator::from_matrix_unchecked(q)
}

/// Random Hermitian matrix `(G + G†)/2`.
pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseOperator {
    let g = ginibre(dim, rng).into_matrix();
    DenseOperator::from_matrix_unchecked((&g + g.adjoint()) * C64::new(0.5, 0.0))
}

/// Random unit vector over the given register shape.
pub fn state<R: Rng + ?Sized>(shape: Vec<usize>, rng: &mut R) -> Statevector {
    let dim: usize = shape.iter().product();
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    Statevector::normalized(v, shape).expect("gaussian vector is nonzero")
}

/// Random complex coefficients with `Σ|c_i| = total`.
pub fn coefficients<R: Rng + ?Sized>(count: usize, total: f64, rng: &mut R) -> Vec<C64> {
    let raw: Vec<C64> = (0..count)
        .map(|_| {
            C64::from_polar(
                rng.random_range(0.05..1.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let sum: f64 = raw.iter().map(|z| z.norm()).sum();
    raw.into_iter().map(|z| z * (total / sum)).collect()
}
