//! Dense and sparse storage, factorizations and eigensolvers.

mod band;
mod cholesky;
mod dense;
mod eig;
mod lu;
mod scalar;
mod sparse;
mod svd;

pub use band::{rcm_ordering, BandCholesky, BandLu, Permutation};
pub use cholesky::{cholesky, CholeskyFactor};
pub use dense::DenseMatrix;
pub use eig::{dense_sym_eig, dense_sym_eigvals, eigvals_general, tridiagonal_eig, SymEig, SYM_EIG_TOLERANCE};
pub use lu::{lu_factor, LuFactor, SparseLuFactor};
pub use scalar::Scalar;
pub use sparse::SparseMatrix;
pub use svd::{householder_qr_r, smallest_right_singular_vector};

use alloc::vec::Vec;

use crate::{Error, Result};
use num_traits::Float;

/// Relative pivot threshold below which a factorization reports singularity.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

pub fn norm2<T: Scalar>(x: &[T]) -> f64 {
    // Scaled to avoid overflow on large FEM vectors.
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.modulus()));
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = x.iter().map(|v| Float::powi(v.modulus() / scale, 2)).sum();
    scale * sum.sqrt()
}

pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + a.conj() * b)
}

pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

/// Anything that can apply itself to a vector.
pub trait LinearOperator<T: Scalar> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], out: &mut [T]);
}

impl<T: Scalar> LinearOperator<T> for DenseMatrix<T> {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn apply(&self, x: &[T], out: &mut [T]) {
        self.matvec_into(x, out);
    }
}

impl<T: Scalar> LinearOperator<T> for SparseMatrix<T> {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn apply(&self, x: &[T], out: &mut [T]) {
        self.matvec_into(x, out);
    }
}

/// Power-iteration estimate of `||A||_2` from `A^H A`.
///
/// Every iterate is a Rayleigh-quotient lower bound on the true norm.
pub fn spectral_norm_estimate<T: Scalar>(a: &DenseMatrix<T>, iters: usize, seed: u64) -> Result<f64> {
    if iters == 0 {
        return Err(Error::InvalidArgument("iters must be at least 1"));
    }
    let n = a.cols();
    if n == 0 {
        return Ok(0.0);
    }
    let mut x: Vec<T> = random_unit_vector(n, seed);
    let mut ax = alloc::vec![T::zero(); a.rows()];
    let mut estimate = 0.0;
    for _ in 0..iters {
        a.matvec_into(&x, &mut ax);
        let nax = norm2(&ax);
        if nax == 0.0 {
            return Ok(estimate);
        }
        estimate = nax;
        let y = a.adjoint_matvec(&ax)?;
        let ny = norm2(&y);
        if ny == 0.0 {
            return Ok(estimate);
        }
        let inv = T::from_real(1.0 / ny);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = *yi * inv;
        }
    }
    Ok(estimate)
}

pub(crate) fn random_unit_vector<T: Scalar>(n: usize, seed: u64) -> Vec<T> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<T> = (0..n).map(|_| T::from_real(rng.gen::<f64>() - 0.5)).collect();
    let nv = norm2(&v);
    let inv = T::from_real(1.0 / nv);
    v.iter_mut().for_each(|x| *x = *x * inv);
    v
}
