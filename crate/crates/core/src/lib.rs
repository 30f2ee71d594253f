//! Error-controlled computation of `exp(tau * M^{-1} K) b` for pencils with a
//! well-conditioned symmetric positive definite mass matrix `M`.
//!
//! The scalar approximation `r(z) ~ e^z` is certified on a rectangle that
//! encloses the numerical range of the similarity transform
//! `M^{1/2} (tau M^{-1} K) M^{-1/2}`. The rectangle comes from two symmetric
//! generalized eigenproblems built from the symmetric and skew parts of `K`,
//! and the matrix error is then bounded by
//! `(1 + sqrt 2) * kappa(M)^{1/2} * sup_R |r(z) - e^z|`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod expmv;
pub mod fem;
pub mod linalg;
pub mod rational;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// `1 + sqrt(2)`, the Crouzeix-Palencia constant for the numerical range.
pub const CROUZEIX: f64 = 2.414_213_562_373_095;
