//! Dense reference computations: the matrix exponential by scaling and
//! squaring, dense evaluation of rational functions of a matrix, and a
//! direct check of the matrix error bound.

use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::linalg::{dense_sym_eig, lu_factor, DenseMatrix};
use crate::rational::{CertifiedApproximant, PartialFractionRational, RegionBoundary};
use crate::spectral::{BoundingRectangle, Pencil};
use crate::{Error, Result, CROUZEIX};
use num_traits::Float;

/// Problem sizes above this are refused by the dense oracles.
pub const DENSE_ORACLE_CUTOFF: usize = 3000;

/// Degree 13 Padé coefficients for `e^x`.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
/// Largest 1-norm for which the degree 13 approximant is accurate to unit
/// roundoff.
const THETA13: f64 = 5.371_920_351_148_152;

/// `e^A` by scaling and squaring with the degree 13 diagonal Padé
/// approximant.
pub fn expm_dense(a: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n > DENSE_ORACLE_CUTOFF {
        return Err(Error::TooLarge { n, cutoff: DENSE_ORACLE_CUTOFF });
    }
    if !a.all_finite() {
        return Err(Error::NonFinite);
    }
    let norm = a.norm_one();
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > THETA13 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = a.scale(scale);
    let id = DenseMatrix::<f64>::identity(n);
    let a2 = a.matmul(&a)?;
    let a4 = a2.matmul(&a2)?;
    let a6 = a4.matmul(&a2)?;
    let b = &PADE13;
    let lincomb = |terms: &[(f64, &DenseMatrix<f64>)]| -> Result<DenseMatrix<f64>> {
        let mut acc = DenseMatrix::zeros(n, n);
        for &(c, m) in terms {
            acc = acc.combine(1.0, m, c)?;
        }
        Ok(acc)
    };
    let u_inner = a6.matmul(&lincomb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)])?)?;
    let u = a.matmul(&lincomb(&[(1.0, &u_inner), (b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &id)])?)?;
    let v_inner = a6.matmul(&lincomb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)])?)?;
    let v = lincomb(&[(1.0, &v_inner), (b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &id)])?;
    let p = v.combine(1.0, &u, 1.0)?;
    let q = v.combine(1.0, &u, -1.0)?;
    let mut e = lu_factor(&q)?.solve_matrix(&p)?;
    for _ in 0..squarings {
        e = e.matmul(&e)?;
    }
    Ok(e)
}

/// `e^A b` with the dense oracle.
pub fn expmv_dense(a: &DenseMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    expm_dense(a)?.matvec(b)
}

/// Dense `gamma I + sum_k alpha_k (beta_k I - A)^{-1}`.
pub fn rational_dense(r: &PartialFractionRational, a: &DenseMatrix<f64>) -> Result<DenseMatrix<Complex64>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let ac = a.to_complex();
    let id = DenseMatrix::<Complex64>::identity(n);
    let mut out = id.scale(r.gamma);
    for (&beta, &alpha) in r.poles.iter().zip(&r.weights) {
        let shifted = id.combine(beta, &ac, Complex64::new(-1.0, 0.0))?;
        let inv = lu_factor(&shifted)
            .map_err(|e| match e {
                Error::SingularMatrix { .. } => Error::SingularShift { pole: beta },
                other => other,
            })?
            .solve_matrix(&id)?;
        out = out.combine(Complex64::new(1.0, 0.0), &inv, alpha)?;
    }
    Ok(out)
}

/// Dense `(form(A / s))^s` of a certified approximant.
pub fn certified_dense(c: &CertifiedApproximant, a: &DenseMatrix<f64>) -> Result<DenseMatrix<Complex64>> {
    let s = c.scaling.max(1);
    let base = rational_dense(&c.form, &a.scale(1.0 / f64::from(s)))?;
    let mut out = base.clone();
    for _ in 1..s {
        out = out.matmul(&base)?;
    }
    Ok(out)
}

/// Both sides of `|r(A) - e^A|_2 <= (1 + sqrt 2) kappa(M)^{1/2} sup_R |r - exp|`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub kappa: f64,
    /// Sampled `max |r - exp|` on the rectangle boundary, without a safety
    /// factor.
    pub sup_error: f64,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Evaluates both sides densely. The right side uses the rectangle, which
/// contains the numerical range of the symmetrized matrix.
pub fn bound_check(
    p: &Pencil,
    r: &CertifiedApproximant,
    rect: &BoundingRectangle,
    per_side: usize,
) -> Result<BoundReport> {
    let a = p.a_dense()?;
    let ra = certified_dense(r, &a)?;
    let ea = expm_dense(&a)?.to_complex();
    let diff = ra.combine(Complex64::new(1.0, 0.0), &ea, Complex64::new(-1.0, 0.0))?;
    let lhs = spectral_norm(&diff)?;
    let m = p.mass().to_dense();
    let eig = dense_sym_eig(&m)?;
    if eig.min() <= 0.0 {
        return Err(Error::NotSpd { step: 0 });
    }
    let kappa = eig.max() / eig.min();
    let boundary = RegionBoundary::new(rect, per_side)?;
    let sup_error = boundary.max_error(r)?;
    Ok(BoundReport { lhs, rhs: CROUZEIX * Float::sqrt(kappa) * sup_error, kappa, sup_error })
}

/// `|X|_2` from the largest eigenvalue of `X^H X`.
pub fn spectral_norm(x: &DenseMatrix<Complex64>) -> Result<f64> {
    let g = x.adjoint().matmul(x)?;
    let n = g.rows();
    // real symmetric embedding [[Re, -Im], [Im, Re]] has the same spectrum (doubled)
    let emb = DenseMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = g[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let sym = DenseMatrix::from_fn(2 * n, 2 * n, |i, j| 0.5 * (emb[(i, j)] + emb[(j, i)]));
    Ok(Float::sqrt(dense_sym_eig(&sym)?.max().max(0.0)))
}
