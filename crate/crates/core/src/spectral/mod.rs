//! Bounding rectangles for the numerical range of the symmetrized pencil
//! operator, left half-plane certification and condition estimates for `M`.

mod lanczos;

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::linalg::{dense_sym_eig, dense_sym_eigvals, norm2, CholeskyFactor, DenseMatrix, SparseMatrix};
use crate::{Error, Result};
use lanczos::LanczosRun;
pub use lanczos::Which;
use num_traits::Float;

/// Problem sizes up to this use dense eigensolvers by default.
pub const DEFAULT_DENSE_CUTOFF: usize = 3000;
/// Default Ritz relative-residual tolerance.
pub const DEFAULT_REL_RESID_TOL: f64 = 1e-3;
/// Default relative-error bound of the iterative condition estimate.
pub const DEFAULT_ITERATIVE_DELTA: f64 = 0.05;

/// `tau`, `M` and `K` of `tau M^{-1} K`, together with a Cholesky factor of `M`.
#[derive(Debug, Clone)]
pub struct Pencil {
    tau: f64,
    m: SparseMatrix<f64>,
    k: SparseMatrix<f64>,
    factor: CholeskyFactor,
}

impl Pencil {
    pub fn new(tau: f64, m: SparseMatrix<f64>, k: SparseMatrix<f64>) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidArgument("tau must be positive and finite"));
        }
        if k.rows() != k.cols() {
            return Err(Error::NotSquare { rows: k.rows(), cols: k.cols() });
        }
        if m.rows() != k.rows() || m.cols() != k.cols() {
            return Err(Error::DimensionMismatch { expected: k.rows(), found: m.rows() });
        }
        if k.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let factor = CholeskyFactor::sparse(&m)?;
        Ok(Self { tau, m, k, factor })
    }

    /// Same `M` and `K` with another time step; the factorization is reused.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidArgument("tau must be positive and finite"));
        }
        Ok(Self { tau, ..self.clone() })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mass(&self) -> &SparseMatrix<f64> {
        &self.m
    }

    pub fn stiffness(&self) -> &SparseMatrix<f64> {
        &self.k
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    pub fn dim(&self) -> usize {
        self.k.rows()
    }

    /// `A x = tau M^{-1} K x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.factor.solve(&self.k.matvec(x)?)?;
        y.iter_mut().for_each(|v| *v *= self.tau);
        Ok(y)
    }

    /// Dense `A = tau M^{-1} K`.
    pub fn a_dense(&self) -> Result<DenseMatrix<f64>> {
        let n = self.dim();
        let kd = self.k.to_dense();
        let mut a = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.factor.solve(&kd.column(j))?;
            for i in 0..n {
                a[(i, j)] = self.tau * col[i];
            }
        }
        Ok(a)
    }

    /// Dense `G^{-1} (tau K) G^{-T}` with `M = G G^T`, similar to `A`.
    pub fn a_hat_dense(&self) -> Result<DenseMatrix<f64>> {
        let kd = self.k.to_dense().scale(self.tau);
        congruence_general(&self.factor, &kd)
    }
}

/// `G^{-1} B G^{-T}` for a general dense `B`.
fn congruence_general(factor: &CholeskyFactor, b: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
    let n = factor.dim();
    // rows of B G^{-T} are G^{-1} applied to rows of B
    let mut x = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let r = factor.half_solve(b.row(i))?;
        x.row_mut(i).copy_from_slice(&r);
    }
    let mut out = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let c = factor.half_solve(&x.column(j))?;
        for i in 0..n {
            out[(i, j)] = c[i];
        }
    }
    Ok(out)
}

/// `K = D + S` with `D` symmetric and `S` skew-symmetric.
///
/// The Hermitian part of the skew pencil is `C = S / i`; it is kept as the
/// real matrix `S`.
#[derive(Debug, Clone)]
pub struct SymSkewSplit {
    pub d: SparseMatrix<f64>,
    pub s: SparseMatrix<f64>,
}

pub fn split(k: &SparseMatrix<f64>) -> Result<SymSkewSplit> {
    if k.rows() != k.cols() {
        return Err(Error::NotSquare { rows: k.rows(), cols: k.cols() });
    }
    let kt = k.transpose();
    let mut d = Vec::with_capacity(2 * k.nnz());
    let mut s = Vec::with_capacity(2 * k.nnz());
    // Every entry is formed pairwise from (K_ij, K_ji) so the symmetry
    // relations hold exactly in floating point.
    for (i, j, v) in k.triplets() {
        let w = kt.get(i, j);
        d.push((i, j, 0.5 * v + 0.5 * w));
        s.push((i, j, 0.5 * v - 0.5 * w));
    }
    for (i, j, w) in kt.triplets() {
        if k.get(i, j) == 0.0 && !has_entry(k, i, j) {
            d.push((i, j, 0.5 * w));
            s.push((i, j, -0.5 * w));
        }
    }
    Ok(SymSkewSplit {
        d: SparseMatrix::from_triplets(k.rows(), k.cols(), &d)?,
        s: SparseMatrix::from_triplets(k.rows(), k.cols(), &s)?,
    })
}

fn has_entry(a: &SparseMatrix<f64>, i: usize, j: usize) -> bool {
    a.row(i).any(|(c, _)| c == j)
}

/// Eigenvalue estimates and achieved residuals, before any inflation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Extents {
    pub mu_min: f64,
    pub mu_max: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    /// Largest relative residual among the four estimates.
    pub residual: f64,
}

/// Axis-aligned rectangle `[mu_min, mu_max] x [nu_min, nu_max]` in the
/// complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BoundingRectangle {
    pub mu_min: f64,
    pub mu_max: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    /// Largest outward shift applied to any endpoint.
    pub inflation: f64,
    pub raw: Extents,
}

impl BoundingRectangle {
    /// Rectangle with the given endpoints and no inflation.
    pub fn exact(mu_min: f64, mu_max: f64, nu_min: f64, nu_max: f64) -> Result<Self> {
        if !(mu_min <= mu_max && nu_min <= nu_max) {
            return Err(Error::InvalidArgument("rectangle endpoints out of order"));
        }
        if ![mu_min, mu_max, nu_min, nu_max].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let raw = Extents { mu_min, mu_max, nu_min, nu_max, residual: 0.0 };
        Ok(Self { mu_min, mu_max, nu_min, nu_max, inflation: 0.0, raw })
    }

    /// Widens every endpoint outward by `max(2 tol |endpoint|, 1e-12)`.
    pub fn inflated(raw: Extents, tol: f64) -> Self {
        let widen = |v: f64| (2.0 * tol * v.abs()).max(1e-12);
        let (a, b, c, d) = (widen(raw.mu_min), widen(raw.mu_max), widen(raw.nu_min), widen(raw.nu_max));
        Self {
            mu_min: raw.mu_min - a,
            mu_max: raw.mu_max + b,
            nu_min: raw.nu_min - c,
            nu_max: raw.nu_max + d,
            inflation: a.max(b).max(c).max(d),
            raw,
        }
    }

    pub fn width(&self) -> f64 {
        self.mu_max - self.mu_min
    }

    pub fn height(&self) -> f64 {
        self.nu_max - self.nu_min
    }

    pub fn contains(&self, re: f64, im: f64) -> bool {
        (self.mu_min..=self.mu_max).contains(&re) && (self.nu_min..=self.nu_max).contains(&im)
    }

    pub fn is_lhp_certified(&self) -> bool {
        is_lhp_certified(self)
    }

    /// Smallest rectangle containing `self` that is symmetric about the
    /// real axis.
    pub fn symmetric_hull(&self) -> Self {
        let nu = self.nu_max.max(-self.nu_min);
        Self { nu_min: -nu, nu_max: nu, ..*self }
    }
}

pub fn is_lhp_certified(r: &BoundingRectangle) -> bool {
    r.mu_max <= 0.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EigenOptions {
    pub rel_resid_tol: f64,
    pub dense_cutoff: usize,
    /// Lanczos step limit; `None` means `5 n`.
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { rel_resid_tol: DEFAULT_REL_RESID_TOL, dense_cutoff: DEFAULT_DENSE_CUTOFF, max_iter: None, seed: 0x5eed }
    }
}

impl EigenOptions {
    fn check(&self) -> Result<()> {
        if !(self.rel_resid_tol > 0.0 && self.rel_resid_tol < 1.0) {
            return Err(Error::InvalidArgument("rel_resid_tol must lie in (0, 1)"));
        }
        Ok(())
    }

    fn iterations(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(5 * n)
    }
}

/// An eigenvalue estimate and its relative residual
/// `|B x - theta M x| / (|theta| |M x| + |B x|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EigEstimate {
    pub value: f64,
    pub residual: f64,
}

fn relative_residual(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn sym_residual(b: &SparseMatrix<f64>, m: &SparseMatrix<f64>, theta: f64, x: &[f64]) -> Result<f64> {
    let bx = b.matvec(x)?;
    let mx = m.matvec(x)?;
    let r: Vec<f64> = bx.iter().zip(&mx).map(|(p, q)| p - theta * q).collect();
    Ok(relative_residual(norm2(&r), theta.abs() * norm2(&mx) + norm2(&bx)))
}

fn check_pencil_dims(b: &SparseMatrix<f64>, factor: &CholeskyFactor) -> Result<()> {
    if b.rows() != b.cols() {
        return Err(Error::NotSquare { rows: b.rows(), cols: b.cols() });
    }
    if b.rows() != factor.dim() {
        return Err(Error::DimensionMismatch { expected: factor.dim(), found: b.rows() });
    }
    Ok(())
}

/// Extreme eigenvalue of the symmetric pencil `(B, M)`.
pub fn extreme_eig_sym_pencil(
    b: &SparseMatrix<f64>,
    m: &SparseMatrix<f64>,
    which: Which,
    opts: &EigenOptions,
) -> Result<EigEstimate> {
    let factor = CholeskyFactor::sparse(m)?;
    let out = sym_pencil_extremes(b, m, &factor, &[which], opts)?;
    Ok(out[0])
}

/// Both extreme eigenvalues `(min, max)` of the symmetric pencil `(B, M)`.
pub fn extreme_eigs_sym_pencil(
    b: &SparseMatrix<f64>,
    m: &SparseMatrix<f64>,
    opts: &EigenOptions,
) -> Result<(EigEstimate, EigEstimate)> {
    let factor = CholeskyFactor::sparse(m)?;
    let out = sym_pencil_extremes(b, m, &factor, &[Which::Min, Which::Max], opts)?;
    Ok((out[0], out[1]))
}

fn sym_pencil_extremes(
    b: &SparseMatrix<f64>,
    m: &SparseMatrix<f64>,
    factor: &CholeskyFactor,
    wanted: &[Which],
    opts: &EigenOptions,
) -> Result<Vec<EigEstimate>> {
    opts.check()?;
    check_pencil_dims(b, factor)?;
    let n = b.rows();
    if b.symmetry_defect() > crate::linalg::SYM_EIG_TOLERANCE {
        return Err(Error::NotSymmetric { asymmetry: b.symmetry_defect() });
    }
    if n <= opts.dense_cutoff {
        let hat = factor.congruence_dense(&b.to_dense())?;
        let eig = dense_sym_eig(&hat)?;
        return wanted
            .iter()
            .map(|w| {
                let idx = match w {
                    Which::Min => 0,
                    Which::Max => n - 1,
                };
                let theta = eig.values[idx];
                let x = factor.half_solve_transpose(&eig.vectors.column(idx))?;
                Ok(EigEstimate { value: theta, residual: sym_residual(b, m, theta, &x)? })
            })
            .collect();
    }
    let op = |y: &[f64]| -> Result<Vec<f64>> {
        let x = factor.half_solve_transpose(y)?;
        factor.half_solve(&b.matvec(&x)?)
    };
    let resid = |theta: f64, y: &[f64]| -> Result<f64> {
        let x = factor.half_solve_transpose(y)?;
        sym_residual(b, m, theta, &x)
    };
    let run = LanczosRun {
        n,
        op: &op,
        residual: &resid,
        tol: opts.rel_resid_tol,
        max_iter: opts.iterations(n),
        seed: opts.seed,
    };
    Ok(run.extremes(wanted)?.into_iter().map(|p| EigEstimate { value: p.value, residual: p.residual }).collect())
}

/// Largest eigenvalue `nu_max >= 0` of the Hermitian pencil `(S / i, M)` for
/// a real skew-symmetric `S`. The spectrum is symmetric about zero.
pub fn extreme_eig_skew_pencil(
    s: &SparseMatrix<f64>,
    m: &SparseMatrix<f64>,
    opts: &EigenOptions,
) -> Result<EigEstimate> {
    let factor = CholeskyFactor::sparse(m)?;
    skew_pencil_max(s, m, &factor, opts)
}

/// Residual of the Hermitian pencil `(C, M)`, `C = -i S`, at `x = xr + i xi`.
fn skew_residual(s: &SparseMatrix<f64>, m: &SparseMatrix<f64>, sigma: f64, xr: &[f64], xi: &[f64]) -> Result<f64> {
    // C x = S xi - i S xr
    let (sxr, sxi) = (s.matvec(xr)?, s.matvec(xi)?);
    let (mxr, mxi) = (m.matvec(xr)?, m.matvec(xi)?);
    let mut res = 0.0;
    let mut cx = 0.0;
    let mut mx = 0.0;
    for i in 0..xr.len() {
        let (cre, cim) = (sxi[i], -sxr[i]);
        let (re, im) = (cre - sigma * mxr[i], cim - sigma * mxi[i]);
        res += re * re + im * im;
        cx += cre * cre + cim * cim;
        mx += mxr[i] * mxr[i] + mxi[i] * mxi[i];
    }
    Ok(relative_residual(Float::sqrt(res), sigma.abs() * Float::sqrt(mx) + Float::sqrt(cx)))
}

/// Residual for a real vector `y` with `-S_hat^2 y = sigma^2 y`: the complex
/// eigenvector of `-i S_hat` is `y - i S_hat y / sigma`.
fn skew_residual_from_real(
    s: &SparseMatrix<f64>,
    m: &SparseMatrix<f64>,
    factor: &CholeskyFactor,
    sigma: f64,
    y: &[f64],
) -> Result<f64> {
    if sigma == 0.0 {
        let x = factor.half_solve_transpose(y)?;
        let zero = vec![0.0; x.len()];
        return skew_residual(s, m, 0.0, &x, &zero);
    }
    let xr = factor.half_solve_transpose(y)?;
    let shat_y = factor.half_solve(&s.matvec(&xr)?)?;
    let zi: Vec<f64> = shat_y.iter().map(|v| -v / sigma).collect();
    let xi = factor.half_solve_transpose(&zi)?;
    skew_residual(s, m, sigma, &xr, &xi)
}

fn skew_pencil_max(
    s: &SparseMatrix<f64>,
    m: &SparseMatrix<f64>,
    factor: &CholeskyFactor,
    opts: &EigenOptions,
) -> Result<EigEstimate> {
    opts.check()?;
    check_pencil_dims(s, factor)?;
    let n = s.rows();
    if s.max_abs() == 0.0 {
        return Ok(EigEstimate { value: 0.0, residual: 0.0 });
    }
    if n <= opts.dense_cutoff {
        let shat = factor.congruence_dense(&s.to_dense())?;
        let gram = shat.transpose().matmul(&shat)?;
        let eig = dense_sym_eig(&gram)?;
        let sigma = Float::sqrt(eig.max().max(0.0));
        let y = eig.vectors.column(n - 1);
        let residual = skew_residual_from_real(s, m, factor, sigma, &y)?;
        return Ok(EigEstimate { value: sigma, residual });
    }
    let op = |y: &[f64]| -> Result<Vec<f64>> {
        // S_hat^T S_hat y = -S_hat (S_hat y)
        let u = factor.half_solve(&s.matvec(&factor.half_solve_transpose(y)?)?)?;
        let mut v = factor.half_solve(&s.matvec(&factor.half_solve_transpose(&u)?)?)?;
        v.iter_mut().for_each(|x| *x = -*x);
        Ok(v)
    };
    let resid = |theta: f64, y: &[f64]| -> Result<f64> {
        skew_residual_from_real(s, m, factor, Float::sqrt(theta.max(0.0)), y)
    };
    let run = LanczosRun {
        n,
        op: &op,
        residual: &resid,
        tol: opts.rel_resid_tol,
        max_iter: opts.iterations(n),
        seed: opts.seed,
    };
    let pair = run.extremes(&[Which::Max])?.remove(0);
    Ok(EigEstimate { value: Float::sqrt(pair.value.max(0.0)), residual: pair.residual })
}

/// Eigenvalue extents of `(tau D, M)` and `(tau C, M)` without inflation.
pub fn pencil_extents(p: &Pencil, opts: &EigenOptions) -> Result<Extents> {
    let parts = split(p.stiffness())?;
    let re = sym_pencil_extremes(&parts.d, p.mass(), p.factor(), &[Which::Min, Which::Max], opts)?;
    let im = skew_pencil_max(&parts.s, p.mass(), p.factor(), opts)?;
    let tau = p.tau();
    Ok(Extents {
        mu_min: tau * re[0].value,
        mu_max: tau * re[1].value,
        nu_min: -tau * im.value,
        nu_max: tau * im.value,
        residual: re[0].residual.max(re[1].residual).max(im.residual),
    })
}

/// Rectangle enclosing the numerical range of `G^{-1} (tau K) G^{-T}`.
pub fn bounding_rectangle(p: &Pencil, opts: &EigenOptions) -> Result<BoundingRectangle> {
    let raw = pencil_extents(p, opts)?;
    Ok(BoundingRectangle::inflated(raw, opts.rel_resid_tol))
}

/// Rectangle enclosing the numerical range of a dense real matrix `A`,
/// from the extreme eigenvalues of its Hermitian and skew parts.
pub fn bounding_rectangle_dense(a: &DenseMatrix<f64>, opts: &EigenOptions) -> Result<BoundingRectangle> {
    opts.check()?;
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix"));
    }
    if n > opts.dense_cutoff {
        return Err(Error::TooLarge { n, cutoff: opts.dense_cutoff });
    }
    let h = DenseMatrix::from_fn(n, n, |i, j| 0.5 * a[(i, j)] + 0.5 * a[(j, i)]);
    let s = DenseMatrix::from_fn(n, n, |i, j| 0.5 * a[(i, j)] - 0.5 * a[(j, i)]);
    let he = dense_sym_eigvals(&h)?;
    let se = dense_sym_eigvals(&s.transpose().matmul(&s)?)?;
    let nu = Float::sqrt(se[n - 1].max(0.0));
    let raw = Extents { mu_min: he[0], mu_max: he[n - 1], nu_min: -nu, nu_max: nu, residual: 0.0 };
    Ok(BoundingRectangle::inflated(raw, opts.rel_resid_tol))
}

/// `kappa_tilde = lambda_max / lambda_min` of `M` and the adjusted
/// `kappa_safe = kappa_tilde / (1 - delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CondEstimate {
    pub kappa_tilde: f64,
    pub delta: f64,
    pub kappa_safe: f64,
}

impl CondEstimate {
    pub fn new(kappa_tilde: f64, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidArgument("delta must lie in [0, 1)"));
        }
        if !(kappa_tilde.is_finite() && kappa_tilde >= 1.0) {
            return Err(Error::InvalidArgument("condition number must be finite and at least 1"));
        }
        Ok(Self { kappa_tilde, delta, kappa_safe: kappa_tilde / (1.0 - delta) })
    }
}

/// Spectral condition number of the SPD matrix `M`. With `delta = None` the
/// default for the chosen path is used (0 dense, 0.05 iterative).
pub fn cond_estimate(m: &SparseMatrix<f64>, delta: Option<f64>, opts: &EigenOptions) -> Result<CondEstimate> {
    opts.check()?;
    let n = m.rows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix"));
    }
    let factor = CholeskyFactor::sparse(m)?;
    let (lo, hi, default_delta) = if n <= opts.dense_cutoff {
        let eig = dense_sym_eigvals(&m.to_dense())?;
        (eig[0], eig[n - 1], 0.0)
    } else {
        // smallest eigenvalue of M is the reciprocal of the largest of M^{-1}
        let op_hi = |y: &[f64]| m.matvec(y);
        let resid_hi = |theta: f64, y: &[f64]| -> Result<f64> {
            let my = m.matvec(y)?;
            let r: Vec<f64> = my.iter().zip(y).map(|(a, b)| a - theta * b).collect();
            Ok(relative_residual(norm2(&r), theta.abs() * norm2(y) + norm2(&my)))
        };
        let op_lo = |y: &[f64]| factor.solve(y);
        let resid_lo = |theta: f64, y: &[f64]| -> Result<f64> { resid_hi(1.0 / theta, y) };
        let mk =
            |op: &'_ dyn Fn(&[f64]) -> Result<Vec<f64>>, res: &'_ dyn Fn(f64, &[f64]) -> Result<f64>| -> Result<f64> {
                let run = LanczosRun {
                    n,
                    op,
                    residual: res,
                    tol: opts.rel_resid_tol,
                    max_iter: opts.iterations(n),
                    seed: opts.seed,
                };
                Ok(run.extremes(&[Which::Max])?[0].value)
            };
        let hi = mk(&op_hi, &resid_hi)?;
        let inv_lo = mk(&op_lo, &resid_lo)?;
        (1.0 / inv_lo, hi, DEFAULT_ITERATIVE_DELTA)
    };
    if lo <= 0.0 {
        return Err(Error::NotSpd { step: 0 });
    }
    CondEstimate::new((hi / lo).max(1.0), delta.unwrap_or(default_delta))
}
