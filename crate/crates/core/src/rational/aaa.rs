//! Discrete AAA rational interpolation of `e^z` on boundary samples.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::partial::conjugate_structure_with;
use super::RegionBoundary;
use crate::linalg::{eigvals_general, lu_factor, smallest_right_singular_vector, DenseMatrix};
use crate::spectral::BoundingRectangle;
use crate::{Error, Result};

/// Default upper limit on the denominator degree.
pub const DEFAULT_M_MAX: usize = 128;
/// Times the sample density is doubled to confirm an AAA fit.
const MAX_REFINEMENTS: usize = 2;
/// Poles with residue below this fraction of `max |f|` are treated as
/// spurious.
const SPURIOUS_RESIDUE: f64 = 1e-13;
/// Symmetrization tolerances for AAA poles. Once a fit is far below its
/// tolerance the poles are poorly determined and miss exact conjugacy by
/// much more than rounding; the refit certifies whatever basis it gets.
const POLE_REAL_TOL: f64 = 1e-3;
const POLE_PAIR_TOL: f64 = 1e-2;
/// Rectangles with height below this fraction of their width count as flat.
const FLAT: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A barycentric rational interpolant
/// `r(z) = sum_k w_k f_k / (z - z_k) / sum_k w_k / (z - z_k)`.
#[derive(Debug, Clone)]
pub struct AaaFit {
    pub support: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    /// Largest error on the samples the fit was built from.
    pub error: f64,
}

impl AaaFit {
    /// Denominator degree.
    pub fn degree(&self) -> usize {
        self.support.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        if self.support.len() == 1 {
            return self.values[0];
        }
        let mut num = ZERO;
        let mut den = ZERO;
        for ((&zk, &fk), &wk) in self.support.iter().zip(&self.values).zip(&self.weights) {
            let d = z - zk;
            if d == ZERO {
                return fk;
            }
            let c = wk / d;
            num += c * fk;
            den += c;
        }
        num / den
    }

    /// Zeros of the denominator, from the arrowhead pencil
    /// `[[0, w^T], [1, Z]] - lambda diag(0, I)` with the infinite
    /// eigenvalues deflated.
    pub fn poles(&self) -> Result<Vec<Complex64>> {
        let m = self.support.len();
        if m <= 1 {
            return Ok(Vec::new());
        }
        // Q: orthonormal basis of {u : sum w_k u_k = 0}
        let wbar: Vec<Complex64> = self.weights.iter().map(|w| w.conj()).collect();
        let hq = householder(&wbar);
        let ones = vec![ONE; m];
        let hg = householder(&ones);
        let q = DenseMatrix::from_fn(m, m - 1, |i, j| hq[(i, j + 1)]);
        let g = DenseMatrix::from_fn(m - 1, m, |i, j| hg[(i + 1, j)]);
        let zq = DenseMatrix::from_fn(m, m - 1, |i, j| self.support[i] * q[(i, j)]);
        let gq = g.matmul(&q)?;
        let gzq = g.matmul(&zq)?;
        let t = lu_factor(&gq)?.solve_matrix(&gzq)?;
        eigvals_general(&t)
    }

    /// Residue of the interpolant at a simple pole.
    pub fn residue(&self, pole: Complex64) -> Complex64 {
        let mut num = ZERO;
        let mut dprime = ZERO;
        for ((&zk, &fk), &wk) in self.support.iter().zip(&self.values).zip(&self.weights) {
            let d = pole - zk;
            num += wk * fk / d;
            dprime -= wk / (d * d);
        }
        num / dprime
    }
}

/// Householder reflector `H = I - 2 v v^H / (v^H v)` with `H x` a multiple
/// of `e_1`; its first column is parallel to `x`.
fn householder(x: &[Complex64]) -> DenseMatrix<Complex64> {
    let m = x.len();
    let norm = crate::linalg::norm2(x);
    let mut v = x.to_vec();
    let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
    v[0] += phase * norm;
    let vv: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    DenseMatrix::from_fn(m, m, |i, j| {
        let id = if i == j { ONE } else { ZERO };
        if vv == 0.0 {
            id
        } else {
            id - v[i] * v[j].conj() * (2.0 / vv)
        }
    })
}

/// Index of the sample equal to `conj(z)`, if any.
fn conjugate_index(z: &[Complex64], j: usize, scale: f64) -> Option<usize> {
    let target = z[j].conj();
    let (best, dist) =
        z.iter().enumerate().map(|(i, w)| (i, (w - target).norm())).min_by(|a, b| a.1.total_cmp(&b.1))?;
    (dist <= 1e-14 * scale && best != j).then_some(best)
}

/// Greedy AAA: add the worst sample (and its conjugate, when present) as a
/// support point until the sample error is at most `tol` or the degree
/// would exceed `m_max`.
pub fn aaa(z: &[Complex64], f: &[Complex64], tol: f64, m_max: usize) -> Result<AaaFit> {
    Ok(aaa_steps(z, f, tol, m_max)?.pop().expect("at least one fit"))
}

/// Every intermediate AAA interpolant, in order of increasing degree; the
/// last one meets `tol`.
pub(crate) fn aaa_steps(z: &[Complex64], f: &[Complex64], tol: f64, m_max: usize) -> Result<Vec<AaaFit>> {
    let n = z.len();
    if n == 0 || f.len() != n {
        return Err(Error::DimensionMismatch { expected: n.max(1), found: f.len() });
    }
    let scale = z.iter().fold(1.0_f64, |m, w| m.max(w.norm()));
    let mean = f.iter().sum::<Complex64>() / n as f64;
    let mut approx = vec![mean; n];
    let mut is_support = vec![false; n];
    let mut support: Vec<usize> = Vec::new();
    let mut weights: Vec<Complex64> = Vec::new();
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let pick = |idx: &[usize], src: &[Complex64]| idx.iter().map(|&i| src[i]).collect::<Vec<_>>();
    loop {
        let (jmax, err) = (0..n)
            .filter(|&i| !is_support[i])
            .map(|i| (i, (f[i] - approx[i]).norm()))
            .fold((usize::MAX, 0.0_f64), |acc, x| if x.1 > acc.1 { x } else { acc });
        best = best.min(err);
        if !support.is_empty() {
            history.push(AaaFit {
                support: pick(&support, z),
                values: pick(&support, f),
                weights: weights.clone(),
                error: err,
            });
        }
        if err <= tol || jmax == usize::MAX {
            if support.is_empty() {
                // a constant already meets the tolerance
                history.push(AaaFit { support: vec![z[0]], values: vec![mean], weights: vec![ONE], error: err });
            }
            return Ok(history);
        }
        let mut new = vec![jmax];
        if let Some(c) = conjugate_index(z, jmax, scale).filter(|&c| !is_support[c]) {
            new.push(c);
        }
        if support.len() + new.len() > m_max + 1 {
            return Err(Error::DegreeExhausted { m_max, best_error: best });
        }
        for i in new {
            is_support[i] = true;
            support.push(i);
        }
        let rows: Vec<usize> = (0..n).filter(|&i| !is_support[i]).collect();
        if rows.is_empty() {
            let zs = pick(&support, z);
            let w = interpolating_weights(&zs);
            history.push(AaaFit { support: zs, values: pick(&support, f), weights: w, error: 0.0 });
            return Ok(history);
        }
        let loewner = DenseMatrix::from_fn(rows.len(), support.len(), |r, k| {
            let (i, s) = (rows[r], support[k]);
            (f[i] - f[s]) / (z[i] - z[s])
        });
        weights = smallest_right_singular_vector(&loewner)?.1;
        for &i in &rows {
            let mut num = ZERO;
            let mut den = ZERO;
            for (k, &s) in support.iter().enumerate() {
                let c = weights[k] / (z[i] - z[s]);
                num += c * f[s];
                den += c;
            }
            approx[i] = num / den;
        }
        for &s in &support {
            approx[s] = f[s];
        }
    }
}

/// Weights of the polynomial interpolant through all nodes (used when every
/// sample has become a support point).
fn interpolating_weights(z: &[Complex64]) -> Vec<Complex64> {
    (0..z.len())
        .map(|k| {
            let p: Complex64 = (0..z.len()).filter(|&j| j != k).map(|j| z[k] - z[j]).product();
            ONE / p
        })
        .collect()
}

/// Poles of an AAA interpolant of `e^z` on the boundary samples, built to
/// half the target error and confirmed on denser samplings. Poles inside
/// the rectangle and poles with negligible residue are dropped; the result
/// is closed under conjugation.
pub fn aaa_poles(boundary: &RegionBoundary, target: f64, m_max: usize) -> Result<Vec<Complex64>> {
    Ok(aaa_pole_candidates(boundary, target, m_max, 1.0)?.pop().expect("final fit"))
}

/// Pole sets of the intermediate AAA fits whose sample error is within
/// `slack * target`, by increasing degree, ending with the final fit. A
/// least-squares refit often certifies one of the earlier, cheaper sets.
pub(crate) fn aaa_pole_candidates(
    boundary: &RegionBoundary,
    target: f64,
    m_max: usize,
    slack: f64,
) -> Result<Vec<Vec<Complex64>>> {
    let (history, samples) = aaa_exp(boundary, target, m_max)?;
    let rect = boundary.rectangle;
    let fmax = samples.samples.iter().map(|z| z.exp().norm()).fold(0.0, f64::max);
    let last = history.len() - 1;
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    for (i, fit) in history.iter().enumerate() {
        if i != last && fit.error > slack * target {
            continue;
        }
        let poles = match fit.poles() {
            Ok(p) => p,
            Err(e) if i == last => return Err(e),
            Err(_) => continue,
        };
        let kept: Vec<Complex64> = poles
            .into_iter()
            .filter(|p| p.re.is_finite() && p.im.is_finite())
            .filter(|p| !rect.contains(p.re, p.im))
            .filter(|&p| fit.residue(p).norm() > SPURIOUS_RESIDUE * fmax)
            .collect();
        let poles = conjugate_structure_with(&kept, POLE_REAL_TOL, POLE_PAIR_TOL).all();
        if i == last || out.last().is_none_or(|prev| prev.len() < poles.len()) {
            out.push(poles);
        }
    }
    Ok(out)
}

/// AAA history on the samples finally used, after confirming the last fit
/// on denser samplings.
pub(crate) fn aaa_exp(boundary: &RegionBoundary, target: f64, m_max: usize) -> Result<(Vec<AaaFit>, RegionBoundary)> {
    if boundary.is_empty() {
        return Err(Error::InvalidArgument("empty boundary"));
    }
    if target.is_nan() || target <= 0.0 {
        return Err(Error::InvalidArgument("target must be positive"));
    }
    let tol = 0.5 * target;
    let rect = boundary.rectangle;
    // Nearly coincident conjugate samples make the Loewner matrix
    // degenerate, so a flat rectangle is fitted on its center line.
    let mut samples = if rect.height() <= FLAT * rect.width() {
        let mid = 0.5 * (rect.nu_min + rect.nu_max);
        RegionBoundary::new(&BoundingRectangle::exact(rect.mu_min, rect.mu_max, mid, mid)?, boundary.per_side)?
    } else {
        boundary.clone()
    };
    let mut history = fit_exp(&samples, tol, m_max)?;
    for _ in 0..MAX_REFINEMENTS {
        let finer = samples.refined(2)?;
        let fit = history.last().expect("final fit");
        let check = finer.samples.iter().map(|&z| (fit.eval(z) - z.exp()).norm()).fold(0.0, f64::max);
        if check <= target {
            break;
        }
        samples = finer;
        history = fit_exp(&samples, tol, m_max)?;
    }
    Ok((history, samples))
}

fn fit_exp(b: &RegionBoundary, tol: f64, m_max: usize) -> Result<Vec<AaaFit>> {
    let f: Vec<Complex64> = b.samples.iter().map(|z| z.exp()).collect();
    aaa_steps(&b.samples, &f, tol, m_max)
}
