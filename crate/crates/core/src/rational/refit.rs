//! Least-squares fit of partial-fraction coefficients for fixed poles,
//! solved by a column-pivoted Householder QR in double-double arithmetic.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::dd::Dd;
use super::{conjugate_structure, CertifiedApproximant, Method, PartialFractionRational, RegionBoundary};
use crate::{Error, Result};

/// Relative size below which a pivot ends the numerical rank.
const RANK_TOL: f64 = 1e-28;

/// Fits `gamma + sum alpha_k / (beta_k - z)` to `e^z` on the boundary
/// samples and certifies the result on the boundary's rectangle.
///
/// Coefficients are constrained so that the fitted function is real on the
/// real axis: `gamma` and the weights of real poles are real, and
/// conjugate poles carry conjugate weights.
pub fn refit_partial_fractions(
    poles: &[Complex64],
    boundary: &RegionBoundary,
    target: f64,
) -> Result<CertifiedApproximant> {
    let form = fit_coefficients(poles, boundary)?;
    let per_side = boundary.per_side.max(super::DEFAULT_PER_SIDE);
    let check = RegionBoundary::new(&boundary.rectangle, per_side)?;
    let achieved = super::SAMPLING_SAFETY * check.stable_max_error(&form)?;
    if achieved > target {
        return Err(Error::RefitFailed { degree: form.degree(), achieved, target });
    }
    Ok(CertifiedApproximant { method: Method::RatInterp, form, scaling: 1, sup_error_estimate: achieved, target })
}

pub(crate) fn fit_coefficients(poles: &[Complex64], boundary: &RegionBoundary) -> Result<PartialFractionRational> {
    let rect = &boundary.rectangle;
    let grouped = conjugate_structure(poles, 1e-10);
    let all = grouped.all();
    if let Some(&pole) = all.iter().find(|p| rect.contains(p.re, p.im)) {
        return Err(Error::PoleInsideRegion { pole });
    }
    // e^z is real on the real axis, so with conjugate-symmetric samples the
    // lower half carries no extra information.
    let symmetric = rect.nu_min == -rect.nu_max;
    let samples: Vec<Complex64> = boundary.samples.iter().copied().filter(|z| !symmetric || z.im >= 0.0).collect();

    let ncols = 1 + grouped.real.len() + 2 * grouped.pairs.len();
    let nrows = 2 * samples.len();
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(nrows); ncols];
    let mut rhs = Vec::with_capacity(nrows);
    for &z in &samples {
        let mut row: Vec<Complex64> = Vec::with_capacity(ncols);
        row.push(Complex64::new(1.0, 0.0));
        for &b in &grouped.real {
            row.push(1.0 / (Complex64::new(b, 0.0) - z));
        }
        for &b in &grouped.pairs {
            let g = 1.0 / (b - z);
            let h = 1.0 / (b.conj() - z);
            row.push(g + h);
            row.push(Complex64::i() * (g - h));
        }
        for (c, v) in cols.iter_mut().zip(&row) {
            c.push(v.re);
            c.push(v.im);
        }
        let e = z.exp();
        rhs.push(e.re);
        rhs.push(e.im);
    }
    let x = lstsq_dd(cols, &rhs)?;

    let gamma = Complex64::new(x[0], 0.0);
    let mut weights = Vec::with_capacity(all.len());
    let mut k = 1;
    for _ in &grouped.real {
        weights.push(Complex64::new(x[k], 0.0));
        k += 1;
    }
    for _ in &grouped.pairs {
        let a = Complex64::new(x[k], x[k + 1]);
        weights.push(a);
        weights.push(a.conj());
        k += 2;
    }
    PartialFractionRational::new_outside(gamma, all, weights, rect)
}

/// Minimizes `|A x - b|` with `A` given by columns. Columns are scaled to
/// unit norm; columns beyond the numerical rank get a zero coefficient.
fn lstsq_dd(cols: Vec<Vec<f64>>, b: &[f64]) -> Result<Vec<f64>> {
    let p = cols.len();
    let m = b.len();
    if cols.iter().any(|c| c.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, found: cols.first().map_or(0, Vec::len) });
    }
    if cols.iter().flatten().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let scales: Vec<f64> = cols
        .iter()
        .map(|c| {
            let n = crate::linalg::norm2(c);
            if n > 0.0 {
                1.0 / n
            } else {
                0.0
            }
        })
        .collect();
    let mut a: Vec<Vec<Dd>> =
        cols.iter().zip(&scales).map(|(c, &s)| c.iter().map(|&v| Dd::new(v * s)).collect()).collect();
    let mut rhs: Vec<Dd> = b.iter().map(|&v| Dd::new(v)).collect();
    let mut order: Vec<usize> = (0..p).collect();
    let steps = p.min(m);
    let mut rank = 0;
    let mut r00 = Dd::ZERO;
    for k in 0..steps {
        // pivot on the largest remaining column norm
        let norms: Vec<Dd> = (k..p).map(|j| col_norm(&a[j][k..])).collect();
        let (off, nrm) =
            norms.iter().enumerate().fold((0, Dd::ZERO), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        if k == 0 {
            r00 = nrm;
        }
        if nrm.is_zero() || nrm.to_f64() <= RANK_TOL * r00.to_f64() {
            break;
        }
        a.swap(k, k + off);
        order.swap(k, k + off);
        let x0 = a[k][k];
        let alpha = if x0.hi >= 0.0 { -nrm } else { nrm };
        let mut v: Vec<Dd> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vv = dot(&v, &v);
        if vv.is_zero() {
            rank = k + 1;
            continue;
        }
        let two_over = Dd::new(2.0) / vv;
        for j in k + 1..p {
            reflect(&v, &mut a[j][k..], two_over);
        }
        reflect(&v, &mut rhs[k..], two_over);
        a[k][k] = alpha;
        for i in k + 1..m {
            a[k][i] = Dd::ZERO;
        }
        rank = k + 1;
    }
    // back substitution on the leading rank x rank block
    let mut y = vec![Dd::ZERO; p];
    for i in (0..rank).rev() {
        let mut s = rhs[i];
        for j in i + 1..rank {
            s -= a[j][i] * y[j];
        }
        y[i] = s / a[i][i];
    }
    let mut x = vec![0.0; p];
    for (k, &col) in order.iter().enumerate() {
        x[col] = y[k].to_f64() * scales[col];
    }
    Ok(x)
}

fn dot(x: &[Dd], y: &[Dd]) -> Dd {
    x.iter().zip(y).fold(Dd::ZERO, |acc, (&a, &b)| acc + a * b)
}

fn col_norm(x: &[Dd]) -> Dd {
    dot(x, x).sqrt()
}

fn reflect(v: &[Dd], x: &mut [Dd], two_over: Dd) {
    let c = dot(v, x) * two_over;
    for (xi, &vi) in x.iter_mut().zip(v) {
        *xi -= c * vi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pade45, pade_to_partial_fractions, RationalFunction};
    use crate::spectral::BoundingRectangle;

    #[test]
    fn lstsq_recovers_exact_solution() {
        let cols = vec![vec![1.0, 1.0, 1.0, 1.0], vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 4.0, 9.0]];
        let b = [1.0, 2.0, 5.0, 10.0]; // 1 + 0 t + t^2
        let x = lstsq_dd(cols, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && x[1].abs() < 1e-15 && (x[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lstsq_handles_rank_deficiency() {
        let cols = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        let x = lstsq_dd(cols, &[1.0, 0.0]).unwrap();
        assert!((x[0] + x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn refit_with_pade_poles_reproduces_pade() {
        let rect = BoundingRectangle::exact(-1.0, 0.0, -0.5, 0.5).unwrap();
        let b = RegionBoundary::new(&rect, 200).unwrap();
        let pade = pade_to_partial_fractions(&pade45()).unwrap();
        let cert = refit_partial_fractions(&pade.poles, &b, 1e-8).unwrap();
        assert!(cert.sup_error_estimate <= 1e-8);
        let pade_err = crate::rational::sup_error_on_rectangle(&pade, &rect, 500).unwrap();
        assert!(cert.sup_error_estimate <= 1.5 * pade_err);
        assert!(cert.form.is_conjugate_closed(1e-13));
    }

    #[test]
    fn single_point_single_pole_interpolates() {
        let point = BoundingRectangle::exact(0.0, 0.0, 0.0, 0.0).unwrap();
        let b = RegionBoundary::new(&point, 10).unwrap();
        let cert = refit_partial_fractions(&[Complex64::new(1.0, 0.0)], &b, 1e-14).unwrap();
        let f = &cert.form;
        assert!((f.gamma + f.weights[0] - 1.0).norm() < 1e-15);
        assert!((f.eval(Complex64::new(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn too_few_poles_fail_certification() {
        let rect = BoundingRectangle::exact(-30.0, 0.0, -10.0, 10.0).unwrap();
        let b = RegionBoundary::new(&rect, 100).unwrap();
        let res = refit_partial_fractions(&[Complex64::new(5.0, 0.0)], &b, 1e-8);
        assert!(matches!(res, Err(Error::RefitFailed { degree: 1, .. })));
    }
}
