use alloc::vec::Vec;

use num_complex::Complex64;

use super::{PartialFractionRational, RationalFunction, RegionBoundary};
use crate::linalg::{eigvals_general, DenseMatrix};
use crate::spectral::BoundingRectangle;
use crate::{Error, Result};

/// Default upper limit on the scaling parameter.
pub const DEFAULT_S_MAX: u32 = 64;

/// Roots closer than this are reported as repeated.
const ROOT_SEPARATION: f64 = 1e-8;

/// The type (4,5) Padé approximant `p(z)/q(z)` of `e^z`, evaluated as
/// `(p(z/s)/q(z/s))^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PadeRational {
    /// `p_0..p_4`, ascending powers.
    pub p: [f64; 5],
    /// `q_0..q_5`, ascending powers.
    pub q: [f64; 6],
    pub scaling: u32,
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// The (4,5) Padé approximant of `e^z` with `s = 1`.
pub fn pade45() -> PadeRational {
    let (k, m) = (4u32, 5u32);
    let denom = factorial(k + m);
    let mut p = [0.0; 5];
    for (j, pj) in p.iter_mut().enumerate() {
        let j = j as u32;
        *pj = factorial(k + m - j) * factorial(k) / (denom * factorial(j) * factorial(k - j));
    }
    let mut q = [0.0; 6];
    for (j, qj) in q.iter_mut().enumerate() {
        let j = j as u32;
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        *qj = sign * factorial(k + m - j) * factorial(m) / (denom * factorial(j) * factorial(m - j));
    }
    PadeRational { p, q, scaling: 1 }
}

fn horner(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

impl PadeRational {
    pub fn with_scaling(&self, s: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidArgument("scaling must be positive"));
        }
        Ok(Self { scaling: s, ..self.clone() })
    }

    /// `p(z)/q(z)` without scaling.
    pub fn ratio(&self, z: Complex64) -> Result<Complex64> {
        let den = horner(&self.q, z);
        if den.norm() == 0.0 {
            return Err(Error::PoleEvaluation { pole: z });
        }
        Ok(horner(&self.p, z) / den)
    }

    /// Roots of `q`, i.e. the poles of the unscaled approximant.
    pub fn denominator_roots(&self) -> Result<Vec<Complex64>> {
        polynomial_roots(&self.q)
    }
}

impl RationalFunction for PadeRational {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        let s = self.scaling.max(1);
        Ok(self.ratio(z / f64::from(s))?.powu(s))
    }

    fn poles(&self) -> Vec<Complex64> {
        let s = f64::from(self.scaling.max(1));
        self.denominator_roots().map(|r| r.into_iter().map(|b| b * s).collect()).unwrap_or_default()
    }
}

/// Roots of a real polynomial (ascending coefficients) from the companion
/// matrix, polished by Newton's method.
fn polynomial_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let deg = c.iter().rposition(|&a| a != 0.0).unwrap_or(0);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = c[deg];
    let companion = DenseMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            Complex64::new(-c[deg - 1 - j] / lead, 0.0)
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let dc: Vec<f64> = (1..=deg).map(|k| k as f64 * c[k]).collect();
    let roots = eigvals_general(&companion)?
        .into_iter()
        .map(|mut r| {
            for _ in 0..3 {
                let d = horner(&dc, r);
                if d.norm() == 0.0 {
                    break;
                }
                r -= horner(&c[..=deg], r) / d;
            }
            r
        })
        .collect();
    Ok(roots)
}

/// `p/q = sum_k alpha_k / (beta_k - z)` with `beta_k` the roots of `q` and
/// `alpha_k = -p(beta_k) / q'(beta_k)`. The scaling of `p` is ignored.
pub fn pade_to_partial_fractions(p: &PadeRational) -> Result<PartialFractionRational> {
    let mut roots = p.denominator_roots()?;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).norm() < ROOT_SEPARATION {
                return Err(Error::RepeatedRoots);
            }
        }
    }
    // Real coefficients: snap near-real roots and pair the rest exactly.
    let grouped = super::conjugate_structure(&roots, 1e-12);
    roots = grouped.all();
    let dq: Vec<f64> = (1..p.q.len()).map(|k| k as f64 * p.q[k]).collect();
    let mut weights: Vec<Complex64> = roots.iter().map(|&b| -horner(&p.p, b) / horner(&dq, b)).collect();
    for (b, a) in roots.iter().zip(weights.iter_mut()) {
        if b.im == 0.0 {
            a.im = 0.0;
        }
    }
    // conjugate poles were emitted adjacently; give them conjugate weights
    let mut k = grouped.real.len();
    while k + 1 < weights.len() {
        weights[k + 1] = weights[k].conj();
        k += 2;
    }
    PartialFractionRational::new(Complex64::new(0.0, 0.0), roots, weights)
}

/// Result of the scaling search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingChoice {
    pub s: u32,
    /// Sampled sup-error (safety factor included) for `s`.
    pub sup_error: f64,
}

/// Smallest `s <= s_max` with `sup_R |(r(z/s))^s - e^z| <= target`, where
/// `r` is the partial-fraction (4,5) Padé approximant.
pub fn select_scaling(rect: &BoundingRectangle, target: f64, s_max: u32, per_side: usize) -> Result<ScalingChoice> {
    let boundary = RegionBoundary::new(rect, per_side)?;
    select_scaling_on(&boundary, target, s_max)
}

pub(crate) fn select_scaling_on(boundary: &RegionBoundary, target: f64, s_max: u32) -> Result<ScalingChoice> {
    if target.is_nan() || target <= 0.0 {
        return Err(Error::InvalidArgument("target must be positive"));
    }
    if s_max == 0 {
        return Err(Error::InvalidArgument("s_max must be positive"));
    }
    let pf = pade_to_partial_fractions(&pade45())?;
    let rect = &boundary.rectangle;
    let mut best = f64::INFINITY;
    for s in 1..=s_max {
        let scaled = super::Scaled { inner: &pf, s };
        if scaled.poles().iter().any(|p| rect.contains(p.re, p.im)) {
            continue;
        }
        let err = super::boundary::SAMPLING_SAFETY * boundary.max_error(&scaled)?;
        if err <= target {
            // confirm on denser samples before accepting
            let err = super::boundary::SAMPLING_SAFETY * boundary.stable_max_error(&scaled)?;
            if err <= target {
                return Ok(ScalingChoice { s, sup_error: err });
            }
        }
        best = best.min(err);
    }
    Err(Error::ScalingExhausted { s_max, best_error: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::sup_error_on_rectangle;
    use crate::CROUZEIX;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Taylor coefficients of p/q by power-series division, in
    /// compensated arithmetic.
    fn series_of_ratio(p: &[f64], q: &[f64], n: usize) -> Vec<f64> {
        use crate::rational::dd::Dd;
        let mut out: Vec<Dd> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = Dd::new(*p.get(k).unwrap_or(&0.0));
            for j in 1..=k.min(q.len() - 1) {
                acc -= Dd::new(q[j]) * out[k - j];
            }
            out.push(acc / Dd::new(q[0]));
        }
        out.into_iter().map(Dd::to_f64).collect()
    }

    #[test]
    fn coefficients_and_normalization() {
        let r = pade45();
        assert_eq!(r.p[0] / r.q[0], 1.0);
        assert_eq!(r.p[0], 1.0);
        assert!((r.p[1] - 4.0 / 9.0).abs() < 1e-16);
        assert!((r.q[1] + 5.0 / 9.0).abs() < 1e-16);
        assert!((r.q[5] + 1.0 / 15120.0).abs() < 1e-20);
        assert_eq!(r.eval(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn order_conditions() {
        let r = pade45();
        let series = series_of_ratio(&r.p, &r.q, 11);
        let mut fact = 1.0;
        for (k, &a) in series.iter().enumerate().take(10) {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((a * fact - 1.0).abs() < 1e-14, "coefficient {k}");
        }
        // first mismatch at z^10
        let mut f10 = 1.0;
        for k in 1..=10 {
            f10 *= k as f64;
        }
        assert!((series[10] * f10 - 1.0).abs() > 1e-6);
    }

    #[test]
    fn error_at_small_and_unit_argument() {
        let r = pade45();
        let e01 = (r.eval(c(0.1, 0.0)).unwrap() - c(0.1_f64.exp(), 0.0)).norm();
        assert!(e01 <= 1e-15);
        // exact rational arithmetic gives r(1) - e = 6.746947445e-9
        let e1 = r.eval(c(1.0, 0.0)).unwrap().re - 1.0_f64.exp();
        assert!((e1 - 6.746_947_445e-9).abs() < 1e-15, "{e1}");
        // leading error term 4! 5! / (9! 10!) z^10 from the series
        let lead = factorial(4) * factorial(5) / (factorial(9) * factorial(10));
        let series = series_of_ratio(&r.p, &r.q, 11);
        let gap = 1.0 / factorial(10) - series[10];
        assert!((gap.abs() - lead).abs() < 1e-9 * lead, "{gap} vs {lead}");
    }

    #[test]
    fn partial_fractions_match_ratio() {
        let r = pade45();
        let pf = pade_to_partial_fractions(&r).unwrap();
        assert_eq!(pf.degree(), 5);
        assert_eq!(pf.gamma, c(0.0, 0.0));
        for z in [c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(-10.0, 0.0)] {
            assert!((pf.eval(z).unwrap() - r.ratio(z).unwrap()).norm() <= 1e-12);
        }
        for k in 0..100 {
            let t = k as f64 * 0.0628;
            let z = c(10.0 * (k as f64 / 100.0) * t.cos(), 10.0 * (k as f64 / 100.0) * t.sin());
            assert!((pf.eval(z).unwrap() - r.ratio(z).unwrap()).norm() <= 1e-12);
        }
        assert!((pf.eval(c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() <= 1e-12);
        assert!(pf.is_conjugate_closed(1e-14));
        let real_poles = pf.poles.iter().filter(|b| b.im == 0.0).count();
        assert_eq!(real_poles, 1);
    }

    #[test]
    fn scaling_examples() {
        let point = BoundingRectangle::exact(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(select_scaling(&point, 1e-12, 64, 100).unwrap().s, 1);
        let small = BoundingRectangle::exact(-1.0, 0.0, -1.0, 1.0).unwrap();
        let target = 1e-6 / CROUZEIX;
        assert_eq!(select_scaling(&small, target, 64, 500).unwrap().s, 1);
    }

    #[test]
    fn scaled_error_certifies_against_denser_sampling() {
        let rect = BoundingRectangle::exact(-20.0, 0.0, -5.0, 5.0).unwrap();
        let target = 1e-6 / CROUZEIX;
        let choice = select_scaling(&rect, target, 64, 500).unwrap();
        assert!(choice.sup_error <= target);
        assert!(choice.s > 1);
        let pf = pade_to_partial_fractions(&pade45()).unwrap();
        let scaled = crate::rational::Scaled { inner: &pf, s: choice.s };
        let dense = sup_error_on_rectangle(&scaled, &rect, 5000).unwrap();
        assert!(dense <= target);
        // cross-check with the ratio form
        let ratio = pade45().with_scaling(choice.s).unwrap();
        let e_ratio = sup_error_on_rectangle(&ratio, &rect, 5000).unwrap();
        assert!((e_ratio - dense).abs() <= 1e-3 * dense + 1e-14);
    }

    #[test]
    fn scaling_monotone_in_target_and_exhausts() {
        let wide = BoundingRectangle::exact(-200.0, 0.0, -20.0, 20.0).unwrap();
        let mut last = 0;
        for target in [1e-2, 1e-4, 1e-6, 1e-8] {
            match select_scaling(&wide, target, 64, 200) {
                Ok(c) => {
                    assert!(c.s >= last);
                    last = c.s;
                }
                Err(e) => {
                    assert!(matches!(e, Error::ScalingExhausted { s_max: 64, .. }));
                    last = u32::MAX;
                }
            }
        }
        assert!(matches!(select_scaling(&wide, 1e-12, 3, 200), Err(Error::ScalingExhausted { .. })));
    }
}
