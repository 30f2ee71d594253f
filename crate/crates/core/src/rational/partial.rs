use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::RationalFunction;
use crate::spectral::BoundingRectangle;
use crate::{Error, Result};

/// `r(z) = gamma + sum_k alpha_k / (beta_k - z)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PartialFractionRational {
    pub gamma: Complex64,
    pub poles: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

impl PartialFractionRational {
    pub fn new(gamma: Complex64, poles: Vec<Complex64>, weights: Vec<Complex64>) -> Result<Self> {
        if poles.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: poles.len(), found: weights.len() });
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !finite(&gamma) || !poles.iter().all(finite) || !weights.iter().all(finite) {
            return Err(Error::NonFinite);
        }
        Ok(Self { gamma, poles, weights })
    }

    /// As [`new`](Self::new), additionally rejecting poles in the closed
    /// rectangle.
    pub fn new_outside(
        gamma: Complex64,
        poles: Vec<Complex64>,
        weights: Vec<Complex64>,
        region: &BoundingRectangle,
    ) -> Result<Self> {
        let r = Self::new(gamma, poles, weights)?;
        r.check_outside(region)?;
        Ok(r)
    }

    pub fn degree(&self) -> usize {
        self.poles.len()
    }

    pub fn check_outside(&self, region: &BoundingRectangle) -> Result<()> {
        match self.poles.iter().find(|p| region.contains(p.re, p.im)) {
            Some(&pole) => Err(Error::PoleInsideRegion { pole }),
            None => Ok(()),
        }
    }

    /// Whether non-real poles and their weights come in conjugate pairs.
    pub fn is_conjugate_closed(&self, rel_tol: f64) -> bool {
        let scale = |z: Complex64| rel_tol * (1.0 + z.norm());
        self.poles.iter().zip(&self.weights).all(|(&b, &a)| {
            if b.im.abs() <= scale(b) {
                return a.im.abs() <= scale(a);
            }
            self.poles
                .iter()
                .zip(&self.weights)
                .any(|(&c, &w)| (c - b.conj()).norm() <= scale(b) && (w - a.conj()).norm() <= scale(a))
        })
    }
}

impl RationalFunction for PartialFractionRational {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = self.gamma;
        for (&b, &a) in self.poles.iter().zip(&self.weights) {
            let d = b - z;
            if d.norm() == 0.0 {
                return Err(Error::PoleEvaluation { pole: b });
            }
            acc += a / d;
        }
        Ok(acc)
    }

    fn poles(&self) -> Vec<Complex64> {
        self.poles.clone()
    }
}

/// Real poles and upper representatives of conjugate pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConjugatePoles {
    pub real: Vec<f64>,
    /// One member (with positive imaginary part) of each conjugate pair.
    pub pairs: Vec<Complex64>,
}

impl ConjugatePoles {
    pub fn degree(&self) -> usize {
        self.real.len() + 2 * self.pairs.len()
    }

    pub fn all(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.real.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        for &p in &self.pairs {
            out.push(p);
            out.push(p.conj());
        }
        out
    }
}

/// Groups poles of a function that is real on the real axis. Poles whose
/// imaginary part is within `rel_tol` of their modulus are made real; the
/// rest are matched with their nearest conjugate partner and averaged, and
/// a pole without a partner gets its conjugate added.
pub fn conjugate_structure(poles: &[Complex64], rel_tol: f64) -> ConjugatePoles {
    conjugate_structure_with(poles, rel_tol, PAIR_TOL)
}

const PAIR_TOL: f64 = 1e-6;

/// [`conjugate_structure`] with an explicit relative distance below which
/// an upper and a lower pole count as a conjugate pair.
pub(crate) fn conjugate_structure_with(poles: &[Complex64], rel_tol: f64, pair_tol: f64) -> ConjugatePoles {
    let mut real = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for &p in poles {
        if p.im.abs() <= rel_tol * p.norm().max(1.0) {
            real.push(p.re);
        } else if p.im > 0.0 {
            upper.push(p);
        } else {
            lower.push(p.conj());
        }
    }
    let mut pairs = Vec::with_capacity(upper.len().max(lower.len()));
    let mut used = alloc::vec![false; lower.len()];
    for u in upper {
        let best = lower
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|a, b| (a.1 - u).norm().total_cmp(&(b.1 - u).norm()));
        match best {
            Some((i, l)) if (l - u).norm() <= pair_tol * u.norm().max(1.0) => {
                used[i] = true;
                pairs.push((u + l) * 0.5);
            }
            _ => pairs.push(u),
        }
    }
    for (i, l) in lower.into_iter().enumerate() {
        if !used[i] {
            pairs.push(l);
        }
    }
    real.sort_by(f64::total_cmp);
    pairs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ConjugatePoles { real, pairs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluation_and_pole_error() {
        let r = PartialFractionRational::new(c(0.5, 0.0), alloc::vec![c(1.0, 0.0)], alloc::vec![c(0.5, 0.0)]).unwrap();
        assert_eq!(r.eval(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert!(matches!(r.eval(c(1.0, 0.0)), Err(Error::PoleEvaluation { .. })));
    }

    #[test]
    fn rejects_pole_inside_rectangle() {
        let rect = BoundingRectangle::exact(-1.0, 0.0, -1.0, 1.0).unwrap();
        let res = PartialFractionRational::new_outside(
            c(0.0, 0.0),
            alloc::vec![c(-0.5, 0.2)],
            alloc::vec![c(1.0, 0.0)],
            &rect,
        );
        assert!(matches!(res, Err(Error::PoleInsideRegion { .. })));
    }

    #[test]
    fn conjugate_grouping() {
        let poles = [c(2.0, 1e-15), c(3.0, 1.0), c(3.0 + 1e-12, -1.0), c(5.0, -2.0)];
        let g = conjugate_structure(&poles, 1e-10);
        assert_eq!(g.real, alloc::vec![2.0]);
        assert_eq!(g.pairs.len(), 2);
        assert!((g.pairs[0] - c(3.0, 1.0)).norm() < 1e-11);
        assert_eq!(g.pairs[1], c(5.0, 2.0));
        assert_eq!(g.degree(), 5);
    }
}
