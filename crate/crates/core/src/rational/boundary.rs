use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::RationalFunction;
use crate::spectral::BoundingRectangle;
use crate::{Error, Result};
use num_traits::Float;

/// Default number of samples per side of a rectangle.
pub const DEFAULT_PER_SIDE: usize = 500;
/// Factor applied to the sampled maximum of `|r - exp|`.
pub const SAMPLING_SAFETY: f64 = 1.1;

/// Sides shorter than this fraction of the rectangle's extent are sampled at
/// their endpoints only.
const THIN_SIDE: f64 = 1e-8;
/// Samples per unit length on the vertical sides, where `e^z` oscillates
/// with period `2 pi`.
const VERTICAL_DENSITY: f64 = 4.0;
/// Upper limit on the vertical density boost, as a multiple of `per_side`.
const MAX_BOOST: usize = 16;
/// Relative growth of the sampled maximum under refinement accepted as
/// converged.
const STABLE_GROWTH: f64 = 1.05;
const MAX_DOUBLINGS: usize = 3;

/// Samples on the boundary of a rectangle, clustered toward the corners.
///
/// The top side reuses the real parts of the bottom side and the left side
/// reuses the imaginary parts of the right side, so a rectangle symmetric
/// about the real axis gives an exactly conjugate-symmetric sample set.
#[derive(Debug, Clone)]
pub struct RegionBoundary {
    pub rectangle: BoundingRectangle,
    pub samples: Vec<Complex64>,
    /// Sample counts on the bottom, right, top and left sides, endpoints
    /// included.
    pub side_counts: [usize; 4],
    pub per_side: usize,
}

impl RegionBoundary {
    pub fn new(rectangle: &BoundingRectangle, per_side: usize) -> Result<Self> {
        if per_side < 2 {
            return Err(Error::InvalidArgument("need at least two samples per side"));
        }
        let r = *rectangle;
        let (w, h) = (r.width(), r.height());
        if !(w.is_finite() && h.is_finite()) {
            return Err(Error::NonFinite);
        }
        let corner = |re: f64, im: f64| Complex64::new(re, im);
        let extent = w.max(h);
        if extent == 0.0 {
            return Ok(Self {
                rectangle: r,
                samples: alloc::vec![corner(r.mu_min, r.nu_min)],
                side_counts: [1, 0, 0, 0],
                per_side,
            });
        }
        let nw = if w <= THIN_SIDE * extent { 2 } else { per_side };
        let nh = if h <= THIN_SIDE * extent {
            2
        } else {
            let boost = Float::ceil(VERTICAL_DENSITY * h).min((MAX_BOOST * per_side) as f64) as usize;
            per_side.max(boost)
        };
        let xs = cheb_points(r.mu_min, r.mu_max, nw);
        let ys = cheb_points(r.nu_min, r.nu_max, nh);
        let mut samples = Vec::with_capacity(2 * (nw + nh));
        if h == 0.0 {
            samples.extend(xs.iter().map(|&x| corner(x, r.nu_min)));
            return Ok(Self { rectangle: r, samples, side_counts: [nw, 0, 0, 0], per_side });
        }
        if w == 0.0 {
            samples.extend(ys.iter().map(|&y| corner(r.mu_max, y)));
            return Ok(Self { rectangle: r, samples, side_counts: [0, nh, 0, 0], per_side });
        }
        samples.extend(xs.iter().map(|&x| corner(x, r.nu_min)));
        samples.extend(ys[1..].iter().map(|&y| corner(r.mu_max, y)));
        samples.extend(xs[..nw - 1].iter().rev().map(|&x| corner(x, r.nu_max)));
        samples.extend(ys[1..nh - 1].iter().rev().map(|&y| corner(r.mu_min, y)));
        Ok(Self { rectangle: r, samples, side_counts: [nw, nh, nw, nh], per_side })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The same rectangle with `factor` times as many samples per side.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(&self.rectangle, self.per_side * factor.max(1))
    }

    /// Sampled maximum of `|r(z) - e^z|`, doubling the density until the
    /// maximum stops growing (at most a few times). No safety factor.
    pub fn stable_max_error(&self, r: &(impl RationalFunction + ?Sized)) -> Result<f64> {
        let mut coarse = self.max_error(r)?;
        let mut finer = self.refined(2)?;
        for _ in 0..MAX_DOUBLINGS {
            let fine = finer.max_error(r)?;
            if fine <= STABLE_GROWTH * coarse {
                return Ok(fine.max(coarse));
            }
            coarse = fine;
            finer = finer.refined(2)?;
        }
        Ok(coarse)
    }

    /// Largest `|r(z) - e^z|` over the samples, without a safety factor.
    pub fn max_error(&self, r: &(impl RationalFunction + ?Sized)) -> Result<f64> {
        let mut worst = 0.0_f64;
        for &z in &self.samples {
            let e = (r.eval(z)? - z.exp()).norm();
            if !e.is_finite() {
                return Err(Error::NonFinite);
            }
            worst = worst.max(e);
        }
        Ok(worst)
    }
}

/// `n` points on `[a, b]` at the extrema of the Chebyshev polynomial, so
/// they cluster at both ends. The endpoints are exact.
fn cheb_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n)
        .map(|j| {
            if j == 0 {
                a
            } else if j == n - 1 {
                b
            } else if 2 * j < n {
                a + (b - a) * cheb_fraction(j, last)
            } else {
                // mirrored so that symmetric intervals give symmetric points
                b - (b - a) * cheb_fraction(n - 1 - j, last)
            }
        })
        .collect()
}

fn cheb_fraction(j: usize, last: f64) -> f64 {
    0.5 * (1.0 - Float::cos(PI * j as f64 / last))
}

/// Sampled bound on `max_{z in R} |r(z) - e^z|`: the boundary maximum times
/// [`SAMPLING_SAFETY`]. The maximum principle puts the true maximum on the
/// boundary.
pub fn sup_error_on_rectangle(
    r: &(impl RationalFunction + ?Sized),
    rect: &BoundingRectangle,
    n_per_side: usize,
) -> Result<f64> {
    if let Some(pole) = r.poles().into_iter().find(|p| rect.contains(p.re, p.im)) {
        return Err(Error::PoleInsideRegion { pole });
    }
    let boundary = RegionBoundary::new(rect, n_per_side)?;
    Ok(SAMPLING_SAFETY * boundary.max_error(r)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant(f64);

    impl RationalFunction for Constant {
        fn eval(&self, _z: Complex64) -> Result<Complex64> {
            Ok(Complex64::new(self.0, 0.0))
        }
        fn poles(&self) -> Vec<Complex64> {
            Vec::new()
        }
    }

    #[test]
    fn samples_lie_on_boundary_and_cover_sides() {
        let r = BoundingRectangle::exact(-3.0, 1.0, -2.0, 2.0).unwrap();
        let b = RegionBoundary::new(&r, 50).unwrap();
        for z in &b.samples {
            let on_vertical = z.re == -3.0 || z.re == 1.0;
            let on_horizontal = z.im == -2.0 || z.im == 2.0;
            assert!(on_vertical || on_horizontal);
            assert!(r.contains(z.re, z.im));
        }
        for corner in [(-3.0, -2.0), (1.0, -2.0), (1.0, 2.0), (-3.0, 2.0)] {
            assert_eq!(b.samples.iter().filter(|z| (z.re, z.im) == corner).count(), 1);
        }
        assert_eq!(b.len(), 2 * 50 + 2 * 50 - 4);
        // tall sides resolve the oscillation of e^{iy}
        let tall = BoundingRectangle::exact(-3000.0, -0.5, -60.0, 60.0).unwrap();
        let b = RegionBoundary::new(&tall, 100).unwrap();
        assert_eq!(b.side_counts, [100, 480, 100, 480]);
    }

    #[test]
    fn symmetric_rectangle_gives_conjugate_samples() {
        let r = BoundingRectangle::exact(-7.3, -0.1, -1.7, 1.7).unwrap();
        let b = RegionBoundary::new(&r, 100).unwrap();
        for z in &b.samples {
            assert!(b.samples.iter().any(|w| *w == z.conj()));
        }
    }

    #[test]
    fn degenerate_rectangles() {
        let point = BoundingRectangle::exact(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(RegionBoundary::new(&point, 10).unwrap().len(), 1);
        let seg = BoundingRectangle::exact(-1.0, 0.0, 0.0, 0.0).unwrap();
        let b = RegionBoundary::new(&seg, 10).unwrap();
        assert_eq!(b.len(), 10);
        assert!(b.samples.iter().all(|z| z.im == 0.0));
        let thin = BoundingRectangle::exact(-1.0, 0.0, -1e-12, 1e-12).unwrap();
        assert_eq!(RegionBoundary::new(&thin, 10).unwrap().len(), 20);
    }

    #[test]
    fn constant_one_on_segment() {
        let seg = BoundingRectangle::exact(-1.0, 0.0, 0.0, 0.0).unwrap();
        let e = sup_error_on_rectangle(&Constant(1.0), &seg, 100).unwrap();
        let exact = 1.0 - (-1.0_f64).exp();
        assert!((e - SAMPLING_SAFETY * exact).abs() < 1e-15);
    }
}
