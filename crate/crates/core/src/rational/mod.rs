//! Rational approximations `r(z) ~ e^z` certified on a rectangle.

mod aaa;
mod boundary;
pub(crate) mod dd;
mod pade;
mod partial;
mod refit;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use aaa::aaa_pole_candidates;
pub use aaa::{aaa, aaa_poles, AaaFit, DEFAULT_M_MAX};
pub use boundary::{sup_error_on_rectangle, RegionBoundary, DEFAULT_PER_SIDE, SAMPLING_SAFETY};
pub use pade::{pade45, pade_to_partial_fractions, select_scaling, PadeRational, ScalingChoice, DEFAULT_S_MAX};
pub use partial::{conjugate_structure, ConjugatePoles, PartialFractionRational};
pub use refit::refit_partial_fractions;

use crate::spectral::BoundingRectangle;
use crate::{Error, Result};

/// A scalar rational function with known poles.
pub trait RationalFunction {
    fn eval(&self, z: Complex64) -> Result<Complex64>;
    fn poles(&self) -> Vec<Complex64>;
}

pub fn eval_rational(r: &(impl RationalFunction + ?Sized), z: Complex64) -> Result<Complex64> {
    r.eval(z)
}

/// `(r(z / s))^s`.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<'a, R: ?Sized> {
    pub inner: &'a R,
    pub s: u32,
}

impl<R: RationalFunction + ?Sized> RationalFunction for Scaled<'_, R> {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        let s = self.s.max(1);
        Ok(self.inner.eval(z / f64::from(s))?.powu(s))
    }

    fn poles(&self) -> Vec<Complex64> {
        let s = f64::from(self.s.max(1));
        self.inner.poles().into_iter().map(|p| p * s).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Method {
    /// Scaled (4,5) Padé, applied as `(r(A/s))^s`.
    #[cfg_attr(feature = "serde", serde(rename = "sub-pade"))]
    SubPade,
    /// AAA poles with a least-squares partial-fraction refit.
    #[cfg_attr(feature = "serde", serde(rename = "rat-interp"))]
    RatInterp,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::SubPade, Method::RatInterp];

    pub fn name(self) -> &'static str {
        match self {
            Method::SubPade => "sub-pade",
            Method::RatInterp => "rat-interp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sub-pade" => Ok(Method::SubPade),
            "rat-interp" => Ok(Method::RatInterp),
            _ => Err(Error::InvalidArgument("method must be sub-pade or rat-interp")),
        }
    }
}

/// A partial-fraction approximant together with its sampled error bound on
/// the rectangle it was certified for. It is evaluated as `(form(z/s))^s`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CertifiedApproximant {
    pub method: Method,
    pub form: PartialFractionRational,
    pub scaling: u32,
    pub sup_error_estimate: f64,
    pub target: f64,
}

impl CertifiedApproximant {
    /// Total number of shifted solves per application: poles times scaling.
    pub fn degree(&self) -> usize {
        self.form.degree() * self.scaling as usize
    }
}

impl RationalFunction for CertifiedApproximant {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Scaled { inner: &self.form, s: self.scaling }.eval(z)
    }

    fn poles(&self) -> Vec<Complex64> {
        Scaled { inner: &self.form, s: self.scaling }.poles()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ApproxOptions {
    pub per_side: usize,
    pub s_max: u32,
    pub m_max: usize,
    /// Extra AAA runs, each with a ten times tighter target, after a failed
    /// refit.
    pub refit_retries: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self { per_side: DEFAULT_PER_SIDE, s_max: DEFAULT_S_MAX, m_max: DEFAULT_M_MAX, refit_retries: 2 }
    }
}

/// Scaled (4,5) Padé with the smallest admissible scaling.
pub fn certify_sub_pade(rect: &BoundingRectangle, target: f64, opts: &ApproxOptions) -> Result<CertifiedApproximant> {
    let choice = select_scaling(rect, target, opts.s_max, opts.per_side)?;
    Ok(CertifiedApproximant {
        method: Method::SubPade,
        form: pade_to_partial_fractions(&pade45())?,
        scaling: choice.s,
        sup_error_estimate: choice.sup_error,
        target,
    })
}

/// Intermediate AAA fits with sample error up to this multiple of the
/// target are tried in the refit before the final one.
const CANDIDATE_SLACK: f64 = 100.0;

/// AAA poles plus refit, certified on the conjugate-symmetric hull of
/// `rect` (a superset, so the bound also holds on `rect`). The lowest
/// degree pole set from the AAA run that certifies is returned.
pub fn certify_rat_interp(rect: &BoundingRectangle, target: f64, opts: &ApproxOptions) -> Result<CertifiedApproximant> {
    if target.is_nan() || target <= 0.0 {
        return Err(Error::InvalidArgument("target must be positive"));
    }
    let hull = rect.symmetric_hull();
    let boundary = RegionBoundary::new(&hull, opts.per_side)?;
    let mut aaa_target = target;
    let mut failure = None;
    for _ in 0..=opts.refit_retries {
        let candidates = match aaa_pole_candidates(&boundary, aaa_target, opts.m_max, CANDIDATE_SLACK) {
            Ok(c) => c,
            Err(e) => return Err(failure.unwrap_or(e)),
        };
        let last = candidates.len() - 1;
        for (i, poles) in candidates.iter().enumerate() {
            match refit_partial_fractions(poles, &boundary, target) {
                Ok(c) => return Ok(c),
                Err(e @ Error::RefitFailed { .. }) if i == last => {
                    failure.get_or_insert(e);
                }
                Err(e) if i == last => return Err(e),
                Err(_) => {}
            }
        }
        aaa_target *= 0.1;
    }
    Err(failure.unwrap_or(Error::InvalidArgument("no refit attempted")))
}

pub fn certify(
    method: Method,
    rect: &BoundingRectangle,
    target: f64,
    opts: &ApproxOptions,
) -> Result<CertifiedApproximant> {
    match method {
        Method::SubPade => certify_sub_pade(rect, target, opts),
        Method::RatInterp => certify_rat_interp(rect, target, opts),
    }
}
