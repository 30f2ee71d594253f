//! Error-controlled `e^A b` for `A = tau M^{-1} K`.
//!
//! The driver bounds the numerical range of the symmetrized operator by a
//! rectangle, estimates `kappa(M)`, builds a scalar approximant of `e^z`
//! certified on the rectangle to `eps / ((1 + sqrt 2) kappa^{1/2})`, and
//! applies it through shifted pencil solves.

mod oracle;
mod shifted;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

pub use oracle::{
    bound_check, certified_dense, expm_dense, expmv_dense, rational_dense, spectral_norm, BoundReport,
    DENSE_ORACLE_CUTOFF,
};
pub use shifted::{
    apply_partial_fraction, apply_partial_fraction_complex, apply_scaled, apply_scaled_pade, ShiftedSystems,
};

use crate::rational::{certify, ApproxOptions, CertifiedApproximant, Method};
use crate::spectral::{
    bounding_rectangle, bounding_rectangle_dense, cond_estimate, BoundingRectangle, CondEstimate, EigenOptions, Pencil,
};
use crate::{Error, Result, CROUZEIX};
use num_traits::Float;

/// Which set the scalar approximation is certified on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum RegionMode {
    /// Rectangle around the numerical range of `A` itself, formed densely.
    /// No condition number enters the target.
    #[cfg_attr(feature = "serde", serde(alias = "i"))]
    DenseA,
    /// Rectangle around the numerical range of the symmetrized
    /// `M^{1/2} A M^{-1/2}`, from the pencils; the target carries
    /// `kappa(M)^{1/2}`.
    #[default]
    #[cfg_attr(feature = "serde", serde(alias = "ii"))]
    Symmetrized,
}

impl RegionMode {
    pub const ALL: [RegionMode; 2] = [RegionMode::DenseA, RegionMode::Symmetrized];

    /// Roman-numeral label used in reports: `i` for the dense `A`
    /// rectangle, `ii` for the symmetrized one.
    pub fn label(self) -> &'static str {
        match self {
            RegionMode::DenseA => "i",
            RegionMode::Symmetrized => "ii",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RegionMode::DenseA => "dense-a",
            RegionMode::Symmetrized => "symmetrized",
        }
    }
}

impl fmt::Display for RegionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for RegionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense-a" | "i" => Ok(RegionMode::DenseA),
            "symmetrized" | "ii" => Ok(RegionMode::Symmetrized),
            _ => Err(Error::InvalidArgument("mode must be dense-a (i) or symmetrized (ii)")),
        }
    }
}

/// Tuning knobs of the driver.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ExpmvOptions {
    pub eig: EigenOptions,
    pub approx: ApproxOptions,
    pub mode: RegionMode,
    /// Relative error of the condition estimate; `None` picks the default of
    /// the eigensolver path.
    pub delta: Option<f64>,
    /// Divide the scalar target by `kappa` instead of `kappa^{1/2}`.
    pub strict_kappa: bool,
}

#[derive(Debug, Clone)]
pub struct ExpmvRequest {
    pub pencil: Pencil,
    pub b: Vec<f64>,
    pub eps: f64,
    pub method: Method,
    pub options: ExpmvOptions,
}

/// What was certified for a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ExpmvCertificate {
    pub mode: RegionMode,
    pub method: Method,
    pub eps: f64,
    pub tau: f64,
    pub rectangle: BoundingRectangle,
    pub lhp_certified: bool,
    /// `None` in [`RegionMode::DenseA`], where no condition number is used.
    pub cond: Option<CondEstimate>,
    pub scalar_target: f64,
    pub achieved: f64,
    /// Number of shifted solves per application of the approximant.
    pub degree: usize,
    pub approximant: CertifiedApproximant,
}

impl ExpmvCertificate {
    /// The guaranteed relative error of the result, `achieved` scaled back
    /// by the factors removed from `eps`.
    pub fn error_bound(&self) -> f64 {
        self.achieved * self.eps / self.scalar_target
    }
}

/// Data available when a run fails after the rectangle was computed.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FailureContext {
    pub rectangle: BoundingRectangle,
    pub cond: Option<CondEstimate>,
    pub scalar_target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpmvFailure {
    pub error: Error,
    pub context: Option<Box<FailureContext>>,
}

impl From<Error> for ExpmvFailure {
    fn from(error: Error) -> Self {
        Self { error, context: None }
    }
}

impl fmt::Display for ExpmvFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.error)?;
        if let Some(c) = &self.context {
            write!(f, " (scalar target {:.3e})", c.scalar_target)?;
        }
        Ok(())
    }
}

impl core::error::Error for ExpmvFailure {}

/// `eps / ((1 + sqrt 2) kappa^{1/2})`, or with `kappa` itself when strict.
pub fn scalar_target(eps: f64, kappa_safe: f64, strict_kappa: bool) -> f64 {
    let k = if strict_kappa { kappa_safe } else { Float::sqrt(kappa_safe) };
    eps / (CROUZEIX * k)
}

/// Rectangle and condition estimate for one pencil and region mode. The
/// same region serves every tolerance and method.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Region {
    pub mode: RegionMode,
    pub tau: f64,
    pub rectangle: BoundingRectangle,
    /// `None` in [`RegionMode::DenseA`], where no condition number is used.
    pub cond: Option<CondEstimate>,
}

impl Region {
    /// Scalar tolerance that yields `eps` for the matrix problem.
    pub fn scalar_target(&self, eps: f64, strict_kappa: bool) -> f64 {
        match self.cond {
            Some(c) => scalar_target(eps, c.kappa_safe, strict_kappa),
            None => eps / CROUZEIX,
        }
    }

    fn context(&self, scalar_target: f64) -> FailureContext {
        FailureContext { rectangle: self.rectangle, cond: self.cond, scalar_target }
    }
}

/// Computes the rectangle (and, in the symmetrized mode, the condition
/// number of `M`) for a pencil.
pub fn estimate_region(pencil: &Pencil, options: &ExpmvOptions) -> Result<Region> {
    let (rectangle, cond) = match options.mode {
        RegionMode::Symmetrized => {
            let rect = bounding_rectangle(pencil, &options.eig)?;
            (rect, Some(cond_estimate(pencil.mass(), options.delta, &options.eig)?))
        }
        RegionMode::DenseA => (bounding_rectangle_dense(&pencil.a_dense()?, &options.eig)?, None),
    };
    Ok(Region { mode: options.mode, tau: pencil.tau(), rectangle, cond })
}

/// Certifies a scalar approximant on a precomputed region.
pub fn certify_region(
    region: &Region,
    eps: f64,
    method: Method,
    options: &ExpmvOptions,
) -> core::result::Result<ExpmvCertificate, ExpmvFailure> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument("eps must be positive").into());
    }
    let target = region.scalar_target(eps, options.strict_kappa);
    let approximant = certify(method, &region.rectangle, target, &options.approx)
        .map_err(|error| ExpmvFailure { error, context: Some(Box::new(region.context(target))) })?;
    Ok(ExpmvCertificate {
        mode: region.mode,
        method,
        eps,
        tau: region.tau,
        rectangle: region.rectangle,
        lhp_certified: region.rectangle.is_lhp_certified(),
        cond: region.cond,
        scalar_target: target,
        achieved: approximant.sup_error_estimate,
        degree: approximant.degree(),
        approximant,
    })
}

/// Builds and certifies the scalar approximant for a pencil without
/// applying it.
pub fn certify_pencil(
    pencil: &Pencil,
    eps: f64,
    method: Method,
    options: &ExpmvOptions,
) -> core::result::Result<ExpmvCertificate, ExpmvFailure> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument("eps must be positive").into());
    }
    certify_region(&estimate_region(pencil, options)?, eps, method, options)
}

/// Applies a certified approximant to `b` with the pencil's time step.
pub fn apply_certified(c: &CertifiedApproximant, pencil: &Pencil, b: &[f64]) -> Result<Vec<f64>> {
    apply_scaled(&c.form, c.scaling.max(1), pencil, b)
}

/// Complex right-hand side version of [`apply_certified`].
pub fn apply_certified_complex(c: &CertifiedApproximant, pencil: &Pencil, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let s = c.scaling.max(1);
    let systems = ShiftedSystems::new(&c.form, pencil, pencil.tau() / f64::from(s))?;
    let mut x = b.to_vec();
    for _ in 0..s {
        x = systems.apply(&x)?;
    }
    Ok(x)
}

/// The full pipeline: certify, then apply to `b`.
pub fn expmv_controlled(req: &ExpmvRequest) -> core::result::Result<(Vec<f64>, ExpmvCertificate), ExpmvFailure> {
    if req.b.len() != req.pencil.dim() {
        return Err(Error::DimensionMismatch { expected: req.pencil.dim(), found: req.b.len() }.into());
    }
    let cert = certify_pencil(&req.pencil, req.eps, req.method, &req.options)?;
    let x = apply_certificate(&cert, &req.pencil, &req.b)?;
    Ok((x, cert))
}

/// Applies a certificate to `b`; the pencil must have the certificate's
/// time step.
pub fn apply_certificate(
    cert: &ExpmvCertificate,
    pencil: &Pencil,
    b: &[f64],
) -> core::result::Result<Vec<f64>, ExpmvFailure> {
    if pencil.tau() != cert.tau {
        return Err(Error::InvalidArgument("pencil time step differs from the certificate").into());
    }
    apply_certified(&cert.approximant, pencil, b).map_err(|error| ExpmvFailure {
        error,
        context: Some(Box::new(FailureContext {
            rectangle: cert.rectangle,
            cond: cert.cond,
            scalar_target: cert.scalar_target,
        })),
    })
}
