use core::fmt;

use num_complex::Complex64;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    NotSquare {
        rows: usize,
        cols: usize,
    },
    NonFinite,
    SingularMatrix {
        step: usize,
    },
    NotSpd {
        step: usize,
    },
    NotSymmetric {
        asymmetry: f64,
    },
    NoConvergence {
        iterations: usize,
    },
    InvalidArgument(&'static str),
    /// A denominator has two roots closer than the separation threshold.
    RepeatedRoots,
    /// A pole of the approximant lies inside or on the target rectangle.
    PoleInsideRegion {
        pole: Complex64,
    },
    /// Evaluation requested exactly at a pole.
    PoleEvaluation {
        pole: Complex64,
    },
    /// `s* > s_max` for the scaled Padé approximant.
    ScalingExhausted {
        s_max: u32,
        best_error: f64,
    },
    /// AAA did not reach the target within `m_max` poles.
    DegreeExhausted {
        m_max: usize,
        best_error: f64,
    },
    /// The least-squares refit did not certify below the target.
    RefitFailed {
        degree: usize,
        achieved: f64,
        target: f64,
    },
    /// A shifted system `(beta M - tau K)` is numerically singular.
    SingularShift {
        pole: Complex64,
    },
    DegenerateMesh(&'static str),
    TooLarge {
        n: usize,
        cutoff: usize,
    },
}

impl Error {
    /// Short kebab-case name of the variant, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NotSquare { .. } => "not-square",
            Error::NonFinite => "non-finite",
            Error::SingularMatrix { .. } => "singular-matrix",
            Error::NotSpd { .. } => "not-spd",
            Error::NotSymmetric { .. } => "not-symmetric",
            Error::NoConvergence { .. } => "no-convergence",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::RepeatedRoots => "repeated-roots",
            Error::PoleInsideRegion { .. } => "pole-inside-region",
            Error::PoleEvaluation { .. } => "pole-evaluation",
            Error::ScalingExhausted { .. } => "scaling-exhausted",
            Error::DegreeExhausted { .. } => "degree-exhausted",
            Error::RefitFailed { .. } => "refit-failed",
            Error::SingularShift { .. } => "singular-shift",
            Error::DegenerateMesh(_) => "degenerate-mesh",
            Error::TooLarge { .. } => "too-large",
        }
    }

    /// True for the failures the experiments report as `--`.
    pub fn is_exhaustion(&self) -> bool {
        matches!(self, Error::ScalingExhausted { .. } | Error::DegreeExhausted { .. } | Error::RefitFailed { .. })
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotSquare { rows, cols } => write!(f, "matrix is not square ({rows}x{cols})"),
            Error::NonFinite => write!(f, "non-finite entry"),
            Error::SingularMatrix { step } => write!(f, "matrix is singular (pivot {step})"),
            Error::NotSpd { step } => {
                write!(f, "matrix is not symmetric positive definite (pivot {step})")
            }
            Error::NotSymmetric { asymmetry } => {
                write!(f, "matrix is not symmetric (relative asymmetry {asymmetry:e})")
            }
            Error::NoConvergence { iterations } => {
                write!(f, "no convergence after {iterations} iterations")
            }
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            Error::RepeatedRoots => write!(f, "denominator has repeated roots"),
            Error::PoleInsideRegion { pole } => {
                write!(f, "pole {pole} lies inside the approximation region")
            }
            Error::PoleEvaluation { pole } => write!(f, "evaluation at pole {pole}"),
            Error::ScalingExhausted { s_max, best_error } => {
                write!(f, "scaling exhausted: s* > {s_max} (best sup-error {best_error:e})")
            }
            Error::DegreeExhausted { m_max, best_error } => {
                write!(f, "degree exhausted: m > {m_max} (best sample error {best_error:e})")
            }
            Error::RefitFailed { degree, achieved, target } => {
                write!(f, "partial fraction refit failed at degree {degree}: {achieved:e} > {target:e}")
            }
            Error::SingularShift { pole } => {
                write!(f, "shifted system is singular at pole {pole}")
            }
            Error::DegenerateMesh(what) => write!(f, "degenerate mesh: {what}"),
            Error::TooLarge { n, cutoff } => {
                write!(f, "dense path refused: n = {n} exceeds cutoff {cutoff}")
            }
        }
    }
}

impl core::error::Error for Error {}
