//! `r(A) b` for `A = tau M^{-1} K` through the shifted systems
//! `(beta M - tau K) x = M b`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg::{rcm_ordering, Permutation, SparseLuFactor, SparseMatrix};
use crate::rational::{pade_to_partial_fractions, PadeRational, PartialFractionRational};
use crate::spectral::Pencil;
use crate::{Error, Result};

#[derive(Debug, Clone)]
enum Term {
    /// Real pole with real weight.
    Real { alpha: f64, lu: SparseLuFactor<f64> },
    /// A pole together with its conjugate (weights conjugate as well).
    Pair { alpha: Complex64, lu: SparseLuFactor<Complex64> },
    /// A pole without structure.
    Single { alpha: Complex64, lu: SparseLuFactor<Complex64> },
}

/// Factorized shifted matrices for one partial-fraction approximant and
/// one time step, reusable for any number of right-hand sides.
#[derive(Debug, Clone)]
pub struct ShiftedSystems {
    m: SparseMatrix<f64>,
    gamma: Complex64,
    terms: Vec<Term>,
}

fn singular_as_shift(pole: Complex64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::SingularMatrix { .. } => Error::SingularShift { pole },
        other => other,
    }
}

impl ShiftedSystems {
    /// Factorizes `beta_k M - tau K` for every pole, one per conjugate pair.
    pub fn new(r: &PartialFractionRational, pencil: &Pencil, tau: f64) -> Result<Self> {
        let (m, k) = (pencil.mass(), pencil.stiffness());
        let ordering = rcm_ordering(&m.combine(1.0, k, 1.0)?)?;
        let mc = m.to_complex();
        let kc = k.to_complex();
        let mut terms = Vec::with_capacity(r.degree());
        let mut used = alloc::vec![false; r.degree()];
        for i in 0..r.degree() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let (beta, alpha) = (r.poles[i], r.weights[i]);
            if beta.im == 0.0 && alpha.im == 0.0 {
                let shifted = m.combine(beta.re, k, -tau)?;
                let lu = factor(&shifted, &ordering).map_err(singular_as_shift(beta))?;
                terms.push(Term::Real { alpha: alpha.re, lu });
                continue;
            }
            let partner =
                (i + 1..r.degree()).find(|&j| !used[j] && r.poles[j] == beta.conj() && r.weights[j] == alpha.conj());
            let shifted = mc.combine(beta, &kc, Complex64::new(-tau, 0.0))?;
            let lu = factor(&shifted, &ordering).map_err(singular_as_shift(beta))?;
            match partner {
                Some(j) => {
                    used[j] = true;
                    terms.push(Term::Pair { alpha, lu });
                }
                None => terms.push(Term::Single { alpha, lu }),
            }
        }
        Ok(Self { m: m.clone(), gamma: r.gamma, terms })
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    /// Number of factorizations held.
    pub fn num_factorizations(&self) -> usize {
        self.terms.len()
    }

    /// Whether `r(A)` maps real vectors to real vectors.
    pub fn is_real(&self) -> bool {
        self.gamma.im == 0.0 && self.terms.iter().all(|t| !matches!(t, Term::Single { .. }))
    }

    /// `r(A) b` for real `b`; one complex solve per conjugate pair.
    pub fn apply_real(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check(b.len())?;
        if !self.is_real() {
            return Err(Error::InvalidArgument("approximant is not real on real vectors"));
        }
        let mb = self.m.matvec(b)?;
        let mbc: Vec<Complex64> = mb.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut out: Vec<f64> = b.iter().map(|&v| self.gamma.re * v).collect();
        for t in &self.terms {
            match t {
                Term::Real { alpha, lu } => {
                    let x = lu.solve(&mb)?;
                    out.iter_mut().zip(&x).for_each(|(o, xi)| *o += alpha * xi);
                }
                Term::Pair { alpha, lu } => {
                    let x = lu.solve(&mbc)?;
                    out.iter_mut().zip(&x).for_each(|(o, xi)| *o += 2.0 * (alpha * xi).re);
                }
                Term::Single { .. } => unreachable!("excluded by is_real"),
            }
        }
        Ok(out)
    }

    /// `r(A) b` for complex `b`.
    pub fn apply(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(b.len())?;
        let br: Vec<f64> = b.iter().map(|z| z.re).collect();
        let bi: Vec<f64> = b.iter().map(|z| z.im).collect();
        if self.is_real() {
            let (xr, xi) = (self.apply_real(&br)?, self.apply_real(&bi)?);
            return Ok(xr.into_iter().zip(xi).map(|(r, i)| Complex64::new(r, i)).collect());
        }
        let mb: Vec<Complex64> = {
            let (mr, mi) = (self.m.matvec(&br)?, self.m.matvec(&bi)?);
            mr.into_iter().zip(mi).map(|(r, i)| Complex64::new(r, i)).collect()
        };
        let mb_conj: Vec<Complex64> = mb.iter().map(|z| z.conj()).collect();
        let mut out: Vec<Complex64> = b.iter().map(|&v| self.gamma * v).collect();
        for t in &self.terms {
            match t {
                Term::Real { alpha, lu } => {
                    let (xr, xi) = (
                        lu.solve(&mb.iter().map(|z| z.re).collect::<Vec<_>>())?,
                        lu.solve(&mb.iter().map(|z| z.im).collect::<Vec<_>>())?,
                    );
                    for (o, (r, i)) in out.iter_mut().zip(xr.into_iter().zip(xi)) {
                        *o += Complex64::new(r, i) * *alpha;
                    }
                }
                Term::Pair { alpha, lu } => {
                    // (conj(beta) M - tau K)^{-1} M b = conj((beta M - tau K)^{-1} M conj(b))
                    let x = lu.solve(&mb)?;
                    let y = lu.solve(&mb_conj)?;
                    for ((o, xi), yi) in out.iter_mut().zip(&x).zip(&y) {
                        *o += alpha * xi + alpha.conj() * yi.conj();
                    }
                }
                Term::Single { alpha, lu } => {
                    let x = lu.solve(&mb)?;
                    out.iter_mut().zip(&x).for_each(|(o, xi)| *o += alpha * xi);
                }
            }
        }
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: len });
        }
        Ok(())
    }
}

fn factor<T: crate::linalg::Scalar>(a: &SparseMatrix<T>, ordering: &Permutation) -> Result<SparseLuFactor<T>> {
    SparseLuFactor::with_ordering(a, ordering.clone())
}

/// `r(A) b` with `A = tau M^{-1} K` for a real vector `b`.
pub fn apply_partial_fraction(r: &PartialFractionRational, p: &Pencil, b: &[f64]) -> Result<Vec<f64>> {
    ShiftedSystems::new(r, p, p.tau())?.apply_real(b)
}

/// `r(A) b` for a complex vector `b`.
pub fn apply_partial_fraction_complex(
    r: &PartialFractionRational,
    p: &Pencil,
    b: &[Complex64],
) -> Result<Vec<Complex64>> {
    ShiftedSystems::new(r, p, p.tau())?.apply(b)
}

/// `(r(A / s))^s b`: the shifted matrices for `tau / s` are factorized once
/// and applied `s` times.
pub fn apply_scaled(r: &PartialFractionRational, s: u32, p: &Pencil, b: &[f64]) -> Result<Vec<f64>> {
    if s == 0 {
        return Err(Error::InvalidArgument("scaling must be positive"));
    }
    let systems = ShiftedSystems::new(r, p, p.tau() / f64::from(s))?;
    let mut x = b.to_vec();
    for _ in 0..s {
        x = systems.apply_real(&x)?;
    }
    Ok(x)
}

/// Scaled (4,5) Padé applied in partial-fraction form.
pub fn apply_scaled_pade(pade: &PadeRational, p: &Pencil, b: &[f64]) -> Result<Vec<f64>> {
    let pf = pade_to_partial_fractions(pade)?;
    apply_scaled(&pf, pade.scaling.max(1), p, b)
}
