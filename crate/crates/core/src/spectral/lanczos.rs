//! Lanczos with full reorthogonalization for extreme eigenpairs of a
//! symmetric operator given only through its action.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{random_unit_vector, tridiagonal_eig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Min,
    Max,
}

#[derive(Debug, Clone)]
pub(crate) struct RitzPair {
    pub value: f64,
    /// Residual reported by the caller's residual function.
    pub residual: f64,
}

pub(crate) struct LanczosRun<'a> {
    pub n: usize,
    pub op: &'a dyn Fn(&[f64]) -> Result<Vec<f64>>,
    /// Explicit residual of the original problem for a Ritz pair.
    pub residual: &'a dyn Fn(f64, &[f64]) -> Result<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl LanczosRun<'_> {
    /// Ritz pairs for each requested end, in the order of `wanted`.
    pub fn extremes(&self, wanted: &[Which]) -> Result<Vec<RitzPair>> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidArgument("empty operator"));
        }
        let limit = self.max_iter.min(n).max(1);
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut q = random_unit_vector::<f64>(n, self.seed);
        let mut next_check = 2usize;
        loop {
            let mut w = (self.op)(&q)?;
            let alpha = dot(&q, &w);
            axpy(-alpha, &q, &mut w);
            if let (Some(prev), Some(&beta)) = (basis.last(), betas.last()) {
                axpy(-beta, prev, &mut w);
            }
            basis.push(q);
            alphas.push(alpha);
            // two passes of classical Gram-Schmidt
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let beta = norm(&w);
            let k = alphas.len();
            let scale = alphas.iter().map(|a| a.abs()).chain(betas.iter().copied()).fold(0.0_f64, f64::max);
            let invariant = beta <= 1e-13 * scale.max(f64::MIN_POSITIVE) || k == n;
            let exhausted = k >= limit;

            if k >= next_check || invariant || exhausted {
                next_check = k + (k / 8).max(2);
                let t = tridiagonal_eig(&alphas, &betas)?;
                let mut pairs = Vec::with_capacity(wanted.len());
                let mut all_ok = true;
                for &which in wanted {
                    let idx = match which {
                        Which::Min => 0,
                        Which::Max => k - 1,
                    };
                    let theta = t.values[idx];
                    let s = t.vectors.column(idx);
                    let cheap = (beta * s[k - 1]).abs();
                    let cheap_rel = cheap / (theta.abs().max(scale * f64::EPSILON) * 2.0);
                    if !(invariant || exhausted) && cheap_rel > self.tol {
                        all_ok = false;
                        break;
                    }
                    let mut y = vec![0.0; n];
                    for (coef, v) in s.iter().zip(&basis) {
                        axpy(*coef, v, &mut y);
                    }
                    let resid = (self.residual)(theta, &y)?;
                    if resid > self.tol && !invariant {
                        all_ok = false;
                        break;
                    }
                    pairs.push(RitzPair { value: theta, residual: resid });
                }
                if all_ok {
                    return Ok(pairs);
                }
                if exhausted || invariant {
                    return Err(Error::NoConvergence { iterations: k });
                }
            }
            q = w;
            let inv = 1.0 / beta;
            q.iter_mut().for_each(|x| *x *= inv);
            betas.push(beta);
        }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    crate::linalg::norm2(x)
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dense_sym_eig, DenseMatrix};
    use rand::{Rng, SeedableRng};

    #[test]
    fn extremes_of_random_symmetric() {
        let n = 120;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let a = DenseMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
        let s = DenseMatrix::from_fn(n, n, |i, j| a[(i, j)] + a[(j, i)]);
        let exact = dense_sym_eig(&s).unwrap();
        let op = |x: &[f64]| s.matvec(x);
        let resid = |theta: f64, y: &[f64]| {
            let sy = s.matvec(y).unwrap();
            let r: Vec<f64> = sy.iter().zip(y).map(|(p, q)| p - theta * q).collect();
            Ok(norm(&r) / (theta.abs() * norm(y) + norm(&sy)))
        };
        let run = LanczosRun { n, op: &op, residual: &resid, tol: 1e-10, max_iter: 5 * n, seed: 3 };
        let pairs = run.extremes(&[Which::Min, Which::Max]).unwrap();
        assert!((pairs[0].value - exact.min()).abs() < 1e-8 * exact.min().abs());
        assert!((pairs[1].value - exact.max()).abs() < 1e-8 * exact.max().abs());
        assert!(pairs.iter().all(|p| p.residual <= 1e-10));
    }
}
