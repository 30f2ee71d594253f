use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::DenseMatrix;
use crate::{Error, Result};
use num_traits::Float;

/// The `cols x cols` triangular factor `R` of a Householder QR of a tall
/// complex matrix. Wide inputs come back fully reduced but untruncated.
pub fn householder_qr_r(a: &DenseMatrix<Complex64>) -> DenseMatrix<Complex64> {
    let (rows, cols) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut v = vec![Complex64::new(0.0, 0.0); rows];
    for k in 0..cols.min(rows) {
        let norm = Float::sqrt((k..rows).map(|i| w[(i, k)].norm_sqr()).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let x0 = w[(k, k)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        for i in k..rows {
            v[i] = w[(i, k)];
        }
        v[k] -= alpha;
        let vnorm = Float::sqrt((k..rows).map(|i| v[i].norm_sqr()).sum::<f64>());
        if vnorm == 0.0 {
            continue;
        }
        for i in k..rows {
            v[i] /= vnorm;
        }
        for j in k..cols {
            let mut s = Complex64::new(0.0, 0.0);
            for i in k..rows {
                s += v[i].conj() * w[(i, j)];
            }
            s *= 2.0;
            for i in k..rows {
                let vi = v[i];
                w[(i, j)] -= vi * s;
            }
        }
    }
    if rows < cols {
        return w;
    }
    DenseMatrix::from_fn(cols, cols, |i, j| if i <= j { w[(i, j)] } else { Complex64::new(0.0, 0.0) })
}

/// Smallest singular value of `a` and its right singular vector.
///
/// QR first, then one-sided (Hestenes) Jacobi on the triangular factor, so
/// small singular values keep full relative accuracy.
pub fn smallest_right_singular_vector(a: &DenseMatrix<Complex64>) -> Result<(f64, Vec<Complex64>)> {
    let cols = a.cols();
    if cols == 0 {
        return Err(Error::InvalidArgument("matrix has no columns"));
    }
    if !a.all_finite() {
        return Err(Error::NonFinite);
    }
    let r = if a.rows() > cols { householder_qr_r(a) } else { a.clone() };
    let (sigma, v) = jacobi_svd(&r)?;
    let (k, &smin) = sigma.iter().enumerate().min_by(|x, y| x.1.partial_cmp(y.1).unwrap()).unwrap();
    Ok((smin, v.column(k)))
}

/// Singular values and right singular vectors (columns of `V`).
fn jacobi_svd(a: &DenseMatrix<Complex64>) -> Result<(Vec<f64>, DenseMatrix<Complex64>)> {
    let (rows, cols) = (a.rows(), a.cols());
    // column-major working copies
    let mut u: Vec<Vec<Complex64>> = (0..cols).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<Complex64>> =
        (0..cols).map(|j| (0..cols).map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()).collect();
    let tol = f64::EPSILON * Float::sqrt(rows as f64).max(1.0);
    let mut converged = false;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = u[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = u[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = u[p].iter().zip(&u[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= tol * Float::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                u[q].iter_mut().for_each(|z| *z *= phase);
                v[q].iter_mut().for_each(|z| *z *= phase);
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + Float::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / Float::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut u, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iterations: 80 });
    }
    let sigma = u.iter().map(|col| Float::sqrt(col.iter().map(|z| z.norm_sqr()).sum::<f64>())).collect();
    let vm = DenseMatrix::from_fn(cols, cols, |i, j| v[j][i]);
    Ok((sigma, vm))
}

fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use rand::{Rng, SeedableRng};

    #[test]
    fn qr_r_preserves_gram() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let a = DenseMatrix::from_fn(12, 4, |_, _| Complex64::new(rng.gen(), rng.gen()));
        let r = householder_qr_r(&a);
        let g1 = a.adjoint().matmul(&a).unwrap();
        let g2 = r.adjoint().matmul(&r).unwrap();
        let d = g1.combine(Complex64::new(1.0, 0.0), &g2, Complex64::new(-1.0, 0.0)).unwrap();
        assert!(d.max_abs() < 1e-12);
    }

    #[test]
    fn smallest_singular_pair_of_rank_deficient() {
        // third column = first + i * second
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = DenseMatrix::from_fn(10, 3, |_, _| Complex64::new(rng.gen(), rng.gen()));
        let a =
            DenseMatrix::from_fn(10, 3, |i, j| if j == 2 { a[(i, 0)] + Complex64::i() * a[(i, 1)] } else { a[(i, j)] });
        let (s, v) = smallest_right_singular_vector(&a).unwrap();
        assert!(s < 1e-13);
        let av = a.matvec(&v).unwrap();
        assert!(norm2(&av) < 1e-13);
        assert!((norm2(&v) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn diagonal_singular_values() {
        let a = DenseMatrix::from_diag(&[3.0, 0.5, 2.0]).to_complex();
        let (s, v) = smallest_right_singular_vector(&a).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
        assert!((v[1].norm() - 1.0).abs() < 1e-15);
    }
}
