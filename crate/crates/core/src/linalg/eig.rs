use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::DenseMatrix;
use crate::{Error, Result};
use num_traits::Float;

/// Symmetric eigendecomposition: ascending eigenvalues, eigenvectors as the
/// columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix<f64>,
}

impl SymEig {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Relative asymmetry accepted by [`dense_sym_eig`].
pub const SYM_EIG_TOLERANCE: f64 = 1e-10;

/// Householder tridiagonalization followed by implicit QL.
pub fn dense_sym_eig(s: &DenseMatrix<f64>) -> Result<SymEig> {
    if !s.is_square() {
        return Err(Error::NotSquare { rows: s.rows(), cols: s.cols() });
    }
    if !s.all_finite() {
        return Err(Error::NonFinite);
    }
    let defect = s.hermitian_defect();
    if defect > SYM_EIG_TOLERANCE {
        return Err(Error::NotSymmetric { asymmetry: defect });
    }
    let n = s.rows();
    if n == 0 {
        return Ok(SymEig { values: Vec::new(), vectors: DenseMatrix::zeros(0, 0) });
    }
    // v[j] holds column j of the transform; the input is symmetric so its
    // layout needs no transposition.
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 0.5 * (s[(i, j)] + s[(j, i)])).collect()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e, true);
    tql2(&mut v, &mut d, &mut e, true)?;
    let vectors = DenseMatrix::from_fn(n, n, |i, j| v[j][i]);
    Ok(SymEig { values: d, vectors })
}

/// Ascending eigenvalues of a symmetric matrix, without eigenvectors.
pub fn dense_sym_eigvals(s: &DenseMatrix<f64>) -> Result<Vec<f64>> {
    if !s.is_square() {
        return Err(Error::NotSquare { rows: s.rows(), cols: s.cols() });
    }
    if !s.all_finite() {
        return Err(Error::NonFinite);
    }
    let defect = s.hermitian_defect();
    if defect > SYM_EIG_TOLERANCE {
        return Err(Error::NotSymmetric { asymmetry: defect });
    }
    let n = s.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 0.5 * (s[(i, j)] + s[(j, i)])).collect()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e, false);
    tql2(&mut v, &mut d, &mut e, false)?;
    Ok(d)
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and sub-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eig(diag: &[f64], off: &[f64]) -> Result<SymEig> {
    let n = diag.len();
    if n == 0 {
        return Ok(SymEig { values: Vec::new(), vectors: DenseMatrix::zeros(0, 0) });
    }
    if off.len() + 1 != n {
        return Err(Error::DimensionMismatch { expected: n - 1, found: off.len() });
    }
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[1..].copy_from_slice(off);
    tql2(&mut v, &mut d, &mut e, true)?;
    let vectors = DenseMatrix::from_fn(n, n, |i, j| v[j][i]);
    Ok(SymEig { values: d, vectors })
}

// Householder reduction to tridiagonal form (Bowdler, Martin, Reinsch,
// Wilkinson; as in EISPACK tred2). On exit `d` holds the diagonal, `e[1..]`
// the sub-diagonal and `v` the transpose of the accumulated orthogonal
// transform, so that the inner loops run along rows.
fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[j][n - 1];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[j][i - 1];
                v[j][i] = 0.0;
                v[i][j] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = Float::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[i][j] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[j][k] * d[k];
                    e[k] += v[j][k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[j][k] -= f * e[k] + g * d[k];
                }
                d[j] = v[j][i - 1];
                v[j][i] = 0.0;
            }
        }
        d[i] = h;
    }
    if !accumulate {
        for j in 0..n {
            d[j] = v[j][j];
        }
        e[0] = 0.0;
        return;
    }
    for i in 0..n - 1 {
        v[i][n - 1] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[i + 1][k] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[i + 1][k] * v[j][k];
                }
                for k in 0..=i {
                    v[j][k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[i + 1][k] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[j][n - 1];
        v[j][n - 1] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e[1..]); accumulates into the
// transposed transform `v` and sorts ascending.
fn tql2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64], accumulate: bool) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NoConvergence { iterations: iter });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = Float::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in l + 2..n {
                    d[i] -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = Float::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if !accumulate {
                        continue;
                    }
                    let (lo, hi) = v.split_at_mut(i + 1);
                    for (a, b) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
                        h = *b;
                        *b = s * *a + c * h;
                        *a = c * *a - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    // selection sort keeps eigenvector columns aligned
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in i + 1..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            if accumulate {
                v.swap(i, k);
            }
        }
    }
    Ok(())
}

/// All eigenvalues of a general complex matrix (Hessenberg reduction and
/// shifted complex QR), in no particular order.
pub fn eigvals_general(a: &DenseMatrix<Complex64>) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if !a.all_finite() {
        return Err(Error::NonFinite);
    }
    let mut h = a.clone();
    hessenberg(&mut h);
    hessenberg_qr(&mut h)
}

fn hessenberg(h: &mut DenseMatrix<Complex64>) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let norm = Float::sqrt((k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        for i in 0..n {
            v[i] = Complex64::new(0.0, 0.0);
        }
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = Float::sqrt((k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>());
        if vnorm == 0.0 {
            continue;
        }
        for i in k + 1..n {
            v[i] /= vnorm;
        }
        // H <- (I - 2 v v^H) H
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in k + 1..n {
                s += v[i].conj() * h[(i, j)];
            }
            s *= 2.0;
            for i in k + 1..n {
                let vi = v[i];
                h[(i, j)] -= vi * s;
            }
        }
        // H <- H (I - 2 v v^H)
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in k + 1..n {
                s += h[(i, j)] * v[j];
            }
            s *= 2.0;
            for j in k + 1..n {
                let vj = v[j].conj();
                h[(i, j)] -= s * vj;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let r = Float::sqrt(a.norm_sqr() + b.norm_sqr());
    if r == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

fn hessenberg_qr(h: &mut DenseMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = h.rows();
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // deflation search
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if sub <= eps * diag || sub < f64::MIN_POSITIVE {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 60 * n.max(10) {
            return Err(Error::NoConvergence { iterations: total });
        }
        let shift = if iter % 11 == 10 {
            // exceptional shift
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr * 0.25 - det).sqrt();
            let l1 = tr * 0.5 + disc;
            let l2 = tr * 0.5 - disc;
            if (l1 - d).norm() < (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };
        for k in l..=hi {
            h[(k, k)] -= shift;
        }
        rot.clear();
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rot.push((c, s));
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rot[idx];
            let top = (k + 2).min(hi);
            for i in l..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_sym(n: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = DenseMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
        DenseMatrix::from_fn(n, n, |i, j| a[(i, j)] + a[(j, i)])
    }

    #[test]
    fn diagonal_and_swap() {
        let e = dense_sym_eig(&DenseMatrix::from_diag(&[5.0, -2.0])).unwrap();
        assert_eq!(e.values, vec![-2.0, 5.0]);
        let s = DenseMatrix::from_row_major(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let e = dense_sym_eig(&s).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_residual_and_orthogonality() {
        let n = 50;
        let s = random_sym(n, 3);
        let e = dense_sym_eig(&s).unwrap();
        let sv = s.matmul(&e.vectors).unwrap();
        let vl = e.vectors.matmul(&DenseMatrix::from_diag(&e.values)).unwrap();
        let r = sv.combine(1.0, &vl, -1.0).unwrap();
        assert!(r.frobenius_norm() <= 1e-10 * s.frobenius_norm());
        let vtv = e.vectors.transpose().matmul(&e.vectors).unwrap();
        let d = vtv.combine(1.0, &DenseMatrix::identity(n), -1.0).unwrap();
        assert!(d.max_abs() <= 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn values_only_matches_full() {
        for (n, seed) in [(1, 1), (2, 2), (17, 3), (60, 4)] {
            let a = random_sym(n, seed);
            let full = dense_sym_eig(&a).unwrap();
            let vals = dense_sym_eigvals(&a).unwrap();
            for (x, y) in full.values.iter().zip(&vals) {
                assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn rejects_nonsymmetric() {
        let a = DenseMatrix::from_row_major(2, 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(dense_sym_eig(&a), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let d = [2.0, -1.0, 3.0, 0.5];
        let o = [1.0, 0.25, -0.7];
        let t = tridiagonal_eig(&d, &o).unwrap();
        let dense = DenseMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                d[i]
            } else if i + 1 == j {
                o[i]
            } else if j + 1 == i {
                o[j]
            } else {
                0.0
            }
        });
        let e = dense_sym_eig(&dense).unwrap();
        for (a, b) in t.values.iter().zip(&e.values) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn general_eigenvalues_known() {
        // rotation generator: eigenvalues +-i
        let a = DenseMatrix::from_row_major(2, 2, vec![0.0, 1.0, -1.0, 0.0]).unwrap().to_complex();
        let mut ev = eigvals_general(&a).unwrap();
        ev.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);

        // companion of (z-1)(z-2)(z-3)(z+4)
        // z^4 - 2 z^3 - 13 z^2 + 38 z - 24
        let c = DenseMatrix::from_row_major(
            4,
            4,
            vec![2.0, 13.0, -38.0, 24.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        )
        .unwrap()
        .to_complex();
        let mut ev: Vec<f64> = eigvals_general(&c).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&[-4.0, 1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-10, "{ev:?}");
        }
    }

    #[test]
    fn general_matches_symmetric_on_symmetric_input() {
        let s = random_sym(30, 8);
        let mut g: Vec<f64> = eigvals_general(&s.to_complex()).unwrap().iter().map(|z| z.re).collect();
        g.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let e = dense_sym_eig(&s).unwrap();
        for (a, b) in g.iter().zip(&e.values) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn general_trace_and_determinant_random() {
        let n = 40;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let a = DenseMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let ev = eigvals_general(&a).unwrap();
        let trace: Complex64 = (0..n).map(|i| a[(i, i)]).sum();
        let sum: Complex64 = ev.iter().sum();
        assert!((trace - sum).norm() < 1e-11);
        // each eigenvalue makes A - lambda I singular
        for &lambda in ev.iter().take(5) {
            let shifted = DenseMatrix::from_fn(n, n, |i, j| if i == j { a[(i, j)] - lambda } else { a[(i, j)] });
            let smin = crate::linalg::smallest_right_singular_vector(&shifted).unwrap().0;
            assert!(smin < 1e-11, "{smin}");
        }
    }
}
