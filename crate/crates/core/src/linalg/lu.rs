use alloc::vec::Vec;

use super::{rcm_ordering, BandLu, DenseMatrix, Permutation, Scalar, SparseMatrix, PIVOT_THRESHOLD};
use crate::{Error, Result};

/// Dense LU with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactor<T> {
    /// Unit-lower multipliers below the diagonal, `U` on and above.
    packed: DenseMatrix<T>,
    /// `perm[i]` is the original row placed at position `i`.
    perm: Vec<usize>,
}

pub fn lu_factor<T: Scalar>(a: &DenseMatrix<T>) -> Result<LuFactor<T>> {
    LuFactor::new(a)
}

impl<T: Scalar> LuFactor<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        if !a.all_finite() {
            return Err(Error::NonFinite);
        }
        let n = a.rows();
        let threshold = PIVOT_THRESHOLD * a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot_abs) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].modulus()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs <= threshold || pivot_abs == 0.0 {
                return Err(Error::SingularMatrix { step: k });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            let (upper, lower) = lu_rows_split(&mut lu, k);
            let pivot_row = &upper[k + 1..];
            for row in lower.chunks_mut(n) {
                let l = row[k] / pivot;
                row[k] = l;
                if l == T::zero() {
                    continue;
                }
                for (x, &u) in row[k + 1..].iter_mut().zip(pivot_row) {
                    *x = *x - l * u;
                }
            }
        }
        Ok(Self { packed: lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.packed.rows()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn lower(&self) -> DenseMatrix<T> {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            core::cmp::Ordering::Greater => self.packed[(i, j)],
            core::cmp::Ordering::Equal => T::one(),
            core::cmp::Ordering::Less => T::zero(),
        })
    }

    pub fn upper(&self) -> DenseMatrix<T> {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| if i <= j { self.packed[(i, j)] } else { T::zero() })
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.packed.row(i);
            let mut acc = x[i];
            for j in 0..i {
                acc = acc - row[j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let row = self.packed.row(i);
            let mut acc = x[i];
            for j in i + 1..n {
                acc = acc - row[j] * x[j];
            }
            x[i] = acc / row[i];
        }
        Ok(x)
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let n = self.dim();
        if b.rows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.rows() });
        }
        let mut out = DenseMatrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            let x = self.solve(&b.column(j))?;
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        Ok(out)
    }
}

fn lu_rows_split<T: Scalar>(lu: &mut DenseMatrix<T>, k: usize) -> (&[T], &mut [T]) {
    let n = lu.cols();
    let (head, tail) = lu.as_mut_slice().split_at_mut((k + 1) * n);
    (&head[k * n..], tail)
}

/// Sparse LU: reverse Cuthill-McKee ordering followed by banded LU with
/// partial pivoting.
#[derive(Debug, Clone)]
pub struct SparseLuFactor<T> {
    ordering: Permutation,
    band: BandLu<T>,
}

impl<T: Scalar> SparseLuFactor<T> {
    pub fn new(a: &SparseMatrix<T>) -> Result<Self> {
        let ordering = rcm_ordering(a)?;
        Self::with_ordering(a, ordering)
    }

    /// Reuses an ordering computed for a matrix with the same pattern.
    pub fn with_ordering(a: &SparseMatrix<T>, ordering: Permutation) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        let permuted = a.permute_symmetric(ordering.as_slice());
        let band = BandLu::new(&permuted)?;
        Ok(Self { ordering, band })
    }

    pub fn dim(&self) -> usize {
        self.band.dim()
    }

    pub fn ordering(&self) -> &Permutation {
        &self.ordering
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        if b.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: b.len() });
        }
        let pb = self.ordering.gather(b);
        let px = self.band.solve(&pb)?;
        Ok(self.ordering.scatter(&px))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    fn random_complex(n: usize, seed: u64) -> DenseMatrix<Complex64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn identity_factor_is_trivial() {
        let f = lu_factor(&DenseMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(f.permutation(), &[0, 1, 2]);
        assert_eq!(f.lower(), DenseMatrix::identity(3));
        assert_eq!(f.upper(), DenseMatrix::identity(3));
    }

    #[test]
    fn swap_matrix_pivots() {
        let a = DenseMatrix::from_row_major(2, 2, alloc::vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let f = lu_factor(&a).unwrap();
        assert_eq!(f.permutation(), &[1, 0]);
        assert_eq!(f.lower(), DenseMatrix::identity(2));
        assert_eq!(f.upper(), DenseMatrix::identity(2));
    }

    #[test]
    fn random_reconstruction() {
        let n = 50;
        let a = random_complex(n, 7);
        let f = lu_factor(&a).unwrap();
        let lu = f.lower().matmul(&f.upper()).unwrap();
        let pa = DenseMatrix::from_fn(n, n, |i, j| a[(f.permutation()[i], j)]);
        let resid = pa.combine(Complex64::new(1.0, 0.0), &lu, Complex64::new(-1.0, 0.0)).unwrap();
        assert!(resid.frobenius_norm() / a.frobenius_norm() <= 1e-13);
    }

    #[test]
    fn solve_diagonal_and_residual() {
        let a = DenseMatrix::from_diag(&[2.0, 4.0]);
        let x = lu_factor(&a).unwrap().solve(&[2.0, 4.0]).unwrap();
        assert_eq!(x, alloc::vec![1.0, 1.0]);

        let n = 100;
        let a = random_complex(n, 11);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let b: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
        let x = lu_factor(&a).unwrap().solve(&b).unwrap();
        let ax = a.matvec(&x).unwrap();
        let r: Vec<Complex64> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) <= 1e-12 * norm2(&b));
    }

    #[test]
    fn singular_and_mismatch_errors() {
        let a = DenseMatrix::from_row_major(2, 2, alloc::vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(lu_factor(&a), Err(Error::SingularMatrix { .. })));
        let f = lu_factor(&DenseMatrix::<f64>::identity(2)).unwrap();
        assert!(matches!(f.solve(&[1.0]), Err(Error::DimensionMismatch { .. })));
        let nan = DenseMatrix::from_diag(&[1.0, f64::NAN]);
        assert_eq!(lu_factor(&nan).unwrap_err(), Error::NonFinite);
    }

    #[test]
    fn round_trip_recovers_x() {
        let n = 40;
        let a = random_complex(n, 5);
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let b = a.matvec(&x).unwrap();
        let y = lu_factor(&a).unwrap().solve(&b).unwrap();
        let d: Vec<Complex64> = y.iter().zip(&x).map(|(p, q)| p - q).collect();
        assert!(norm2(&d) <= 1e-10 * norm2(&x));
    }
}
