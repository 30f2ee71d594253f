use alloc::vec::Vec;

use super::{rcm_ordering, BandCholesky, DenseMatrix, Permutation, SparseMatrix};
use crate::{Error, Result};

/// Maximum relative asymmetry accepted for an SPD input.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// `P M P^T = L L^T`, exposed through the unpermuted factor `G = P^T L`
/// so that `M = G G^T`.
///
/// `G^{-1} B G^{-T}` is the standard-form matrix of the pencil `(B, M)`;
/// it is how the similarity transform of `tau M^{-1} K` is accessed without
/// forming a matrix square root.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    ordering: Permutation,
    band: BandCholesky,
}

/// Dense Cholesky, natural ordering.
pub fn cholesky(m: &DenseMatrix<f64>) -> Result<CholeskyFactor> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    check_symmetric(m.hermitian_defect())?;
    let sparse = SparseMatrix::from_dense(m);
    let band = BandCholesky::new(&sparse)?;
    Ok(CholeskyFactor { ordering: Permutation::identity(m.rows()), band })
}

fn check_symmetric(defect: f64) -> Result<()> {
    if defect > SYMMETRY_TOLERANCE {
        Err(Error::NotSymmetric { asymmetry: defect })
    } else {
        Ok(())
    }
}

impl CholeskyFactor {
    /// Sparse Cholesky with a reverse Cuthill-McKee ordering.
    pub fn sparse(m: &SparseMatrix<f64>) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        check_symmetric(m.symmetry_defect())?;
        let ordering = rcm_ordering(m)?;
        let band = BandCholesky::new(&m.permute_symmetric(ordering.as_slice()))?;
        Ok(Self { ordering, band })
    }

    pub fn dim(&self) -> usize {
        self.band.dim()
    }

    /// The lower factor `L` in the factor ordering.
    pub fn lower(&self) -> DenseMatrix<f64> {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| self.band.get(i, j))
    }

    pub fn ordering(&self) -> &Permutation {
        &self.ordering
    }

    /// `M^{-1} b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(b.len())?;
        let mut x = self.ordering.gather(b);
        self.band.forward(&mut x);
        self.band.backward(&mut x);
        Ok(self.ordering.scatter(&x))
    }

    /// `G^{-1} x = L^{-1} P x`.
    pub fn half_solve(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let mut y = self.ordering.gather(x);
        self.band.forward(&mut y);
        Ok(y)
    }

    /// `G^{-T} y = P^T L^{-T} y`.
    pub fn half_solve_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y.len())?;
        let mut x = y.to_vec();
        self.band.backward(&mut x);
        Ok(self.ordering.scatter(&x))
    }

    /// `G y = P^T L y`.
    pub fn half_mul(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y.len())?;
        Ok(self.ordering.scatter(&self.band.mul_lower(y)))
    }

    /// Dense `G^{-1} B G^{-T}` for a dense symmetric or skew `B`.
    pub fn congruence_dense(&self, b: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
        let n = self.dim();
        if b.rows() != n || b.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.rows() });
        }
        // X = B G^{-T}  <=>  X^T = G^{-1} B^T; compute column-wise on B^T.
        let bt = b.transpose();
        let mut xt = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.half_solve(&bt.column(j))?;
            for i in 0..n {
                xt[(i, j)] = col[i];
            }
        }
        // xt = G^{-1} B^T, so X = xt^T = B G^{-T}; result = G^{-1} X.
        let x = xt.transpose();
        let mut out = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.half_solve(&x.column(j))?;
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: len });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use alloc::vec;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_and_two_by_two() {
        let f = cholesky(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.lower(), DenseMatrix::identity(3));

        let m = DenseMatrix::from_row_major(2, 2, vec![4.0, 2.0, 2.0, 5.0]).unwrap();
        let l = cholesky(&m).unwrap().lower();
        assert_eq!(l.as_slice(), &[2.0, 0.0, 1.0, 2.0]);
        assert_eq!(l.matmul(&l.transpose()).unwrap(), m);
    }

    #[test]
    fn indefinite_and_asymmetric_rejected() {
        let m = DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(cholesky(&m), Err(Error::NotSpd { .. })));
        let m = DenseMatrix::from_row_major(2, 2, vec![1.0, 0.5, 0.4, 1.0]).unwrap();
        assert!(matches!(cholesky(&m), Err(Error::NotSymmetric { .. })));
    }

    fn random_spd(n: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = DenseMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
        let mut s = g.matmul(&g.transpose()).unwrap();
        for i in 0..n {
            s[(i, i)] += 0.1;
        }
        DenseMatrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]))
    }

    #[test]
    fn solve_and_half_solves_consistent() {
        let n = 25;
        let m = random_spd(n, 4);
        let f = CholeskyFactor::sparse(&SparseMatrix::from_dense(&m)).unwrap();
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let x = f.solve(&b).unwrap();
        let r: Vec<f64> = m.matvec(&x).unwrap().iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) <= 1e-10 * norm2(&b));

        // G^{-1} M G^{-T} = I
        let i = f.congruence_dense(&m).unwrap();
        let d = i.combine(1.0, &DenseMatrix::identity(n), -1.0).unwrap();
        assert!(d.max_abs() < 1e-10);

        // G G^{-1} x = x
        let y = f.half_solve(&b).unwrap();
        let back = f.half_mul(&y).unwrap();
        for (p, q) in back.iter().zip(&b) {
            assert!((p - q).abs() < 1e-10 * q.abs().max(1.0));
        }
        let z = f.half_solve_transpose(&y).unwrap();
        for (p, q) in z.iter().zip(&x) {
            assert!((p - q).abs() < 1e-9 * q.abs().max(1.0));
        }
    }
}
