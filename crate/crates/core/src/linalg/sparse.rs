use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{DenseMatrix, Scalar};
use crate::{Error, Result};

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row; duplicates are
/// summed on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_offsets: vec![0; rows + 1], col_indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut counts = vec![0usize; rows + 1];
        for &(i, j, v) in triplets {
            if i >= rows {
                return Err(Error::DimensionMismatch { expected: rows, found: i + 1 });
            }
            if j >= cols {
                return Err(Error::DimensionMismatch { expected: cols, found: j + 1 });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            counts[i + 1] += 1;
        }
        for i in 0..rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols_tmp = vec![0usize; triplets.len()];
        let mut vals_tmp = vec![T::zero(); triplets.len()];
        for &(i, j, v) in triplets {
            cols_tmp[next[i]] = j;
            vals_tmp[next[i]] = v;
            next[i] += 1;
        }

        let mut row_offsets = Vec::with_capacity(rows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        let mut scratch: Vec<(usize, T)> = Vec::new();
        for i in 0..rows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols_tmp[k], vals_tmp[k])));
            scratch.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < scratch.len() {
                let j = scratch[k].0;
                let mut acc = T::zero();
                while k < scratch.len() && scratch[k].0 == j {
                    acc = acc + scratch[k].1;
                    k += 1;
                }
                col_indices.push(j);
                values.push(acc);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self { rows, cols, row_offsets, col_indices, values })
    }

    pub fn from_dense(a: &DenseMatrix<T>) -> Self {
        let mut triplets = Vec::new();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let v = a[(i, j)];
                if v != T::zero() {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(a.rows(), a.cols(), &triplets).expect("dense input is consistent")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Iterates over `(col, value)` of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        (0..self.rows).flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v))).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: x.len() });
        }
        let mut out = vec![T::zero(); self.rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn matvec_into(&self, x: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).fold(T::zero(), |acc, (j, v)| acc + v * x[j]);
        }
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.cols, self.rows, &triplets).expect("transpose is consistent")
    }

    /// `alpha * self + beta * other` over the union pattern.
    pub fn combine(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch { expected: self.rows, found: other.rows });
        }
        let mut row_offsets = Vec::with_capacity(self.rows + 1);
        let mut col_indices = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(self.nnz().max(other.nnz()));
        row_offsets.push(0);
        for i in 0..self.rows {
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).peekable();
            loop {
                let (j, v) = match (a.peek(), b.peek()) {
                    (None, None) => break,
                    (Some(&(ja, va)), Some(&(jb, vb))) if ja == jb => {
                        a.next();
                        b.next();
                        (ja, alpha * va + beta * vb)
                    }
                    (Some(&(ja, va)), Some(&(jb, _))) if ja < jb => {
                        a.next();
                        (ja, alpha * va)
                    }
                    (Some(&(ja, va)), None) => {
                        a.next();
                        (ja, alpha * va)
                    }
                    (_, Some(&(jb, vb))) => {
                        b.next();
                        (jb, beta * vb)
                    }
                };
                col_indices.push(j);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self { rows: self.rows, cols: self.cols, row_offsets, col_indices, values })
    }

    pub fn scale(&self, alpha: T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = *v * alpha);
        out
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> SparseMatrix<U> {
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }

    /// `max |a_ij - a_ji| / max |a|`.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                if j > i {
                    worst = worst.max((v - self.get(j, i)).modulus());
                } else if j < i {
                    // catches entries whose mirror is structurally absent
                    if self.get(j, i) == T::zero() {
                        worst = worst.max(v.modulus());
                    }
                }
            }
        }
        worst / scale
    }

    /// Half bandwidths `(lower, upper)` of the stored pattern.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut lower = 0;
        let mut upper = 0;
        for i in 0..self.rows {
            for (j, _) in self.row(i) {
                if j < i {
                    lower = lower.max(i - j);
                } else {
                    upper = upper.max(j - i);
                }
            }
        }
        (lower, upper)
    }

    /// Symmetric permutation `B[i][j] = A[perm[i]][perm[j]]`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Self {
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let triplets: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (inverse[i], inverse[j], v)).collect();
        Self::from_triplets(self.rows, self.cols, &triplets).expect("permutation preserves shape")
    }

    /// Checks the CSR structural invariants.
    pub fn is_well_formed(&self) -> bool {
        if self.row_offsets.len() != self.rows + 1 || *self.row_offsets.last().unwrap() != self.values.len() {
            return false;
        }
        (0..self.rows).all(|i| {
            let cols = &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]];
            self.row_offsets[i] <= self.row_offsets[i + 1]
                && cols.windows(2).all(|w| w[0] < w[1])
                && cols.iter().all(|&j| j < self.cols)
        })
    }
}

impl SparseMatrix<f64> {
    pub fn to_complex(&self) -> SparseMatrix<Complex64> {
        self.map(|v| Complex64::new(v, 0.0))
    }

    /// Sum of all entries.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn abs_max_diag_ratio(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for i in 0..self.rows.min(self.cols) {
            let d = self.get(i, i).abs();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let a = SparseMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, 3.0), (1, 1, -1.0)]).unwrap();
        assert_eq!(a.row_offsets(), &[0, 2, 3]);
        assert_eq!(a.col_indices(), &[0, 2, 1]);
        assert_eq!(a.values(), &[2.0, 4.0, -1.0]);
        assert!(a.is_well_formed());
        assert!(SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, &[(0, 0, f64::NAN)]).is_err());
    }

    #[test]
    fn combine_union_pattern() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 2.0)]).unwrap();
        let b = SparseMatrix::from_triplets(2, 2, &[(0, 1, 5.0), (1, 0, 1.0)]).unwrap();
        let c = a.combine(2.0, &b, -1.0).unwrap();
        assert_eq!(c.to_dense().as_slice(), &[2.0, -5.0, 3.0, 0.0]);
    }

    #[test]
    fn symmetry_defect_detects_missing_mirror() {
        let a = SparseMatrix::from_triplets(2, 2, &[(1, 0, 1.0), (0, 0, 1.0)]).unwrap();
        assert!(a.symmetry_defect() > 0.5);
        let s = SparseMatrix::from_triplets(2, 2, &[(1, 0, 1.0), (0, 1, 1.0)]).unwrap();
        assert_eq!(s.symmetry_defect(), 0.0);
    }

    proptest! {
        #[test]
        fn csr_invariants_and_dense_agreement(
            entries in proptest::collection::vec((0usize..6, 0usize..5, -10.0f64..10.0), 0..40),
            x in proptest::collection::vec(-1.0f64..1.0, 5),
        ) {
            let a = SparseMatrix::from_triplets(6, 5, &entries).unwrap();
            prop_assert!(a.is_well_formed());
            let y = a.matvec(&x).unwrap();
            let yd = a.to_dense().matvec(&x).unwrap();
            for (u, v) in y.iter().zip(&yd) {
                prop_assert!((u - v).abs() < 1e-12);
            }
            let t = a.transpose();
            prop_assert!(t.is_well_formed());
            prop_assert_eq!(t.transpose(), a);
        }
    }
}
