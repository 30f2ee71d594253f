use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::{Scalar, SparseMatrix, PIVOT_THRESHOLD};
use crate::{Error, Result};
use num_traits::Float;

/// Symmetric reordering; `perm[new] = old`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    perm: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect() }
    }

    pub fn from_vec(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || seen[p] {
                return Err(Error::InvalidArgument("not a permutation"));
            }
            seen[p] = true;
        }
        Ok(Self { perm })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    /// `out[new] = x[perm[new]]`.
    pub fn gather<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.perm.iter().map(|&old| x[old]).collect()
    }

    /// Inverse of [`gather`](Self::gather).
    pub fn scatter<T: Copy>(&self, x: &[T]) -> Vec<T> {
        let mut out = x.to_vec();
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}

/// Reverse Cuthill-McKee ordering of the symmetrized pattern of `a`.
pub fn rcm_ordering<T: Scalar>(a: &SparseMatrix<T>) -> Result<Permutation> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]).unwrap();
        let start = pseudo_peripheral(seed, &adj, &degree, &visited);
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    Permutation::from_vec(order)
}

fn bfs_levels(start: usize, adj: &[Vec<usize>], blocked: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = blocked.to_vec();
    seen[start] = true;
    let mut levels = vec![vec![start]];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize], blocked: &[bool]) -> usize {
    let mut current = seed;
    let mut depth = bfs_levels(current, adj, blocked).len();
    for _ in 0..8 {
        let levels = bfs_levels(current, adj, blocked);
        let candidate = *levels.last().unwrap().iter().min_by_key(|&&v| degree[v]).unwrap();
        let candidate_depth = bfs_levels(candidate, adj, blocked).len();
        if candidate_depth <= depth {
            break;
        }
        current = candidate;
        depth = candidate_depth;
    }
    current
}

/// Banded LU with partial pivoting.
///
/// Row `i` stores columns `i - kl ..= i + kl + ku`; pivoting widens the
/// upper band of `U` to `kl + ku`. Multipliers stay where they were computed
/// and later interchanges only touch columns to the right, so the solve
/// applies interchanges and eliminations interleaved.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Scalar> BandLu<T> {
    pub fn new(a: &SparseMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if n != a.cols() {
            return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut lu = Self { n, kl, ku, width, data: vec![T::zero(); n * width], pivots: vec![0; n] };
        for i in 0..n {
            for (j, v) in a.row(i) {
                let idx = lu.index(i, j);
                lu.data[idx] = v;
            }
        }
        let threshold = PIVOT_THRESHOLD * a.max_abs();
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = -1.0;
            for i in k..=last_row {
                let m = lu.data[lu.index(i, k)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best <= threshold || best == 0.0 {
                return Err(Error::SingularMatrix { step: k });
            }
            lu.pivots[k] = p;
            if p != k {
                for c in k..=last_col {
                    let (ik, ip) = (lu.index(k, c), lu.index(p, c));
                    lu.data.swap(ik, ip);
                }
            }
            let pivot = lu.data[lu.index(k, k)];
            let kbase = lu.index(k, k);
            for i in k + 1..=last_row {
                let ik = lu.index(i, k);
                let l = lu.data[ik] / pivot;
                lu.data[ik] = l;
                if l == T::zero() {
                    continue;
                }
                // Row k columns k+1..=last_col are contiguous, as are row i's.
                let ibase = ik + 1;
                for off in 0..last_col - k {
                    let u = lu.data[kbase + 1 + off];
                    let x = &mut lu.data[ibase + off];
                    *x = *x - l * u;
                }
            }
        }
        Ok(lu)
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk == T::zero() {
                continue;
            }
            for i in k + 1..=(k + self.kl).min(n.saturating_sub(1)) {
                x[i] = x[i] - self.data[self.index(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            let last = (i + self.kl + self.ku).min(n - 1);
            let base = self.index(i, i);
            let mut acc = x[i];
            for (off, c) in (i + 1..=last).enumerate() {
                acc = acc - self.data[base + 1 + off] * x[c];
            }
            x[i] = acc / self.data[base];
        }
        Ok(x)
    }
}

/// Banded Cholesky `A = L L^T` of a real SPD matrix.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    /// Row `i` stores `L[i][i - bw ..= i]`.
    data: Vec<f64>,
}

impl BandCholesky {
    pub fn new(a: &SparseMatrix<f64>) -> Result<Self> {
        let n = a.rows();
        if n != a.cols() {
            return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        let (bw, _) = a.bandwidths();
        let w = bw + 1;
        let mut l = Self { n, bw, data: vec![0.0; n * w] };
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    let idx = l.index(i, j);
                    l.data[idx] = v;
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = l.data[l.index(i, j)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= l.data[l.index(i, k)] * l.data[l.index(j, k)];
                }
                if i == j {
                    if s.is_nan() || s <= 0.0 {
                        return Err(Error::NotSpd { step: i });
                    }
                    let idx = l.index(i, i);
                    l.data[idx] = Float::sqrt(s);
                } else {
                    let idx = l.index(i, j);
                    l.data[idx] = s / l.data[l.index(j, j)];
                }
            }
        }
        Ok(l)
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + (j + self.bw - i)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i || i - j > self.bw {
            0.0
        } else {
            self.data[self.index(i, j)]
        }
    }

    /// `L^{-1} b` in place.
    pub fn forward(&self, x: &mut [f64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let mut acc = x[i];
            for k in lo..i {
                acc -= self.data[self.index(i, k)] * x[k];
            }
            x[i] = acc / self.data[self.index(i, i)];
        }
    }

    /// `L^{-T} b` in place.
    pub fn backward(&self, x: &mut [f64]) {
        for i in (0..self.n).rev() {
            x[i] /= self.data[self.index(i, i)];
            let xi = x[i];
            let lo = i.saturating_sub(self.bw);
            for k in lo..i {
                x[k] -= self.data[self.index(i, k)] * xi;
            }
        }
    }

    /// `L x`.
    pub fn mul_lower(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.bw);
                (lo..=i).map(|k| self.data[self.index(i, k)] * x[k]).sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm2, DenseMatrix};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    fn grid_laplacian(m: usize) -> SparseMatrix<f64> {
        let n = m * m;
        let mut t = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let v = i * m + j;
                t.push((v, v, 4.0));
                if i > 0 {
                    t.push((v, v - m, -1.0));
                }
                if i + 1 < m {
                    t.push((v, v + m, -1.0));
                }
                if j > 0 {
                    t.push((v, v - 1, -1.0));
                }
                if j + 1 < m {
                    t.push((v, v + 1, -1.0));
                }
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn rcm_is_a_permutation_and_reduces_bandwidth() {
        let a = grid_laplacian(8);
        // scramble
        let scramble: Vec<usize> = (0..64usize).map(|i| (i * 37) % 64).collect();
        let s = a.permute_symmetric(&scramble);
        let p = rcm_ordering(&s).unwrap();
        let b = s.permute_symmetric(p.as_slice());
        assert!(b.bandwidths().0 <= 10, "{:?}", b.bandwidths());
        assert!(s.bandwidths().0 > b.bandwidths().0);
        let x: Vec<f64> = (0..64).map(|i| i as f64).collect();
        assert_eq!(p.scatter(&p.gather(&x)), x);
    }

    #[test]
    fn band_lu_matches_residual_with_pivoting() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n: usize = 60;
        let mut t = Vec::new();
        for i in 0..n {
            for j in i.saturating_sub(3)..(i + 3).min(n) {
                // weak diagonal forces row interchanges
                let v = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                let v = if i == j { v * 1e-3 } else { v };
                t.push((i, j, v));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
        let lu = BandLu::new(&a).unwrap();
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0, i as f64)).collect();
        let x = lu.solve(&b).unwrap();
        let r: Vec<Complex64> = a.matvec(&x).unwrap().iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) <= 1e-12 * norm2(&b));
    }

    #[test]
    fn band_lu_singular() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(BandLu::new(&a), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn band_cholesky_solves() {
        let a = grid_laplacian(6);
        let l = BandCholesky::new(&a).unwrap();
        let b: Vec<f64> = (0..36).map(|i| (i as f64).sin()).collect();
        let mut x = b.clone();
        l.forward(&mut x);
        l.backward(&mut x);
        let r: Vec<f64> = a.matvec(&x).unwrap().iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) <= 1e-12 * norm2(&b));
        let ld = DenseMatrix::from_fn(36, 36, |i, j| l.get(i, j));
        let llt = ld.matmul(&ld.transpose()).unwrap();
        let d = llt.combine(1.0, &a.to_dense(), -1.0).unwrap();
        assert!(d.max_abs() < 1e-13);
        assert_eq!(l.mul_lower(&x).len(), 36);
    }
}
