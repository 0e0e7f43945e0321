//! Compressed-row sparse operators for multi-atom Hilbert spaces.

use crate::algebra::{Operator, C64, ONE, ZERO};

/// Sparse square matrix in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut out = Self { dim, row_ptr, cols, vals };
        out.prune();
        out
    }

    pub fn from_dense(op: &Operator) -> Self {
        let n = op.dim();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = op[(i, j)];
                if v != ZERO {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect())
    }

    fn prune(&mut self) {
        if self.vals.iter().all(|v| *v != ZERO) {
            return;
        }
        let t: Vec<_> = self.triplets().filter(|t| t.2 != ZERO).collect();
        *self = Self::from_triplets(self.dim, t);
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    #[inline]
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn to_dense(&self) -> Operator {
        let mut m = Operator::zeros(self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn dagger(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &SparseOperator) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()).collect())
    }

    pub fn matmul(&self, other: &SparseOperator) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut t = Vec::new();
        for (r, k, a) in self.triplets() {
            for (c, b) in other.row(k) {
                t.push((r, c, a * b));
            }
        }
        Self::from_triplets(self.dim, t)
    }

    /// Maximum absolute row sum, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim).map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// `y += c · A · x` for row-major `x`, `y` of shape dim × ncols.
    #[inline]
    pub fn apply_add(&self, x: &[C64], ncols: usize, y: &mut [C64], c: C64) {
        debug_assert_eq!(x.len(), self.dim * ncols);
        debug_assert_eq!(y.len(), self.dim * ncols);
        for r in 0..self.dim {
            let dst = &mut y[r * ncols..(r + 1) * ncols];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let a = self.vals[k] * c;
                let src = &x[self.cols[k] * ncols..(self.cols[k] + 1) * ncols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
    }

    /// `y += c · A · x · A†` for row-major square `x`, `y`; `scratch` must
    /// hold dim² entries.
    pub fn sandwich_add(&self, x: &[C64], y: &mut [C64], c: C64, scratch: &mut [C64]) {
        let n = self.dim;
        scratch.iter_mut().for_each(|z| *z = ZERO);
        self.apply_add(x, n, scratch, ONE);
        // y[:, j] += c · Σ_l scratch[:, l] · conj(A[j, l])
        for j in 0..n {
            for k in self.row_ptr[j]..self.row_ptr[j + 1] {
                let l = self.cols[k];
                let a = self.vals[k].conj() * c;
                for i in 0..n {
                    y[i * n + j] += a * scratch[i * n + l];
                }
            }
        }
    }
}

/// Embeds a single-site operator at `site` of `n_sites` sites, each of
/// dimension `local_dim`; site 0 is the slowest-varying index.
pub fn embed_site(local: &Operator, site: usize, n_sites: usize, local_dim: usize) -> SparseOperator {
    assert_eq!(local.dim(), local_dim);
    assert!(site < n_sites);
    let dim = local_dim.pow(n_sites as u32);
    let stride = local_dim.pow((n_sites - 1 - site) as u32);
    let mut t = Vec::new();
    for idx in 0..dim {
        let level = (idx / stride) % local_dim;
        let base = idx - level * stride;
        for new_level in 0..local_dim {
            let v = local[(new_level, level)];
            if v != ZERO {
                t.push((base + new_level * stride, idx, v));
            }
        }
    }
    SparseOperator::from_triplets(dim, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::tensor_product;

    fn op(dim: usize, f: impl Fn(usize, usize) -> C64) -> Operator {
        let mut m = Operator::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    #[test]
    fn dense_round_trip_and_products() {
        let a = op(3, |i, j| C64::new((i + 2 * j) as f64 % 3.0, i as f64 - j as f64));
        let b = op(3, |i, j| C64::new(if i == j { 1.0 } else { 0.5 }, (i * j) as f64));
        let sa = SparseOperator::from_dense(&a);
        let sb = SparseOperator::from_dense(&b);
        assert_eq!(sa.to_dense(), a);
        assert!(sa.matmul(&sb).to_dense().max_abs_diff(&a.matmul(&b)) < 1e-14);
        assert!(sa.dagger().to_dense().max_abs_diff(&a.dagger()) < 1e-14);
    }

    #[test]
    fn apply_and_sandwich_match_dense() {
        let a = op(3, |i, j| C64::new((i * 3 + j) as f64 * 0.1, if i > j { 0.2 } else { -0.1 }));
        let x = op(3, |i, j| C64::new(1.0 / (1 + i + j) as f64, (i as f64 - j as f64) * 0.3));
        let sa = SparseOperator::from_dense(&a);
        let mut y = vec![ZERO; 9];
        sa.apply_add(x.as_slice(), 3, &mut y, ONE);
        assert!(Operator::from_vec(3, y).max_abs_diff(&a.matmul(&x)) < 1e-14);
        let mut y = vec![ZERO; 9];
        let mut scratch = vec![ZERO; 9];
        sa.sandwich_add(x.as_slice(), &mut y, C64::new(2.0, 0.0), &mut scratch);
        let expect = a.matmul(&x).matmul(&a.dagger()).scale_real(2.0);
        assert!(Operator::from_vec(3, y).max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn embedding_matches_kronecker_products() {
        let local = op(3, |i, j| C64::new(i as f64 + 1.0, j as f64));
        let id = Operator::identity(3);
        let e0 = embed_site(&local, 0, 2, 3).to_dense();
        let e1 = embed_site(&local, 1, 2, 3).to_dense();
        assert_eq!(e0, tensor_product(&local, &id));
        assert_eq!(e1, tensor_product(&id, &local));
        let mid = embed_site(&local, 1, 3, 3).to_dense();
        assert_eq!(mid, tensor_product(&tensor_product(&id, &local), &id));
    }
}
