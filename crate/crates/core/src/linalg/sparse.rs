use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1};

use crate::error::{Error, Result};
use crate::hilbert::{C64, ZERO};

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl CsrMatrix {
    /// Assembles from `(row, col, value)` triplets, summing duplicates.
    /// Entries that sum to exactly zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut t: Vec<(usize, usize, C64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = t.iter().find(|(r, c, _)| *r >= nrows || *c >= ncols) {
            return Err(Error::Shape(format!("entry ({r}, {c}) outside {nrows}x{ncols}")));
        }
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<C64> = Vec::with_capacity(t.len());
        let mut rows = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            if let (Some(&lr), Some(&lc)) = (rows.last(), indices.last()) {
                if lr == r && lc == c {
                    *data.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            indices.push(c);
            data.push(v);
        }
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_idx = Vec::with_capacity(rows.len());
        let mut keep_data = Vec::with_capacity(rows.len());
        for ((r, c), v) in rows.into_iter().zip(indices).zip(data) {
            if v != ZERO {
                keep_rows.push(r);
                keep_idx.push(c);
                keep_data.push(v);
            }
        }
        for &r in &keep_rows {
            indptr[r + 1] += 1;
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Ok(Self { nrows, ncols, indptr, indices: keep_idx, data: keep_data })
    }

    pub fn from_dense(m: &Array2<C64>) -> Self {
        let (r, c) = m.dim();
        let t = m
            .indexed_iter()
            .filter(|(_, v)| **v != ZERO)
            .map(|((i, j), v)| (i, j, *v))
            .collect();
        Self::from_triplets(r, c, t).expect("indices in range")
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Iterates `(col, value)` over row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[a..b].iter().copied().zip(self.data[a..b].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        match self.indices[a..b].binary_search(&j) {
            Ok(k) => self.data[a + k],
            Err(_) => ZERO,
        }
    }

    pub fn matvec(&self, x: &Array1<C64>) -> Array1<C64> {
        let mut y = Array1::from_elem(self.nrows, ZERO);
        self.matvec_into(x.view(), y.view_mut());
        y
    }

    pub fn matvec_into(&self, x: ArrayView1<C64>, mut y: ArrayViewMut1<C64>) {
        assert_eq!(x.len(), self.ncols, "matvec dimension");
        assert_eq!(y.len(), self.nrows, "matvec dimension");
        for i in 0..self.nrows {
            let mut acc = ZERO;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            y[i] = acc;
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + other`
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::Shape(format!(
                "{}x{} plus {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let t = self.triplets().chain(other.triplets()).collect();
        Self::from_triplets(self.nrows, self.ncols, t)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.nrows, other.ncols);
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (i1, j1, v1) in self.triplets() {
            for (i2, j2, v2) in other.triplets() {
                t.push((i1 * r2 + i2, j1 * c2 + j2, v1 * v2));
            }
        }
        Self::from_triplets(self.nrows * r2, self.ncols * c2, t).expect("indices in range")
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, t).expect("indices in range")
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    /// Restriction to the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_pos = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_pos[c] = k;
        }
        let mut t = Vec::new();
        for (ri, &r) in rows.iter().enumerate() {
            for (c, v) in self.row(r) {
                let cj = col_pos[c];
                if cj != usize::MAX {
                    t.push((ri, cj, v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), t).expect("indices in range")
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut m = Array2::from_elem((self.nrows, self.ncols), ZERO);
        for (i, j, v) in self.triplets() {
            m[[i, j]] = v;
        }
        m
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `(lower, upper)` bandwidths of a square matrix.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (i, j, _) in self.triplets() {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        (kl, ku)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use ndarray::arr2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 1, c(1.0)), (0, 1, c(2.0)), (1, 0, c(1.0)), (1, 0, c(-1.0))]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), c(3.0));
        assert_eq!(m.get(1, 0), ZERO);
        assert!(CsrMatrix::from_triplets(2, 2, vec![(2, 0, c(1.0))]).is_err());
    }

    #[test]
    fn kron_matches_dense() {
        let a = arr2(&[[c(1.0), C64::new(0.0, 2.0)], [ZERO, c(-1.0)]]);
        let b = arr2(&[[c(0.5), ZERO, c(1.0)], [ZERO, c(3.0), ZERO], [C64::new(1.0, 1.0), ZERO, ZERO]]);
        let k = CsrMatrix::from_dense(&a).kron(&CsrMatrix::from_dense(&b));
        assert!(max_abs_diff(&k.to_dense(), &crate::hilbert::kron(&a, &b)) == 0.0);
    }

    #[test]
    fn matvec_submatrix_and_bandwidth() {
        let a = arr2(&[[c(1.0), c(2.0), ZERO], [ZERO, c(3.0), c(4.0)], [c(5.0), ZERO, c(6.0)]]);
        let m = CsrMatrix::from_dense(&a);
        let x = Array1::from(vec![c(1.0), c(1.0), c(1.0)]);
        assert_eq!(m.matvec(&x), Array1::from(vec![c(3.0), c(7.0), c(11.0)]));
        let s = m.submatrix(&[0, 2], &[0, 2]);
        assert_eq!(s.to_dense(), arr2(&[[c(1.0), ZERO], [c(5.0), c(6.0)]]));
        assert_eq!(m.bandwidths(), (2, 1));
        assert_eq!(m.transpose().bandwidths(), (1, 2));
        assert_eq!(m.norm_inf(), 11.0);
    }
}
