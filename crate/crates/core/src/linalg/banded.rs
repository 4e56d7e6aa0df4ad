use ndarray::Array1;

use super::CsrMatrix;
use crate::error::{Error, Result};
use crate::hilbert::{C64, ZERO};

/// LU factorization of a banded matrix with partial pivoting.
///
/// Storage follows the LAPACK `gbtrf` band layout: column `j` holds rows
/// `j - kl - ku ..= j + kl`, leaving room for the fill-in that row swaps
/// introduce above the diagonal.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<C64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    /// Factors `a - shift * I`.
    pub fn factor(a: &CsrMatrix, shift: C64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Shape(format!("banded LU of a {}x{} matrix", n, a.ncols())));
        }
        let (kl, ku) = a.bandwidths();
        let ldab = 2 * kl + ku + 1;
        let mut lu = Self { n, kl, ku, ldab, ab: vec![ZERO; ldab * n], ipiv: vec![0; n] };
        for (i, j, v) in a.triplets() {
            *lu.at(i, j) += v;
        }
        for i in 0..n {
            *lu.at(i, i) -= shift;
        }
        lu.eliminate()?;
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.kl + self.ku >= j && i <= j + self.kl);
        self.kl + self.ku + i - j + j * self.ldab
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut C64 {
        let p = self.pos(i, j);
        &mut self.ab[p]
    }

    fn eliminate(&mut self) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let imax = (k + kl).min(n - 1);
            let jmax = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = self.ab[self.pos(k, k)].norm();
            for i in k + 1..=imax {
                let v = self.ab[self.pos(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            self.ipiv[k] = p;
            if best == 0.0 {
                return Err(Error::Solver(format!("banded LU: exactly singular pivot at column {k}")));
            }
            if p != k {
                for j in k..=jmax {
                    let (a, b) = (self.pos(k, j), self.pos(p, j));
                    self.ab.swap(a, b);
                }
            }
            if imax == k {
                continue;
            }
            let pivot = self.ab[self.pos(k, k)];
            let col = self.pos(k + 1, k);
            for off in 0..imax - k {
                self.ab[col + off] /= pivot;
            }
            for j in k + 1..=jmax {
                let akj = self.ab[self.pos(k, j)];
                if akj == ZERO {
                    continue;
                }
                let dst = self.pos(k + 1, j);
                for off in 0..imax - k {
                    let l = self.ab[col + off];
                    self.ab[dst + off] -= l * akj;
                }
            }
        }
        Ok(())
    }

    /// Solves `(a - shift I) x = b` in place.
    pub fn solve_in_place(&self, b: &mut Array1<C64>) {
        assert_eq!(b.len(), self.n, "rhs dimension");
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.ipiv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != ZERO {
                for i in k + 1..=(k + kl).min(n - 1) {
                    b[i] -= self.ab[self.pos(i, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                acc -= self.ab[self.pos(k, j)] * b[j];
            }
            b[k] = acc / self.ab[self.pos(k, k)];
        }
    }

    pub fn solve(&self, b: &Array1<C64>) -> Array1<C64> {
        let mut x = b.clone();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_random_banded_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(n, kl, ku) in &[(1usize, 0usize, 0usize), (7, 1, 2), (40, 5, 3), (60, 0, 4), (33, 6, 0)] {
            let mut t = Vec::new();
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    // a small diagonal forces pivoting; without subdiagonals it must dominate instead
                    let v = match (i == j, kl == 0) {
                        (true, false) => z * 1e-3,
                        (true, true) => z + 4.0,
                        _ => z,
                    };
                    t.push((i, j, v));
                }
            }
            let a = CsrMatrix::from_triplets(n, n, t).unwrap();
            let shift = C64::new(0.01, -0.02);
            let lu = BandedLu::factor(&a, shift).unwrap();
            let x: Array1<C64> = (0..n).map(|k| C64::new(k as f64, 1.0)).collect();
            let shifted = &a.to_dense() - &Array2::<C64>::eye(n).mapv(|z| z * shift);
            let b = shifted.dot(&x);
            let got = lu.solve(&b);
            // backward error: pivoting keeps it small even where the system is ill-conditioned
            let scale = b.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let err = (&shifted.dot(&got) - &b).iter().fold(0.0f64, |m, z| m.max(z.norm())) / scale;
            assert!(err < 1e-10, "n={n} kl={kl} ku={ku} err={err}");
        }
    }

    #[test]
    fn singular_matrix_reports_error() {
        let a = CsrMatrix::from_triplets(3, 3, vec![(0, 0, C64::new(1.0, 0.0))]).unwrap();
        assert!(matches!(BandedLu::factor(&a, ZERO), Err(Error::Solver(_))));
    }
}
