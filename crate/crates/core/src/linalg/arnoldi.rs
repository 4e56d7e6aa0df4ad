use ndarray::{s, Array1, Array2};

use super::{eig, BandedLu, CsrMatrix};
use crate::error::{Error, Result};
use crate::hilbert::{C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftInvertOptions {
    pub n_eigenvalues: usize,
    pub krylov_dim: usize,
    pub shift: C64,
    /// Relative residual required of each wanted Ritz pair of the inverse.
    pub tol: f64,
    pub max_restarts: usize,
}

impl Default for ShiftInvertOptions {
    fn default() -> Self {
        Self { n_eigenvalues: 12, krylov_dim: 60, shift: C64::new(1e-3, 0.0), tol: 1e-12, max_restarts: 200 }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: C64,
    /// Unit 2-norm right eigenvector.
    pub vector: Array1<C64>,
    /// Residual `|A x - lambda x|`, evaluated explicitly.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArnoldiStats {
    pub restarts: usize,
    pub solves: usize,
    pub bandwidth: (usize, usize),
}

/// Eigenpairs of `a` closest to `opts.shift`, sorted by distance to the shift.
///
/// Runs thick-restarted Arnoldi on `(a - shift)^-1`, factored once with a
/// banded LU.
pub fn shift_invert_eigs(a: &CsrMatrix, opts: &ShiftInvertOptions) -> Result<(Vec<EigenPair>, ArnoldiStats)> {
    let n = a.nrows();
    let k = opts.n_eigenvalues.min(n);
    if k == 0 {
        return Ok((Vec::new(), ArnoldiStats::default()));
    }
    let m = opts.krylov_dim.max(2 * k + 2).min(n);
    let lu = BandedLu::factor(a, opts.shift)?;
    let mut stats = ArnoldiStats { bandwidth: lu.bandwidths(), ..Default::default() };

    let mut basis = Array2::<C64>::zeros((m + 1, n));
    let mut hmat = Array2::<C64>::zeros((m + 1, m));
    let start: Array1<C64> = (0..n).map(|i| C64::new(1.0 + 0.25 * ((i as f64) * 0.7).sin(), 0.1 * ((i as f64) * 1.3).cos())).collect();
    basis.row_mut(0).assign(&start.mapv(|z| z / l2(&start)));
    let mut j0 = 0;

    loop {
        let mut m_eff = m;
        for j in j0..m {
            let mut w = lu.solve(&basis.row(j).to_owned());
            stats.solves += 1;
            for _ in 0..2 {
                for i in 0..=j {
                    let c: C64 = basis.row(i).iter().zip(w.iter()).map(|(b, x)| b.conj() * x).sum();
                    hmat[[i, j]] += c;
                    w.zip_mut_with(&basis.row(i), |x, b| *x -= c * b);
                }
            }
            let h = l2(&w);
            hmat[[j + 1, j]] = C64::new(h, 0.0);
            if h <= 1e-14 * hmat.column(j).iter().map(|z| z.norm()).fold(0.0, f64::max) {
                m_eff = j + 1;
                break;
            }
            basis.row_mut(j + 1).assign(&w.mapv(|z| z / h));
        }

        let hm = hmat.slice(s![..m_eff, ..m_eff]).to_owned();
        let (theta, y) = eig(&hm)?;
        let mut order: Vec<usize> = (0..m_eff).collect();
        order.sort_by(|&p, &q| theta[q].norm().total_cmp(&theta[p].norm()));
        let beta = hmat[[m_eff, m_eff - 1]].norm();
        let invariant = m_eff < m || m_eff == n;
        let converged = order.iter().take(k).all(|&i| {
            let ynorm = l2(&y.column(i).to_owned());
            invariant || beta * y[[m_eff - 1, i]].norm() / ynorm <= opts.tol * theta[i].norm()
        });

        if converged || stats.restarts >= opts.max_restarts {
            if !converged {
                return Err(Error::Solver(format!(
                    "shift-invert Arnoldi: {} restarts without convergence (n = {n}, k = {k})",
                    stats.restarts
                )));
            }
            let v = basis.slice(s![..m_eff, ..]);
            let mut pairs = Vec::with_capacity(k);
            for &i in order.iter().take(k) {
                let mut x = Array1::from_elem(n, ZERO);
                for l in 0..m_eff {
                    let c = y[[l, i]];
                    x.zip_mut_with(&v.row(l), |a, b| *a += c * b);
                }
                let nx = l2(&x);
                x.mapv_inplace(|z| z / nx);
                let value = opts.shift + C64::new(1.0, 0.0) / theta[i];
                let ax = a.matvec(&x);
                let residual = l2(&(&ax - &x.mapv(|z| z * value)));
                pairs.push(EigenPair { value, vector: x, residual });
            }
            return Ok((pairs, stats));
        }

        // thick restart on an orthonormal basis of the wanted Ritz vectors
        stats.restarts += 1;
        let keep = (k + (m_eff - k) / 2).min(m_eff - 1);
        let mut q = Array2::<C64>::zeros((m_eff, keep));
        for (c, &i) in order.iter().take(keep).enumerate() {
            let mut col = y.column(i).to_owned();
            for _ in 0..2 {
                for p in 0..c {
                    let dot: C64 = q.column(p).iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
                    col.zip_mut_with(&q.column(p), |x, a| *x -= dot * a);
                }
            }
            let nc = l2(&col);
            q.column_mut(c).assign(&col.mapv(|z| z / nc));
        }
        let qh = q.t().mapv(|z| z.conj());
        let reduced = qh.dot(&hm).dot(&q);
        let last_row = q.row(m_eff - 1).mapv(|z| z * beta);
        let new_rows = q.t().dot(&basis.slice(s![..m_eff, ..]));
        let residual_vec = basis.row(m_eff).to_owned();

        basis.fill(ZERO);
        basis.slice_mut(s![..keep, ..]).assign(&new_rows);
        basis.row_mut(keep).assign(&residual_vec);
        hmat.fill(ZERO);
        hmat.slice_mut(s![..keep, ..keep]).assign(&reduced);
        hmat.slice_mut(s![keep, ..keep]).assign(&last_row);
        j0 = keep;
    }
}

fn l2(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
