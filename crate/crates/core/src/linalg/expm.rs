use ndarray::{s, Array1, Array2, Axis, ShapeBuilder};
use ndarray_linalg::{FactorizeInto, Solve};

use super::CsrMatrix;
use crate::error::{Error, Result};
use crate::hilbert::{C64, ZERO};

const PADE_DEGREE: usize = 6;

/// Dense matrix exponential by scaling and squaring of the diagonal Padé
/// approximant of degree 6.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape(format!("expm of a {}x{} matrix", n, a.ncols())));
    }
    let norm = a.rows().into_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm.log2().floor() as i32 + 2).max(0) as u32 } else { 0 };
    let scale = 0.5f64.powi(squarings as i32);
    let h = a.mapv(|z| z * scale);
    let h2 = h.dot(&h);

    let p = PADE_DEGREE;
    let mut c = vec![1.0f64; p + 1];
    for k in 1..=p {
        c[k] = c[k - 1] * (p + 1 - k) as f64 / (k * (2 * p + 1 - k)) as f64;
    }
    let eye = Array2::<C64>::eye(n);
    // even powers go to `u`, odd powers (divided by h) to `v`
    let mut u = eye.mapv(|z| z * c[0]);
    let mut v = eye.mapv(|z| z * c[1]);
    let mut pow = eye.clone();
    for k in 1..=p / 2 {
        pow = pow.dot(&h2);
        u = u + pow.mapv(|z| z * c[2 * k]);
        if 2 * k + 1 <= p {
            v = v + pow.mapv(|z| z * c[2 * k + 1]);
        }
    }
    let odd = h.dot(&v);
    let num = &u + &odd;
    let den = &u - &odd;
    let mut r = solve_dense(&den, &num)?;
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    Ok(r)
}

/// `A^{-1} B` for small dense systems.
fn solve_dense(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    let mut fa = Array2::zeros(a.dim().f());
    fa.assign(a);
    let lu = fa.factorize_into()?;
    let mut x = Array2::zeros(b.dim());
    for (j, col) in b.axis_iter(Axis(1)).enumerate() {
        let sol = lu.solve(&col.to_owned())?;
        x.column_mut(j).assign(&sol);
    }
    Ok(x)
}

/// Diagnostics of a Krylov exponential action.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExpmvStats {
    pub steps: usize,
    pub rejections: usize,
    pub matvecs: usize,
    /// Accumulated local error estimate.
    pub error_estimate: f64,
}

/// `exp(t A) v` by restarted Krylov projection with local error control,
/// following the Expokit `zexpv` strategy.
pub fn expmv(a: &CsrMatrix, t: f64, v: &Array1<C64>, tol: f64, krylov_dim: usize) -> Result<(Array1<C64>, ExpmvStats)> {
    let n = a.nrows();
    if a.ncols() != n || v.len() != n {
        return Err(Error::Shape(format!("expmv: operator {}x{}, vector {}", n, a.ncols(), v.len())));
    }
    let mut stats = ExpmvStats::default();
    let beta0 = l2(v);
    if t == 0.0 || beta0 == 0.0 {
        return Ok((v.clone(), stats));
    }
    let m = krylov_dim.min(n).max(1);
    let anorm = a.norm_inf().max(f64::MIN_POSITIVE);
    let btol = 1e-7;
    let gamma = 0.9;
    let delta = 1.2;
    let max_reject = 50;
    let rndoff = anorm * f64::EPSILON;
    let t_out = t.abs();
    let sgn = t.signum();
    let mut w = v.clone();
    let mut beta = beta0;

    let round = |x: f64| {
        let s = 10f64.powf(x.log10().floor() - 1.0);
        (x / s).ceil() * s
    };
    let mf = m as f64;
    let fact = ((mf + 1.0) / std::f64::consts::E).powf(mf + 1.0) * (2.0 * std::f64::consts::PI * (mf + 1.0)).sqrt();
    let mut t_new = round((1.0 / anorm) * ((fact * tol) / (4.0 * beta * anorm)).powf(1.0 / mf));
    let mut t_now = 0.0;
    let mut basis = Array2::<C64>::zeros((m + 1, n));
    let mut p = Array1::<C64>::zeros(n);

    while t_now < t_out {
        stats.steps += 1;
        let mut t_step = (t_out - t_now).min(t_new);
        let mut hmat = Array2::<C64>::zeros((m + 2, m + 2));
        basis.row_mut(0).assign(&w.mapv(|z| z / beta));
        let mut mb = m;
        let mut k1 = 2;
        for j in 0..m {
            a.matvec_into(basis.row(j), p.view_mut());
            stats.matvecs += 1;
            for i in 0..=j {
                let hij: C64 = basis.row(i).iter().zip(p.iter()).map(|(b, x)| b.conj() * x).sum();
                hmat[[i, j]] = hij;
                p.zip_mut_with(&basis.row(i), |x, b| *x -= hij * b);
            }
            let s = l2(&p);
            if s < btol {
                k1 = 0;
                mb = j + 1;
                t_step = t_out - t_now;
                break;
            }
            hmat[[j + 1, j]] = C64::new(s, 0.0);
            basis.row_mut(j + 1).assign(&p.mapv(|z| z / s));
        }
        let mut avnorm = 0.0;
        if k1 != 0 {
            hmat[[m + 1, m]] = C64::new(1.0, 0.0);
            a.matvec_into(basis.row(m), p.view_mut());
            stats.matvecs += 1;
            avnorm = l2(&p);
        }

        let mut rejections = 0;
        let (f, err_loc, xm) = loop {
            let mx = mb + k1;
            let sub = hmat.slice(s![..mx, ..mx]).mapv(|z| z * (sgn * t_step));
            let f = expm(&sub)?;
            if k1 == 0 {
                break (f, btol, 1.0 / mf);
            }
            let phi1 = (beta * f[[m, 0]]).norm();
            let phi2 = (beta * f[[m + 1, 0]] * avnorm).norm();
            let (err, xm) = if phi1 > 10.0 * phi2 {
                (phi2, 1.0 / mf)
            } else if phi1 > phi2 {
                (phi1 * phi2 / (phi1 - phi2), 1.0 / mf)
            } else {
                (phi1, 1.0 / (mf - 1.0).max(1.0))
            };
            if err <= delta * t_step * tol {
                break (f, err, xm);
            }
            if rejections == max_reject {
                return Err(Error::Solver(format!(
                    "Krylov exponential: step rejected {max_reject} times at t = {t_now}"
                )));
            }
            t_step = round(gamma * t_step * (t_step * tol / err).powf(xm));
            rejections += 1;
            stats.rejections += 1;
        };

        let mx = mb + k1.max(1) - 1;
        w.fill(ZERO);
        for i in 0..mx {
            let c = beta * f[[i, 0]];
            w.zip_mut_with(&basis.row(i), |x, b| *x += c * b);
        }
        beta = l2(&w);
        t_now += t_step;
        if beta == 0.0 {
            break;
        }
        t_new = round(gamma * t_step * (t_step * tol / err_loc.max(f64::MIN_POSITIVE)).powf(xm));
        stats.error_estimate += err_loc.max(rndoff);
    }
    Ok((w, stats))
}

fn l2(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use ndarray::arr2;

    #[test]
    fn expm_of_rotation_generator() {
        let th = 2.7;
        let a = arr2(&[[ZERO, C64::new(-th, 0.0)], [C64::new(th, 0.0), ZERO]]);
        let e = expm(&a).unwrap();
        let want = arr2(&[
            [C64::new(th.cos(), 0.0), C64::new(-th.sin(), 0.0)],
            [C64::new(th.sin(), 0.0), C64::new(th.cos(), 0.0)],
        ]);
        assert!(max_abs_diff(&e, &want) < 1e-13);
    }

    #[test]
    fn expm_of_jordan_block() {
        let lam = C64::new(-0.3, 1.1);
        let a = arr2(&[[lam, C64::new(1.0, 0.0)], [ZERO, lam]]);
        let e = expm(&a).unwrap();
        let el = lam.exp();
        let want = arr2(&[[el, el], [ZERO, el]]);
        assert!(max_abs_diff(&e, &want) < 1e-13);
    }

    #[test]
    fn expmv_matches_diagonal_closed_form() {
        let n = 200;
        let d: Vec<C64> = (0..n).map(|k| C64::new(-(k as f64) * 0.05, k as f64 * 0.3)).collect();
        let t: Vec<_> = (0..n).map(|k| (k, k, d[k])).collect();
        let a = CsrMatrix::from_triplets(n, n, t).unwrap();
        let v: Array1<C64> = (0..n).map(|k| C64::new(1.0 / (1.0 + k as f64), 0.0)).collect();
        let (w, stats) = expmv(&a, 3.0, &v, 1e-10, 30).unwrap();
        let err = (0..n).map(|k| (w[k] - (d[k] * 3.0).exp() * v[k]).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "err={err} stats={stats:?}");
    }

    #[test]
    fn expmv_matches_dense_expm() {
        let n = 12;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, C64::new(-0.1 * i as f64, 0.0)));
            if i + 1 < n {
                t.push((i, i + 1, C64::new(0.0, 0.7)));
                t.push((i + 1, i, C64::new(0.0, 0.7)));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, t).unwrap();
        let v: Array1<C64> = (0..n).map(|k| C64::new(if k == 0 { 1.0 } else { 0.0 }, 0.0)).collect();
        let dense = expm(&a.to_dense().mapv(|z| z * 4.0)).unwrap().dot(&v);
        let (w, _) = expmv(&a, 4.0, &v, 1e-12, 8).unwrap();
        let err = (&w - &dense).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(err < 1e-9, "err={err}");
    }
}
