use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eig, Eigh, UPLO};

use crate::error::Result;
use crate::hilbert::C64;

fn fortran_copy(m: &Array2<C64>) -> Array2<C64> {
    let mut f = Array2::zeros(m.dim().f());
    f.assign(m);
    f
}

/// Eigen-decomposition of a Hermitian matrix; eigenvectors are the columns.
///
/// LAPACK sees a row-major complex matrix as its conjugate, so the input is
/// copied to column-major layout first.
pub fn eigh(m: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    Ok(fortran_copy(m).eigh(UPLO::Lower)?)
}

/// Right eigenpairs of a general complex matrix.
pub fn eig(m: &Array2<C64>) -> Result<(Array1<C64>, Array2<C64>)> {
    Ok(fortran_copy(m).eig()?)
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn eigh_reconstructs_complex_hermitian() {
        let a = arr2(&[[C64::new(1.0, 0.0), C64::new(0.0, 0.5)], [C64::new(0.0, -0.5), C64::new(2.0, 0.0)]]);
        let (w, v) = eigh(&a).unwrap();
        let d = Array2::from_diag(&w.mapv(|x| C64::new(x, 0.0)));
        assert!(max_abs_diff(&a.dot(&v), &v.dot(&d)) < 1e-14);
    }

    #[test]
    fn eig_right_vectors() {
        let a = arr2(&[[C64::new(0.0, 0.0), C64::new(1.0, 1.0)], [C64::new(-2.0, 0.0), C64::new(0.5, -1.0)]]);
        let (w, v) = eig(&a).unwrap();
        let d = Array2::from_diag(&w);
        assert!(max_abs_diff(&a.dot(&v), &v.dot(&d)) < 1e-13);
    }
}
