use ndarray::{Array1, Array2};
use ndarray_linalg::{EigValsh, SVD, UPLO};

use super::{hermiticity_defect, OperatorMatrix, StateVector, C64, ZERO};
use crate::error::{Error, Result};
use crate::linalg;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Eigenvalues below this are treated as zero before taking square roots.
const FIDELITY_CLIP: f64 = 1e-12;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: Array2<C64>,
}

impl DensityMatrix {
    /// Validates all three invariants.
    pub fn new(entries: Array2<C64>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c || r == 0 {
            return Err(Error::Shape(format!("density matrix of shape {r}x{c}")));
        }
        let herm = hermiticity_defect(&entries);
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian: defect {herm:e}")));
        }
        let tr = entries.diag().sum();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_eig = min_eigenvalue(&entries)?;
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { entries })
    }

    /// Symmetrizes `(m + m^dag)/2` and rescales to unit trace before
    /// validating. Returns the state together with the Hermiticity defect and
    /// trace deviation that were removed.
    pub fn repaired(entries: Array2<C64>) -> Result<(Self, Repair)> {
        let hermiticity_defect = hermiticity_defect(&entries);
        let mut m = &entries + &entries.t().mapv(|z| z.conj());
        m.mapv_inplace(|z| z * 0.5);
        let tr = m.diag().iter().map(|z| z.re).sum::<f64>();
        if !(tr.abs() > 0.0) || !tr.is_finite() {
            return Err(Error::InvalidState(format!("cannot renormalize trace {tr}")));
        }
        m.mapv_inplace(|z| z / tr);
        Ok((Self::new(m)?, Repair { hermiticity_defect, trace_deviation: tr - 1.0 }))
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let v = psi.amplitudes();
        let d = v.len();
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[[i, j]] = v[i] * v[j].conj();
            }
        }
        Self { entries: m }
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(d: usize) -> Self {
        Self { entries: Array2::eye(d).mapv(|z: C64| z / d as f64) }
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(&self.entries)
    }

    /// Diagonal in the working basis (Fock populations for the oscillator).
    pub fn populations(&self) -> Vec<f64> {
        self.entries.diag().iter().map(|z| z.re).collect()
    }
}

/// Corrections applied by [`DensityMatrix::repaired`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Repair {
    pub hermiticity_defect: f64,
    pub trace_deviation: f64,
}

fn min_eigenvalue(m: &Array2<C64>) -> Result<f64> {
    let w = m.eigvalsh(UPLO::Lower)?;
    Ok(w.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Column-stacking vectorization: `(i, j) -> j * d + i`.
pub fn vectorize(m: &Array2<C64>) -> Array1<C64> {
    let (r, c) = m.dim();
    let mut v = Array1::from_elem(r * c, ZERO);
    for j in 0..c {
        for i in 0..r {
            v[j * r + i] = m[[i, j]];
        }
    }
    v
}

/// Inverse of [`vectorize`] for square matrices.
pub fn devectorize(v: &Array1<C64>) -> Result<Array2<C64>> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() || d == 0 {
        return Err(Error::Shape(format!("vector length {} is not a perfect square", v.len())));
    }
    let mut m = Array2::zeros((d, d));
    for j in 0..d {
        for i in 0..d {
            m[[i, j]] = v[j * d + i];
        }
    }
    Ok(m)
}

/// `Tr[op rho]`
pub fn expectation(op: &OperatorMatrix, rho: &DensityMatrix) -> Result<C64> {
    let d = rho.dim();
    if op.dim() != d {
        return Err(Error::Shape(format!("operator dimension {} vs state {d}", op.dim())));
    }
    let o = op.entries();
    let r = rho.entries();
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += o[[i, j]] * r[[j, i]];
        }
    }
    Ok(acc)
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2`.
///
/// Both square roots come from Hermitian eigendecompositions with
/// eigenvalues below `1e-12` set to zero.
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    fidelity_matrices(rho1.entries(), rho2.entries())
}

/// Fidelity on raw matrices; rejects inputs that are not Hermitian.
pub fn fidelity_matrices(rho1: &Array2<C64>, rho2: &Array2<C64>) -> Result<f64> {
    if rho1.dim() != rho2.dim() || rho1.nrows() != rho1.ncols() {
        return Err(Error::Shape(format!("{:?} vs {:?}", rho1.dim(), rho2.dim())));
    }
    for (name, m) in [("first", rho1), ("second", rho2)] {
        let defect = hermiticity_defect(m);
        if defect > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "{name} argument is not Hermitian: defect {defect:e}"
            )));
        }
    }
    // Tr sqrt(sqrt(r1) r2 sqrt(r1)) is the trace norm of sqrt(r1) sqrt(r2)
    let m = psd_sqrt(rho1)?.dot(&psd_sqrt(rho2)?);
    let (_, sv, _) = m.svd(false, false)?;
    let root_sum: f64 = sv.sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

fn psd_sqrt(m: &Array2<C64>) -> Result<Array2<C64>> {
    let (w, v) = linalg::eigh(m)?;
    let d = m.nrows();
    let mut scaled = v.clone();
    for k in 0..d {
        let s = if w[k] < FIDELITY_CLIP { 0.0 } else { w[k].sqrt() };
        scaled.column_mut(k).mapv_inplace(|z| z * s);
    }
    let vh = v.t().mapv(|z| z.conj());
    Ok(scaled.dot(&vh))
}
