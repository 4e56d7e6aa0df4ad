//! Dense helpers, sparse storage and Krylov kernels used by the solvers.

mod arnoldi;
mod banded;
mod dense;
mod expm;
mod sparse;

pub use arnoldi::{shift_invert_eigs, ArnoldiStats, EigenPair, ShiftInvertOptions};
pub use banded::BandedLu;
pub use dense::{dagger, eig, eigh, max_abs_diff};
pub use expm::{expm, expmv, ExpmvStats};
pub use sparse::CsrMatrix;
