use super::Superoperator;
use crate::error::{Error, Result};
use crate::hilbert::{devectorize, hermiticity_defect, vectorize, DensityMatrix};
use crate::linalg::{expmv, ExpmvStats};

pub const EXPMV_TOL: f64 = 1e-10;
const KRYLOV_DIM: usize = 30;

/// Corrections applied after propagation, plus solver counters.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvolveDiagnostics {
    /// `max |rho - rho^dag|` of the raw propagated matrix.
    pub hermiticity_defect: f64,
    /// `Tr(rho) - 1` of the raw propagated matrix.
    pub trace_deviation: f64,
    pub krylov: ExpmvStats,
}

/// `exp(t L) rho0`, re-Hermitized and renormalized.
pub fn evolve(rho0: &DensityMatrix, superop: &Superoperator, t: f64) -> Result<DensityMatrix> {
    evolve_with_diagnostics(rho0, superop, t).map(|(rho, _)| rho)
}

pub fn evolve_with_diagnostics(
    rho0: &DensityMatrix,
    superop: &Superoperator,
    t: f64,
) -> Result<(DensityMatrix, EvolveDiagnostics)> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param("t", format!("evolution time must be finite and non-negative, got {t}")));
    }
    if rho0.dim() != superop.dim() {
        return Err(Error::Shape(format!(
            "state of dimension {} for a superoperator on dimension {}",
            rho0.dim(),
            superop.dim()
        )));
    }
    if t == 0.0 {
        return Ok((rho0.clone(), EvolveDiagnostics::default()));
    }
    let (v, krylov) = expmv(superop.matrix(), t, &vectorize(rho0.entries()), EXPMV_TOL, KRYLOV_DIM)?;
    let raw = devectorize(&v)?;
    let herm = hermiticity_defect(&raw);
    let (rho, repair) = DensityMatrix::repaired(raw)?;
    let diag = EvolveDiagnostics { hermiticity_defect: herm, trace_deviation: repair.trace_deviation, krylov };
    log::debug!(
        "evolve t = {t}: hermiticity {:e}, trace {:e}, {} Krylov steps",
        diag.hermiticity_defect,
        diag.trace_deviation,
        krylov.steps
    );
    Ok((rho, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, fidelity, FockSpace, C64};
    use crate::liouvillian::{build_effective, EffectiveParams};

    #[test]
    fn zero_time_is_identity_and_negative_time_fails() {
        let p = EffectiveParams::new(0.8, 4.0, 16).unwrap();
        let l = build_effective(&p).unwrap();
        let rho = coherent_state(C64::new(0.5, 0.2), FockSpace::new(16).unwrap()).unwrap().to_density();
        assert_eq!(evolve(&rho, &l, 0.0).unwrap(), rho);
        assert!(evolve(&rho, &l, -1.0).is_err());
    }

    #[test]
    fn dense_exponential_oracle() {
        let p = EffectiveParams::new(1.1, 4.0, 18).unwrap();
        let l = build_effective(&p).unwrap();
        let rho = coherent_state(C64::new(0.7, -0.4), FockSpace::new(18).unwrap()).unwrap().to_density();
        let (got, diag) = evolve_with_diagnostics(&rho, &l, 2.5).unwrap();
        let prop = crate::linalg::expm(&l.matrix().to_dense().mapv(|z| z * 2.5)).unwrap();
        let want = devectorize(&prop.dot(&vectorize(rho.entries()))).unwrap();
        assert!(crate::linalg::max_abs_diff(got.entries(), &want) < 1e-8);
        assert!(diag.hermiticity_defect < 1e-8);
        assert!(diag.trace_deviation.abs() < 1e-8);
        assert!(fidelity(&got, &DensityMatrix::new(want).unwrap()).unwrap() > 1.0 - 1e-8);
    }
}
