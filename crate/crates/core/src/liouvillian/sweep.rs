use super::{build_effective, parity_blocks, spectrum, steady_state, truncation_rule, EffectiveParams, Sector, SpectrumOptions};
use crate::error::{Error, Result};
use crate::hilbert::{expectation, number_op, FockSpace};

/// One parameter point of a gap or photon-number sweep. Fields a sweep does
/// not compute are `None`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub g: f64,
    pub zeta: f64,
    pub fock_dim: usize,
    pub gap: Option<f64>,
    pub degeneracy: Option<usize>,
    pub photon_ratio: Option<f64>,
}

fn photon_ratio(rho: &crate::hilbert::DensityMatrix, fock_dim: usize, zeta: f64) -> Result<f64> {
    let n = expectation(&number_op(FockSpace::new(fock_dim)?), rho)?;
    Ok(n.re / zeta)
}

/// Full spectral analysis at one `(g, zeta)`.
pub fn sweep_point(g: f64, zeta: f64, fock_dim: usize, opts: &SpectrumOptions) -> Result<SweepRow> {
    let l = parity_blocks(build_effective(&EffectiveParams::new(g, zeta, fock_dim)?)?)?;
    let s = spectrum(&l, opts)?;
    let ee = s
        .steady_state(Sector::EE)
        .and_then(|st| st.density.as_ref())
        .ok_or_else(|| Error::Solver("no ee steady state".into()))?;
    Ok(SweepRow {
        g,
        zeta,
        fock_dim,
        gap: Some(s.gap),
        degeneracy: Some(s.degeneracy),
        photon_ratio: Some(photon_ratio(ee, fock_dim, zeta)?),
    })
}

/// Photon ratio `<a^dag a> / zeta` of the ee steady state at one point.
pub fn photon_point(g: f64, zeta: f64, fock_dim: usize, opts: &SpectrumOptions) -> Result<SweepRow> {
    let l = build_effective(&EffectiveParams::new(g, zeta, fock_dim)?)?;
    let st = steady_state(&l, Sector::EE, opts)?;
    let rho = st.density.ok_or_else(|| Error::Solver("no ee steady state".into()))?;
    Ok(SweepRow { g, zeta, fock_dim, gap: None, degeneracy: None, photon_ratio: Some(photon_ratio(&rho, fock_dim, zeta)?) })
}

fn grid(gs: &[f64], zetas: &[f64], fock_dim: Option<usize>) -> Vec<(f64, f64, usize)> {
    let g_max = gs.iter().cloned().fold(0.0, f64::max);
    zetas
        .iter()
        .flat_map(|&z| {
            let n = fock_dim.unwrap_or_else(|| truncation_rule(z, g_max));
            gs.iter().map(move |&g| (g, z, n))
        })
        .collect()
}

/// Gap, degeneracy and photon ratio over the grid, ordered by `zeta` then
/// `g`. Without an explicit truncation each `zeta` uses the default rule at
/// the largest `g`.
pub fn gap_sweep(gs: &[f64], zetas: &[f64], fock_dim: Option<usize>, opts: &SpectrumOptions) -> Result<Vec<SweepRow>> {
    grid(gs, zetas, fock_dim).into_iter().map(|(g, z, n)| sweep_point(g, z, n, opts)).collect()
}

pub fn photon_sweep(gs: &[f64], zetas: &[f64], fock_dim: Option<usize>, opts: &SpectrumOptions) -> Result<Vec<SweepRow>> {
    grid(gs, zetas, fock_dim).into_iter().map(|(g, z, n)| photon_point(g, z, n, opts)).collect()
}

/// Smallest swept `g` at which the gap falls below `threshold` for the
/// given `zeta`.
pub fn gap_closing_g(rows: &[SweepRow], zeta: f64, threshold: f64) -> Option<f64> {
    rows.iter()
        .filter(|r| r.zeta == zeta && r.gap.is_some_and(|x| x < threshold))
        .map(|r| r.g)
        .min_by(f64::total_cmp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_uses_rule_per_zeta() {
        let rows = grid(&[0.5, 2.0], &[10.0, 30.0], None);
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0], (0.5, 10.0, truncation_rule(10.0, 2.0)));
        assert_eq!(rows[3], (2.0, 30.0, 73));
    }

    #[test]
    fn photon_and_gap_paths_agree() {
        let opts = SpectrumOptions::default();
        let a = sweep_point(1.2, 4.0, 20, &opts).unwrap();
        let b = photon_point(1.2, 4.0, 20, &opts).unwrap();
        assert!((a.photon_ratio.unwrap() - b.photon_ratio.unwrap()).abs() < 1e-10);
        assert!(b.gap.is_none());
    }

    #[test]
    fn closing_point_lookup() {
        let row = |g, gap| SweepRow { g, zeta: 1.0, fock_dim: 10, gap: Some(gap), degeneracy: None, photon_ratio: None };
        let rows = [row(1.0, 1e-3), row(1.2, 1e-7), row(1.1, 5e-7), row(1.3, 1e-9)];
        assert_eq!(gap_closing_g(&rows, 1.0, 1e-6), Some(1.1));
        assert_eq!(gap_closing_g(&rows, 2.0, 1e-6), None);
    }
}
