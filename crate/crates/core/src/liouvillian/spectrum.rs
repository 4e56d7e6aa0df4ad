use ndarray::{Array1, Array2};

use super::{BlockInfo, Sector, Superoperator};
use crate::error::{Error, Result};
use crate::hilbert::{devectorize, DensityMatrix, C64, ZERO};
use crate::linalg::{eig, shift_invert_eigs, CsrMatrix, EigenPair, ShiftInvertOptions};

/// Sectors up to this size are diagonalized densely.
pub const DENSE_SECTOR_MAX: usize = 144;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumOptions {
    /// Eigenvalues kept per sector.
    pub n_eigenvalues: usize,
    pub degeneracy_threshold: f64,
    pub krylov_dim: usize,
    pub shift: f64,
    pub tol: f64,
    pub max_restarts: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        let a = ShiftInvertOptions::default();
        Self {
            n_eigenvalues: a.n_eigenvalues,
            degeneracy_threshold: 1e-8,
            krylov_dim: a.krylov_dim,
            shift: a.shift.re,
            tol: a.tol,
            max_restarts: a.max_restarts,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Dense,
    ShiftInvert { restarts: usize, solves: usize },
}

#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    pub sector: Sector,
    pub dim: usize,
    /// Sorted by descending real part.
    pub eigenvalues: Vec<C64>,
    pub solver: SolverKind,
    pub max_residual: f64,
}

/// Null vector of one sector, devectorized to a `d x d` matrix.
///
/// Diagonal sectors are scaled to unit trace and also returned as a density
/// matrix; coherence sectors are traceless and are scaled to unit Frobenius
/// norm instead.
#[derive(Clone, Debug)]
pub struct SectorState {
    pub sector: Sector,
    pub eigenvalue: C64,
    pub matrix: Array2<C64>,
    pub density: Option<DensityMatrix>,
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    /// All computed eigenvalues, sorted by descending real part.
    pub eigenvalues: Vec<(Sector, C64)>,
    pub sectors: Vec<SectorSpectrum>,
    pub steady_states: Vec<SectorState>,
    /// `Re[-Lambda]` of the slowest mode other than the trace-carrying null
    /// vector of each diagonal sector.
    pub gap: f64,
    /// The two slowest such modes; their real parts coincide.
    pub gap_eigenvalues: [(Sector, C64); 2],
    /// Eigenvalues with `|Re| <= degeneracy_threshold`.
    pub degeneracy: usize,
}

impl SpectrumResult {
    pub fn steady_state(&self, sector: Sector) -> Option<&SectorState> {
        self.steady_states.iter().find(|s| s.sector == sector)
    }

    /// `|Re(l1) - Re(l2)|` for the pair defining the gap.
    pub fn gap_splitting(&self) -> f64 {
        (self.gap_eigenvalues[0].1.re - self.gap_eigenvalues[1].1.re).abs()
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|(_, z)| z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn sector_eigs(m: &CsrMatrix, n: usize, opts: &SpectrumOptions) -> Result<(Vec<EigenPair>, SolverKind)> {
    let dim = m.nrows();
    if dim <= DENSE_SECTOR_MAX {
        let dense = m.to_dense();
        let (w, v) = eig(&dense)?;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&p, &q| w[q].re.total_cmp(&w[p].re));
        let pairs = order
            .into_iter()
            .take(n)
            .map(|i| {
                let mut x = v.column(i).to_owned();
                let nx = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                x.mapv_inplace(|z| z / nx);
                let r = &dense.dot(&x) - &x.mapv(|z| z * w[i]);
                let residual = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                EigenPair { value: w[i], vector: x, residual }
            })
            .collect();
        return Ok((pairs, SolverKind::Dense));
    }
    let si = ShiftInvertOptions {
        n_eigenvalues: n,
        krylov_dim: opts.krylov_dim,
        shift: C64::new(opts.shift, 0.0),
        tol: opts.tol,
        max_restarts: opts.max_restarts,
    };
    let (pairs, stats) = shift_invert_eigs(m, &si)?;
    Ok((pairs, SolverKind::ShiftInvert { restarts: stats.restarts, solves: stats.solves }))
}

fn sector_state(superop: &Superoperator, blocks: &BlockInfo, sector: Sector, pair: &EigenPair) -> Result<SectorState> {
    let d = superop.dim();
    let mut full = Array1::from_elem(d * d, ZERO);
    for (k, &idx) in blocks.indices(sector).iter().enumerate() {
        full[idx] = pair.vector[k];
    }
    let m = devectorize(&full)?;
    if sector.is_diagonal() {
        let tr = m.diag().sum();
        if tr.norm() < 1e-300 {
            return Err(Error::Solver(format!("{sector} null vector has zero trace")));
        }
        let scaled = m.mapv(|z| z / tr);
        let (rho, repair) = DensityMatrix::repaired(scaled.clone())?;
        log::debug!("{sector} steady state: hermiticity defect {:e} removed", repair.hermiticity_defect);
        Ok(SectorState { sector, eigenvalue: pair.value, matrix: rho.entries().clone(), density: Some(rho) })
    } else {
        let norm = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok(SectorState { sector, eigenvalue: pair.value, matrix: m.mapv(|z| z / norm), density: None })
    }
}

/// Slowest eigenvalues of every parity sector, the gap and the steady
/// states.
pub fn spectrum(superop: &Superoperator, opts: &SpectrumOptions) -> Result<SpectrumResult> {
    if opts.n_eigenvalues < 5 {
        return Err(Error::param("n_eigenvalues", format!("at least 5 required, got {}", opts.n_eigenvalues)));
    }
    let owned;
    let blocks = match superop.blocks() {
        Some(b) => b,
        None => {
            owned = BlockInfo::for_space(superop.space());
            &owned
        }
    };
    let mut sectors = Vec::with_capacity(4);
    let mut all = Vec::new();
    let mut rest = Vec::new();
    let mut steady_states = Vec::new();
    for sector in Sector::ALL {
        let m = superop.sector_matrix(sector);
        let (pairs, solver) = sector_eigs(&m, opts.n_eigenvalues, opts)?;
        let slowest = (0..pairs.len())
            .min_by(|&p, &q| pairs[p].value.norm().total_cmp(&pairs[q].value.norm()))
            .ok_or_else(|| Error::Solver(format!("{sector} sector returned no eigenvalues")))?;
        if sector.is_diagonal() || pairs[slowest].value.re.abs() <= opts.degeneracy_threshold {
            steady_states.push(sector_state(superop, blocks, sector, &pairs[slowest])?);
        }
        for (k, p) in pairs.iter().enumerate() {
            all.push((sector, p.value));
            if !(sector.is_diagonal() && k == slowest) {
                rest.push((sector, p.value));
            }
        }
        let mut values: Vec<C64> = pairs.iter().map(|p| p.value).collect();
        values.sort_by(|a, b| b.re.total_cmp(&a.re));
        sectors.push(SectorSpectrum {
            sector,
            dim: m.nrows(),
            eigenvalues: values,
            solver,
            max_residual: pairs.iter().map(|p| p.residual).fold(0.0, f64::max),
        });
    }
    all.sort_by(|a, b| b.1.re.total_cmp(&a.1.re));
    rest.sort_by(|a, b| a.1.re.abs().total_cmp(&b.1.re.abs()));
    if rest.len() < 2 {
        return Err(Error::Solver("fewer than two non-trace eigenvalues computed".into()));
    }
    let degeneracy = all.iter().filter(|(_, z)| z.re.abs() <= opts.degeneracy_threshold).count();
    Ok(SpectrumResult {
        gap: rest[0].1.re.abs(),
        gap_eigenvalues: [rest[0], rest[1]],
        eigenvalues: all,
        sectors,
        steady_states,
        degeneracy,
    })
}

/// Null vector of a single sector without computing the rest of the
/// spectrum.
pub fn steady_state(superop: &Superoperator, sector: Sector, opts: &SpectrumOptions) -> Result<SectorState> {
    let owned;
    let blocks = match superop.blocks() {
        Some(b) => b,
        None => {
            owned = BlockInfo::for_space(superop.space());
            &owned
        }
    };
    let m = superop.sector_matrix(sector);
    let (pairs, _) = sector_eigs(&m, 2, opts)?;
    let slowest = pairs
        .iter()
        .min_by(|p, q| p.value.norm().total_cmp(&q.value.norm()))
        .ok_or_else(|| Error::Solver(format!("{sector} sector returned no eigenvalues")))?;
    sector_state(superop, blocks, sector, slowest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{expectation, number_op, FockSpace};
    use crate::liouvillian::{build_effective, parity_blocks, EffectiveParams};

    #[test]
    fn normal_phase_small_truncation() {
        let p = EffectiveParams::new(0.5, 3.0, 14).unwrap();
        let l = parity_blocks(build_effective(&p).unwrap()).unwrap();
        let s = spectrum(&l, &SpectrumOptions::default()).unwrap();
        assert_eq!(s.degeneracy, 2);
        assert!(s.max_real_part() < 1e-9);
        assert!(s.gap > 1e-3);
        assert!(s.gap_splitting() < 1e-8);
        for sec in &s.sectors {
            assert_eq!(sec.solver, SolverKind::Dense);
        }
        let ee = s.steady_state(Sector::EE).unwrap();
        let oo = s.steady_state(Sector::OO).unwrap();
        assert!(ee.density.is_some() && oo.density.is_some());
        assert!(s.steady_state(Sector::EO).is_none());
        let residual = l.apply(&ee.matrix).unwrap().iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(residual < 1e-10);
        let f = FockSpace::new(14).unwrap();
        let n = expectation(&number_op(f), ee.density.as_ref().unwrap()).unwrap();
        assert!(n.re >= 0.0 && n.im.abs() < 1e-10);
    }

    #[test]
    fn dense_and_shift_invert_agree() {
        // N = 36 gives sectors of 324, above DENSE_SECTOR_MAX
        let p = EffectiveParams::new(1.3, 8.0, 36).unwrap();
        let l = parity_blocks(build_effective(&p).unwrap()).unwrap();
        let opts = SpectrumOptions::default();
        let s = spectrum(&l, &opts).unwrap();
        for sec in &s.sectors {
            assert!(matches!(sec.solver, SolverKind::ShiftInvert { .. }));
            let m = l.sector_matrix(sec.sector);
            let (w, _) = eig(&m.to_dense()).unwrap();
            let mut w = w.to_vec();
            w.sort_by(|a, b| b.re.total_cmp(&a.re));
            for z in sec.eigenvalues.iter().take(3) {
                let near = w.iter().map(|x| (x - z).norm()).fold(f64::INFINITY, f64::min);
                assert!(near < 1e-9, "{} eigenvalue {z} not in dense spectrum", sec.sector);
            }
            assert!((sec.eigenvalues[0] - w[0]).norm() < 1e-9, "{} leading {} vs {}", sec.sector, sec.eigenvalues[0], w[0]);
        }
    }

    #[test]
    fn rejects_too_few_eigenvalues() {
        let p = EffectiveParams::new(0.5, 3.0, 14).unwrap();
        let l = build_effective(&p).unwrap();
        let opts = SpectrumOptions { n_eigenvalues: 4, ..Default::default() };
        assert!(spectrum(&l, &opts).is_err());
    }
}
