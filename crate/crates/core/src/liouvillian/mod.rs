//! Lindblad superoperators of the full and effective models, their parity
//! sectors, spectra and time evolution.

mod dump;
mod evolve;
mod spectrum;
mod sweep;

pub use dump::{read_steady_state, write_steady_state};
pub use evolve::{evolve, evolve_with_diagnostics, EvolveDiagnostics, EXPMV_TOL};
pub use spectrum::{
    spectrum, steady_state, SectorSpectrum, SectorState, SolverKind, SpectrumOptions, SpectrumResult,
    DENSE_SECTOR_MAX,
};
pub use sweep::{gap_closing_g, gap_sweep, photon_point, photon_sweep, sweep_point, SweepRow};

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::hilbert::{
    devectorize, effective_hamiltonian, rabi_hamiltonian, required_fock_dim, two_photon_jump, vectorize,
    FockSpace, ParityLabel, SpaceTag, SystemParams, C64,
};
use crate::linalg::CsrMatrix;

/// Bound on entries coupling different parity sectors.
pub const BLOCK_TOL: f64 = 1e-12;

/// Largest truncation for which the full qubit-oscillator Liouvillian is
/// meant to be assembled.
pub const FULL_RABI_MAX_FOCK: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelTag {
    FullRabi,
    EffectiveOscillator,
}

/// Controls of the oscillator-only model, with `omega0 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveParams {
    g: f64,
    zeta: f64,
    fock_dim: usize,
}

impl EffectiveParams {
    pub fn new(g: f64, zeta: f64, fock_dim: usize) -> Result<Self> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::param("g", format!("must be finite and non-negative, got {g}")));
        }
        if !(zeta.is_finite() && zeta > 0.0) {
            return Err(Error::param("zeta", format!("must be finite and positive, got {zeta}")));
        }
        if fock_dim < 2 {
            return Err(Error::InvalidDimension { dim: fock_dim, min: 2 });
        }
        Ok(Self { g, zeta, fock_dim })
    }

    /// Uses the default truncation for `g` itself.
    pub fn with_default_truncation(g: f64, zeta: f64) -> Result<Self> {
        Self::new(g, zeta, truncation_rule(zeta, g))
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn kappa(&self) -> f64 {
        1.0 / self.zeta
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }
}

/// Default truncation for a sweep reaching coupling `g_max`: room for a
/// coherent state with `|beta|^2 = zeta g_max^2 / 4`.
pub fn truncation_rule(zeta: f64, g_max: f64) -> usize {
    required_fock_dim((zeta * g_max * g_max / 4.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelParams {
    Full(SystemParams),
    Effective(EffectiveParams),
}

/// Parity sector of a density-matrix element `(row, column)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sector {
    EE,
    OO,
    EO,
    OE,
}

impl Sector {
    pub const ALL: [Sector; 4] = [Sector::EE, Sector::OO, Sector::EO, Sector::OE];

    pub fn from_parities(row: ParityLabel, col: ParityLabel) -> Self {
        match (row, col) {
            (ParityLabel::Even, ParityLabel::Even) => Sector::EE,
            (ParityLabel::Odd, ParityLabel::Odd) => Sector::OO,
            (ParityLabel::Even, ParityLabel::Odd) => Sector::EO,
            (ParityLabel::Odd, ParityLabel::Even) => Sector::OE,
        }
    }

    pub fn parities(self) -> (ParityLabel, ParityLabel) {
        match self {
            Sector::EE => (ParityLabel::Even, ParityLabel::Even),
            Sector::OO => (ParityLabel::Odd, ParityLabel::Odd),
            Sector::EO => (ParityLabel::Even, ParityLabel::Odd),
            Sector::OE => (ParityLabel::Odd, ParityLabel::Even),
        }
    }

    /// Sectors on the diagonal hold populations and carry the trace.
    pub fn is_diagonal(self) -> bool {
        matches!(self, Sector::EE | Sector::OO)
    }

    pub fn label(self) -> &'static str {
        match self {
            Sector::EE => "ee",
            Sector::OO => "oo",
            Sector::EO => "eo",
            Sector::OE => "oe",
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Sector::ALL
            .into_iter()
            .find(|x| x.label() == s)
            .ok_or_else(|| Error::param("sector", format!("unknown sector label {s:?}")))
    }
}

/// Vectorized indices of each sector, in column-stacking order.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockInfo {
    indices: [Vec<usize>; 4],
}

impl BlockInfo {
    pub fn for_space(space: SpaceTag) -> Self {
        let parities = space.basis_parities();
        let d = parities.len();
        let mut indices: [Vec<usize>; 4] = Default::default();
        for j in 0..d {
            for i in 0..d {
                let s = Sector::from_parities(parities[i], parities[j]);
                indices[s as usize].push(j * d + i);
            }
        }
        Self { indices }
    }

    pub fn indices(&self, sector: Sector) -> &[usize] {
        &self.indices[sector as usize]
    }

    pub fn sizes(&self) -> [usize; 4] {
        [0, 1, 2, 3].map(|k| self.indices[k].len())
    }

    fn sector_map(&self, len: usize) -> Vec<Sector> {
        let mut map = vec![Sector::EE; len];
        for s in Sector::ALL {
            for &k in self.indices(s) {
                map[k] = s;
            }
        }
        map
    }
}

/// Lindblad generator acting on column-stacked density matrices.
#[derive(Clone, Debug)]
pub struct Superoperator {
    matrix: CsrMatrix,
    space: SpaceTag,
    model: ModelTag,
    params: ModelParams,
    blocks: Option<BlockInfo>,
}

impl Superoperator {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn space(&self) -> SpaceTag {
        self.space
    }

    /// Hilbert-space dimension `d`; the matrix is `d^2 x d^2`.
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn model(&self) -> ModelTag {
        self.model
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn blocks(&self) -> Option<&BlockInfo> {
        self.blocks.as_ref()
    }

    /// `L[rho]` for a `d x d` matrix.
    pub fn apply(&self, rho: &Array2<C64>) -> Result<Array2<C64>> {
        if rho.dim() != (self.dim(), self.dim()) {
            return Err(Error::Shape(format!("{:?} matrix for a {}-dimensional space", rho.dim(), self.dim())));
        }
        devectorize(&self.matrix.matvec(&vectorize(rho)))
    }

    /// `max_k |sum_i L[(i,i), k]|`: how far `Tr L[rho]` is from vanishing
    /// identically.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.dim();
        let mut col_sums = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for (k, v) in self.matrix.row(i * d + i) {
                col_sums[k] += v;
            }
        }
        col_sums.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Restriction to one sector; computes the block structure if needed.
    pub fn sector_matrix(&self, sector: Sector) -> CsrMatrix {
        let owned;
        let blocks = match &self.blocks {
            Some(b) => b,
            None => {
                owned = BlockInfo::for_space(self.space);
                &owned
            }
        };
        let idx = blocks.indices(sector);
        self.matrix.submatrix(idx, idx)
    }
}

/// `-i[H, .] + rate * D[A]` with `D[A] rho = 2 A rho A^dag - A^dag A rho - rho A^dag A`.
pub fn lindbladian(h: &CsrMatrix, jump: &CsrMatrix, rate: f64) -> Result<CsrMatrix> {
    let d = h.nrows();
    if h.ncols() != d || jump.nrows() != d || jump.ncols() != d {
        return Err(Error::Shape("Hamiltonian and jump operator must be square and equal-sized".into()));
    }
    let eye = CsrMatrix::identity(d);
    let minus_i = C64::new(0.0, -1.0);
    let coherent = eye.kron(h).plus(&h.transpose().kron(&eye).scaled(C64::new(-1.0, 0.0)))?.scaled(minus_i);
    let ada = jump.conj().transpose().to_dense().dot(&jump.to_dense());
    let ada = CsrMatrix::from_dense(&ada);
    let k = C64::new(rate, 0.0);
    let dissipator = jump
        .conj()
        .kron(jump)
        .scaled(C64::new(2.0, 0.0))
        .plus(&eye.kron(&ada).scaled(C64::new(-1.0, 0.0)))?
        .plus(&ada.transpose().kron(&eye).scaled(C64::new(-1.0, 0.0)))?
        .scaled(k);
    coherent.plus(&dissipator)
}

/// Liouvillian of the qubit-oscillator model with two-photon loss, in units
/// of the oscillator frequency.
pub fn build_full_rabi(params: &SystemParams, fock_dim: usize) -> Result<Superoperator> {
    let fock = FockSpace::new(fock_dim)?;
    if fock_dim > FULL_RABI_MAX_FOCK {
        log::warn!("full Rabi Liouvillian with N = {fock_dim}; intended only for N <= {FULL_RABI_MAX_FOCK}");
    }
    let space = SpaceTag::QubitOscillator(fock);
    let h = CsrMatrix::from_dense(rabi_hamiltonian(params, fock).entries());
    let a2 = CsrMatrix::from_dense(two_photon_jump(space).entries());
    let matrix = lindbladian(&h, &a2, params.normalized().kappa())?;
    Ok(Superoperator { matrix, space, model: ModelTag::FullRabi, params: ModelParams::Full(*params), blocks: None })
}

/// Oscillator-only Liouvillian obtained after eliminating the qubit.
pub fn build_effective(params: &EffectiveParams) -> Result<Superoperator> {
    let required = truncation_rule(params.zeta, params.g);
    if params.fock_dim < required {
        return Err(Error::TruncationInsufficient { required, actual: params.fock_dim });
    }
    let fock = FockSpace::new(params.fock_dim)?;
    let space = SpaceTag::Oscillator(fock);
    let h = CsrMatrix::from_dense(effective_hamiltonian(params.g, fock).entries());
    let a2 = CsrMatrix::from_dense(two_photon_jump(space).entries());
    let matrix = lindbladian(&h, &a2, params.kappa())?;
    Ok(Superoperator {
        matrix,
        space,
        model: ModelTag::EffectiveOscillator,
        params: ModelParams::Effective(*params),
        blocks: None,
    })
}

/// Attaches the four-sector decomposition after checking that no entry
/// couples two different sectors.
pub fn parity_blocks(superop: Superoperator) -> Result<Superoperator> {
    let blocks = BlockInfo::for_space(superop.space);
    let map = blocks.sector_map(superop.matrix.nrows());
    let magnitude = superop
        .matrix
        .triplets()
        .filter(|(i, j, _)| map[*i] != map[*j])
        .fold(0.0f64, |m, (_, _, v)| m.max(v.norm()));
    if magnitude > BLOCK_TOL {
        return Err(Error::SymmetryViolation { magnitude });
    }
    Ok(Superoperator { blocks: Some(blocks), ..superop })
}
