//! Passive error correction of a cat qubit stored in the decoherence-free
//! subspace at `g = sqrt(2)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};

use crate::error::{Error, Result};
use crate::hilbert::{cat_state, fidelity, DensityMatrix, FockSpace, ParityLabel, StateVector, C64};
use crate::liouvillian::{build_effective, evolve_with_diagnostics, truncation_rule, EffectiveParams, EvolveDiagnostics, Superoperator};

/// `||L_target[rho_target]||_F` above this rejects the target.
pub const STATIONARITY_TOL: f64 = 1e-6;
pub const NORMALIZATION_TOL: f64 = 1e-10;
const TARGET_G_TOL: f64 = 1e-12;

/// Largest correction time tried by the asymptotic mode.
pub const ASYMPTOTIC_MAX_TIME: f64 = 1024.0;
/// Asymptotic mode stops once a doubling of `t_corr` moves the fidelity by
/// less than this.
pub const ASYMPTOTIC_TOL: f64 = 1e-6;

/// Amplitude of the coherent states spanning the code at `(g, zeta)`.
///
/// The modulus is `sqrt(zeta g^2) / 2`. The phase `pi/4` is where `a^2`
/// dissipation and the squeezing term of the effective Hamiltonian balance.
pub fn code_amplitude(g: f64, zeta: f64) -> C64 {
    C64::from_polar((zeta * g * g).sqrt() / 2.0, FRAC_PI_4)
}

/// Smallest truncation whose last two Fock amplitudes of `|beta>` are below
/// `1e-10` in modulus. The two-photon terms reach two levels past the
/// cutoff, so this bounds the truncation part of the stationarity residual.
pub fn code_fock_dim(beta_abs: f64) -> usize {
    let b2 = beta_abs * beta_abs;
    let log_cut = 2.0 * (1e-10f64).ln();
    let mut n = 0usize;
    let mut log_p = -b2;
    while (n as f64) <= b2 || log_p > log_cut {
        n += 1;
        log_p += b2.ln() - (n as f64).ln();
    }
    n + 2
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CodeCoefficients {
    pub c_e: C64,
    pub c_o: C64,
}

impl CodeCoefficients {
    pub fn new(c_e: C64, c_o: C64) -> Result<Self> {
        let norm = c_e.norm_sqr() + c_o.norm_sqr();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::param("coefficients", format!("|c_e|^2 + |c_o|^2 = {norm}, expected 1")));
        }
        Ok(Self { c_e, c_o })
    }

    pub fn even() -> Self {
        Self { c_e: C64::new(1.0, 0.0), c_o: C64::new(0.0, 0.0) }
    }

    pub fn odd() -> Self {
        Self { c_e: C64::new(0.0, 0.0), c_o: C64::new(1.0, 0.0) }
    }
}

impl Default for CodeCoefficients {
    fn default() -> Self {
        Self { c_e: C64::new(FRAC_1_SQRT_2, 0.0), c_o: C64::new(FRAC_1_SQRT_2, 0.0) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatQubitCode {
    beta: C64,
    coefficients: CodeCoefficients,
}

impl CatQubitCode {
    pub fn new(g: f64, zeta: f64, coefficients: CodeCoefficients) -> Self {
        Self { beta: code_amplitude(g, zeta), coefficients }
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn coefficients(&self) -> CodeCoefficients {
        self.coefficients
    }

    pub fn even_cat(&self, space: FockSpace) -> Result<StateVector> {
        cat_state(self.beta, ParityLabel::Even, space)
    }

    pub fn odd_cat(&self, space: FockSpace) -> Result<StateVector> {
        cat_state(self.beta, ParityLabel::Odd, space)
    }

    /// `c_e |beta>_e + c_o |beta>_o`.
    pub fn logical_state(&self, space: FockSpace) -> Result<StateVector> {
        let c = self.coefficients;
        self.even_cat(space)?.superpose(c.c_e, &self.odd_cat(space)?, c.c_o)
    }

    /// `Tr(P rho)` for the projector onto the span of the two cats.
    pub fn code_space_population(&self, rho: &DensityMatrix) -> Result<f64> {
        let space = FockSpace::new(rho.dim())?;
        let mut total = 0.0;
        for cat in [self.even_cat(space)?, self.odd_cat(space)?] {
            let v = cat.amplitudes();
            let rv = rho.entries().dot(v);
            total += v.iter().zip(&rv).map(|(a, b)| a.conj() * b).sum::<C64>().re;
        }
        Ok(total)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CorrectionMode {
    /// Correct for exactly `t_corr`.
    #[default]
    Fixed,
    /// Start at `t_corr` and double until the fidelity settles.
    Asymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub g_target: f64,
    pub g_err: f64,
    pub tau: f64,
    pub t_corr: f64,
    pub zeta: f64,
    /// Defaults to the larger of the truncation rule at `max(g_target,
    /// g_err)` and [`code_fock_dim`] of the code amplitude.
    pub fock_dim: Option<usize>,
    pub mode: CorrectionMode,
}

impl ProtocolConfig {
    pub fn new(g_err: f64, zeta: f64) -> Self {
        Self { g_target: SQRT_2, g_err, tau: 1.0, t_corr: 1.0, zeta, fock_dim: None, mode: CorrectionMode::Fixed }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tau", self.tau), ("t_corr", self.t_corr)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("must be finite and non-negative, got {v}")));
            }
        }
        if !(self.zeta.is_finite() && self.zeta > 0.0) {
            return Err(Error::param("zeta", format!("must be finite and positive, got {}", self.zeta)));
        }
        if !(self.g_err.is_finite() && self.g_err >= 0.0) {
            return Err(Error::param("g_err", format!("must be finite and non-negative, got {}", self.g_err)));
        }
        if (self.g_target - SQRT_2).abs() > TARGET_G_TOL {
            return Err(Error::param(
                "g_target",
                format!("the cat manifold is stationary only at sqrt(2), got {}", self.g_target),
            ));
        }
        if self.mode == CorrectionMode::Asymptotic && self.t_corr <= 0.0 {
            return Err(Error::param("t_corr", "asymptotic mode needs a positive starting time"));
        }
        Ok(())
    }

    pub fn resolved_fock_dim(&self) -> usize {
        self.fock_dim.unwrap_or_else(|| {
            truncation_rule(self.zeta, self.g_target.max(self.g_err))
                .max(code_fock_dim(code_amplitude(self.g_target, self.zeta).norm()))
        })
    }

    pub fn target_liouvillian(&self) -> Result<Superoperator> {
        build_effective(&EffectiveParams::new(self.g_target, self.zeta, self.resolved_fock_dim())?)
    }

    pub fn error_liouvillian(&self) -> Result<Superoperator> {
        build_effective(&EffectiveParams::new(self.g_err, self.zeta, self.resolved_fock_dim())?)
    }
}

#[derive(Clone, Debug)]
pub struct TargetState {
    pub code: CatQubitCode,
    pub rho: DensityMatrix,
    /// `||L_target[rho]||_F`.
    pub stationarity: f64,
}

/// Builds `|psi><psi|` for the cat code and checks that the target
/// Liouvillian leaves it invariant.
pub fn stabilize_target(config: &ProtocolConfig, coefficients: CodeCoefficients) -> Result<TargetState> {
    config.validate()?;
    let l = config.target_liouvillian()?;
    stabilize_with(config, coefficients, &l)
}

fn stabilize_with(config: &ProtocolConfig, coefficients: CodeCoefficients, l: &Superoperator) -> Result<TargetState> {
    let code = CatQubitCode::new(config.g_target, config.zeta, coefficients);
    let space = FockSpace::new(config.resolved_fock_dim())?;
    let rho = code.logical_state(space)?.to_density();
    let stationarity = l.apply(rho.entries())?.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if stationarity > STATIONARITY_TOL {
        return Err(Error::NotStationary { residual: stationarity, tolerance: STATIONARITY_TOL });
    }
    Ok(TargetState { code, rho, stationarity })
}

/// Evolves under the drifted coupling for `tau`.
pub fn inject_error(rho_target: &DensityMatrix, config: &ProtocolConfig) -> Result<(DensityMatrix, EvolveDiagnostics)> {
    config.validate()?;
    evolve_with_diagnostics(rho_target, &config.error_liouvillian()?, config.tau)
}

/// Evolves under the target Liouvillian for `t_corr`.
pub fn correct(rho_err: &DensityMatrix, config: &ProtocolConfig) -> Result<(DensityMatrix, EvolveDiagnostics)> {
    config.validate()?;
    evolve_with_diagnostics(rho_err, &config.target_liouvillian()?, config.t_corr)
}

#[derive(Clone, Debug)]
pub struct ProtocolDiagnostics {
    pub stationarity: f64,
    pub error_stage: EvolveDiagnostics,
    /// One entry per correction interval; several in asymptotic mode.
    pub correction_stages: Vec<EvolveDiagnostics>,
    /// Whether the asymptotic mode settled before its time limit. Always
    /// true in fixed mode.
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct ProtocolResult {
    pub config: ProtocolConfig,
    pub fock_dim: usize,
    pub code: CatQubitCode,
    pub rho_target: DensityMatrix,
    pub rho_err: DensityMatrix,
    pub rho_corr: DensityMatrix,
    pub fidelity_err: f64,
    pub fidelity_corr: f64,
    /// Correction time actually used.
    pub t_corr: f64,
    pub code_space_population: f64,
    pub diagnostics: ProtocolDiagnostics,
}

pub fn run_protocol(config: &ProtocolConfig, coefficients: CodeCoefficients) -> Result<ProtocolResult> {
    config.validate()?;
    let l_target = config.target_liouvillian()?;
    let target = stabilize_with(config, coefficients, &l_target)?;
    let (rho_err, error_stage) = if config.g_err == config.g_target {
        evolve_with_diagnostics(&target.rho, &l_target, config.tau)?
    } else {
        evolve_with_diagnostics(&target.rho, &config.error_liouvillian()?, config.tau)?
    };
    let fidelity_err = fidelity(&target.rho, &rho_err)?;

    let (mut rho_corr, first) = evolve_with_diagnostics(&rho_err, &l_target, config.t_corr)?;
    let mut fidelity_corr = fidelity(&target.rho, &rho_corr)?;
    let mut stages = vec![first];
    let mut t_corr = config.t_corr;
    let mut converged = true;
    if config.mode == CorrectionMode::Asymptotic {
        converged = false;
        while 2.0 * t_corr <= ASYMPTOTIC_MAX_TIME {
            // doubling the total time means evolving for t_corr again
            let (next, diag) = evolve_with_diagnostics(&rho_corr, &l_target, t_corr)?;
            let f = fidelity(&target.rho, &next)?;
            stages.push(diag);
            t_corr *= 2.0;
            let delta = (f - fidelity_corr).abs();
            rho_corr = next;
            fidelity_corr = f;
            if delta < ASYMPTOTIC_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            log::warn!("asymptotic correction not settled by t = {t_corr}");
        }
    }
    let code_space_population = target.code.code_space_population(&rho_corr)?;
    Ok(ProtocolResult {
        config: *config,
        fock_dim: config.resolved_fock_dim(),
        code: target.code,
        rho_target: target.rho,
        rho_err,
        rho_corr,
        fidelity_err,
        fidelity_corr,
        t_corr,
        code_space_population,
        diagnostics: ProtocolDiagnostics {
            stationarity: target.stationarity,
            error_stage,
            correction_stages: stages,
            converged,
        },
    })
}
