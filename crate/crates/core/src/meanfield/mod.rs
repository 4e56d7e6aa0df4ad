//! Semiclassical equations of motion for the order parameter `alpha = x + i y`
//! and, at finite frequency ratio, the spin expectation values.

mod dop853_tableau;
pub mod ode;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hilbert::C64;
pub use ode::{dop853, OdeOptions, OdeSolution, OdeStats};

/// Real parts within this band count as zero when classifying fixed points.
pub const MARGINAL_TOL: f64 = 1e-9;
pub const RESIDUAL_TOL: f64 = 1e-12;
pub const DEDUP_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanFieldParams {
    g: f64,
    h: f64,
    eta: Option<f64>,
}

impl MeanFieldParams {
    pub fn new(g: f64, h: f64) -> Result<Self> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::param("g", format!("must be finite and non-negative, got {g}")));
        }
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::param("h", format!("must be finite and non-negative, got {h}")));
        }
        Ok(Self { g, h, eta: None })
    }

    /// Finite frequency ratio, selecting the three-variable system.
    pub fn with_eta(self, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::param("eta", format!("must be finite and positive, got {eta}")));
        }
        Ok(Self { eta: Some(eta), ..self })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn eta(&self) -> Option<f64> {
        self.eta
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
}

impl PhasePoint {
    pub const ORIGIN: Self = Self { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn abs(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn neg(&self) -> Self {
        Self { x: -self.x, y: -self.y }
    }

    pub fn dist(&self, other: &Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinState {
    /// `<sigma_+>`
    pub sp: C64,
    /// `<sigma_z>`
    pub sz: f64,
}

impl SpinState {
    pub fn down() -> Self {
        Self { sp: C64::new(0.0, 0.0), sz: -1.0 }
    }

    /// `<sigma_x>^2 + <sigma_y>^2 + <sigma_z>^2`.
    pub fn norm_sqr(&self) -> f64 {
        4.0 * self.sp.norm_sqr() + self.sz * self.sz
    }
}

impl Default for SpinState {
    fn default() -> Self {
        Self::down()
    }
}

pub fn reduced_rhs(p: PhasePoint, params: &MeanFieldParams) -> (f64, f64) {
    let (g, h) = (params.g, params.h);
    let r2 = p.x * p.x + p.y * p.y;
    let dx = p.y - 2.0 * h * r2 * p.x;
    let dy = -p.x + g * g * p.x / (1.0 + 4.0 * g * g * p.x * p.x).sqrt() - 2.0 * h * r2 * p.y;
    (dx, dy)
}

/// Time derivatives of the three-variable system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullDerivative {
    pub dx: f64,
    pub dy: f64,
    pub dsp: C64,
    pub dsz: f64,
}

pub fn full_rhs(p: PhasePoint, s: SpinState, params: &MeanFieldParams) -> Result<FullDerivative> {
    let eta = params
        .eta
        .ok_or_else(|| Error::Configuration("full_rhs needs a finite eta; use reduced_rhs in the infinite limit".into()))?;
    let (g, h) = (params.g, params.h);
    let i = C64::new(0.0, 1.0);
    let alpha = C64::new(p.x, p.y);
    let re2 = 2.0 * p.x;
    let da = -i * alpha - i * (g / 2.0) * (s.sp + s.sp.conj()) - 2.0 * h * alpha.norm_sqr() * alpha;
    let dsp = eta * (i * s.sp - i * (g / 2.0) * re2 * s.sz);
    let dsz = eta * (-i * g * re2 * (s.sp - s.sp.conj())).re;
    Ok(FullDerivative { dx: da.re, dy: da.im, dsp, dsz })
}

/// Jacobian of [`reduced_rhs`], rows `(dx, dy)`, columns `(x, y)`.
pub fn jacobian(p: PhasePoint, params: &MeanFieldParams) -> [[f64; 2]; 2] {
    let (g, h) = (params.g, params.h);
    let (x, y) = (p.x, p.y);
    let r2 = x * x + y * y;
    let s = 1.0 + 4.0 * g * g * x * x;
    [
        [-2.0 * h * (r2 + 2.0 * x * x), 1.0 - 4.0 * h * x * y],
        [-1.0 + g * g / (s * s.sqrt()) - 4.0 * h * x * y, -2.0 * h * (r2 + 2.0 * y * y)],
    ]
}

pub fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> [C64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = C64::new(tr * tr / 4.0 - det, 0.0).sqrt();
    let half = C64::new(tr / 2.0, 0.0);
    [half + disc, half - disc]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stability {
    Stable,
    Unstable,
    MarginalLinearization,
    StableByLyapunov,
}

impl Stability {
    pub fn is_stable(self) -> bool {
        matches!(self, Self::Stable | Self::StableByLyapunov)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Stable => "stable",
            Self::Unstable => "unstable",
            Self::MarginalLinearization => "marginal-linearization",
            Self::StableByLyapunov => "stable-by-lyapunov",
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Stability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::Stable, Self::Unstable, Self::MarginalLinearization, Self::StableByLyapunov]
            .into_iter()
            .find(|v| v.label() == s)
            .ok_or_else(|| Error::param("stability", format!("unknown label {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointReport {
    pub location: PhasePoint,
    pub jacobian_eigenvalues: [C64; 2],
    pub stability: Stability,
    /// `|reduced_rhs|` at the location.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointOptions {
    pub grid_bound: f64,
    pub grid_steps: usize,
    pub max_iterations: usize,
    /// Lyapunov grid used for marginal origins.
    pub lyapunov_radius: f64,
    pub lyapunov_steps: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { grid_bound: 3.0, grid_steps: 41, max_iterations: 200, lyapunov_radius: 2.0, lyapunov_steps: 101 }
    }
}

fn residual(p: PhasePoint, params: &MeanFieldParams) -> f64 {
    let (dx, dy) = reduced_rhs(p, params);
    dx.hypot(dy)
}

// Iterates until the step stalls, not merely until the residual is small:
// near a degenerate origin the residual is cubic in the distance and a
// residual test alone would accept points well away from the root.
fn newton(mut p: PhasePoint, params: &MeanFieldParams, max_iter: usize) -> Option<PhasePoint> {
    for _ in 0..max_iter {
        let (fx, fy) = reduced_rhs(p, params);
        if fx == 0.0 && fy == 0.0 {
            return Some(p);
        }
        let j = jacobian(p, params);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let sx = (j[1][1] * fx - j[0][1] * fy) / det;
        let sy = (j[0][0] * fy - j[1][0] * fx) / det;
        p = PhasePoint::new(p.x - sx, p.y - sy);
        if !(p.x.is_finite() && p.y.is_finite()) || p.abs() > 1e6 {
            return None;
        }
        if sx.hypot(sy) <= 1e-15 * p.abs().max(1e-3) {
            break;
        }
    }
    (residual(p, params) < RESIDUAL_TOL).then_some(p)
}

fn classify(p: PhasePoint, params: &MeanFieldParams, opts: &FixedPointOptions) -> FixedPointReport {
    let eig = eigenvalues_2x2(&jacobian(p, params));
    let max_re = eig[0].re.max(eig[1].re);
    let stability = if max_re > MARGINAL_TOL {
        Stability::Unstable
    } else if max_re < -MARGINAL_TOL {
        Stability::Stable
    } else if p.abs() == 0.0
        && lyapunov_certificate(params, opts.lyapunov_radius, opts.lyapunov_steps).is_ok_and(|c| c.passes)
    {
        Stability::StableByLyapunov
    } else {
        Stability::MarginalLinearization
    };
    FixedPointReport { location: p, jacobian_eigenvalues: eig, stability, residual: residual(p, params) }
}

pub fn find_fixed_points(params: &MeanFieldParams) -> Vec<FixedPointReport> {
    find_fixed_points_with(params, &FixedPointOptions::default())
}

/// Newton roots of [`reduced_rhs`] from a uniform seed grid. The origin comes
/// first; the remaining roots follow in `(p, -p)` pairs ordered by `|alpha|`.
pub fn find_fixed_points_with(params: &MeanFieldParams, opts: &FixedPointOptions) -> Vec<FixedPointReport> {
    let n = opts.grid_steps.max(2);
    let b = opts.grid_bound;
    let mut roots: Vec<PhasePoint> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let seed = PhasePoint::new(-b + 2.0 * b * i as f64 / (n - 1) as f64, -b + 2.0 * b * j as f64 / (n - 1) as f64);
            let Some(r) = newton(seed, params, opts.max_iterations) else { continue };
            if r.abs() < DEDUP_TOL {
                continue;
            }
            if roots.iter().all(|q| q.dist(&r) > DEDUP_TOL && q.dist(&r.neg()) > DEDUP_TOL) {
                roots.push(r);
            }
        }
    }
    roots.sort_by(|p, q| p.abs().total_cmp(&q.abs()));
    let mut out = vec![classify(PhasePoint::ORIGIN, params, opts)];
    for r in roots {
        let r = if r.x < 0.0 || (r.x == 0.0 && r.y < 0.0) { r.neg() } else { r };
        out.push(classify(r, params, opts));
        out.push(classify(r.neg(), params, opts));
    }
    out
}

/// `V(x, y) = (x^2 + y^2)/2 - (sqrt(1 + 4 g^2 x^2) - 1)/4`.
pub fn lyapunov_v(p: PhasePoint, g: f64) -> f64 {
    0.5 * (p.x * p.x + p.y * p.y) - ((1.0 + 4.0 * g * g * p.x * p.x).sqrt() - 1.0) / 4.0
}

/// Closed form of `dV/dt` along [`reduced_rhs`].
pub fn lyapunov_vdot(p: PhasePoint, g: f64, h: f64) -> f64 {
    let (x, y) = (p.x, p.y);
    let r2 = x * x + y * y;
    -2.0 * h * r2 * y * y + 2.0 * h * r2 * (g * g / (1.0 + 4.0 * g * g * x * x).sqrt() - 1.0) * x * x
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovCertificate {
    pub passes: bool,
    pub v_min: f64,
    pub v_max: f64,
    pub vdot_max: f64,
    pub samples: usize,
}

/// Samples `V` and `dV/dt` on a `steps x steps` grid over `[-radius, radius]^2`
/// without the origin.
pub fn lyapunov_certificate(params: &MeanFieldParams, grid_radius: f64, grid_steps: usize) -> Result<LyapunovCertificate> {
    if params.g >= 1.0 {
        return Err(Error::OutOfDomain(format!("Lyapunov certificate needs g < 1, got {}", params.g)));
    }
    if !(grid_radius.is_finite() && grid_radius > 0.0) || grid_steps < 2 {
        return Err(Error::param("grid", format!("radius {grid_radius} with {grid_steps} steps")));
    }
    let mut c = LyapunovCertificate {
        passes: true,
        v_min: f64::INFINITY,
        v_max: f64::NEG_INFINITY,
        vdot_max: f64::NEG_INFINITY,
        samples: 0,
    };
    let step = 2.0 * grid_radius / (grid_steps - 1) as f64;
    for i in 0..grid_steps {
        for j in 0..grid_steps {
            let p = PhasePoint::new(-grid_radius + step * i as f64, -grid_radius + step * j as f64);
            if p.abs() < 1e-12 * grid_radius {
                continue;
            }
            let v = lyapunov_v(p, params.g);
            let vd = lyapunov_vdot(p, params.g, params.h);
            c.v_min = c.v_min.min(v);
            c.v_max = c.v_max.max(v);
            c.vdot_max = c.vdot_max.max(vd);
            c.samples += 1;
        }
    }
    c.passes = c.v_min > 0.0 && c.vdot_max < 0.0;
    Ok(c)
}

/// Stable fixed point with the largest `|alpha|` at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub g: f64,
    pub h: f64,
    pub point: FixedPointReport,
}

impl SweepRow {
    pub fn abs_alpha(&self) -> f64 {
        self.point.location.abs()
    }
}

/// Falls back to the origin when no fixed point is stable.
pub fn dominant_fixed_point(params: &MeanFieldParams, opts: &FixedPointOptions) -> FixedPointReport {
    let all = find_fixed_points_with(params, opts);
    let best = all
        .iter()
        .filter(|r| r.stability.is_stable())
        .max_by(|a, b| a.location.abs().total_cmp(&b.location.abs()))
        .copied()
        .unwrap_or(all[0]);
    if best.location.x >= 0.0 {
        return best;
    }
    let mirror = best.location.neg();
    all.iter().copied().min_by(|a, b| a.location.dist(&mirror).total_cmp(&b.location.dist(&mirror))).unwrap_or(best)
}

/// One row per `(g, h)` in the given order.
pub fn order_parameter_sweep(points: &[(f64, f64)], opts: &FixedPointOptions) -> Result<Vec<SweepRow>> {
    points
        .iter()
        .map(|&(g, h)| {
            let params = MeanFieldParams::new(g, h)?;
            Ok(SweepRow { g, h, point: dominant_fixed_point(&params, opts) })
        })
        .collect()
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect(),
    }
}

/// Smallest `g` in `[lo, hi]` with a stable nontrivial fixed point, by
/// bisection to `tol`. `None` if there is none at `hi`.
pub fn critical_coupling(h: f64, lo: f64, hi: f64, tol: f64, opts: &FixedPointOptions) -> Result<Option<f64>> {
    let ordered = |g: f64| -> Result<bool> {
        let r = dominant_fixed_point(&MeanFieldParams::new(g, h)?, opts);
        Ok(r.stability.is_stable() && r.location.abs() > DEDUP_TOL)
    };
    if !ordered(hi)? {
        return Ok(None);
    }
    if ordered(lo)? {
        return Ok(Some(lo));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if ordered(m)? {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(Some(b))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialState {
    pub point: PhasePoint,
    /// Ignored by the reduced system.
    pub spin: SpinState,
}

impl InitialState {
    pub fn new(point: PhasePoint) -> Self {
        Self { point, spin: SpinState::down() }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// Present for the three-variable system.
    pub spins: Option<Vec<SpinState>>,
    pub stats: OdeStats,
    pub stopped_early: bool,
}

impl Trajectory {
    pub fn last(&self) -> PhasePoint {
        *self.points.last().expect("trajectory holds the initial point")
    }

    /// Largest `|S^2(t) - S^2(0)|`; zero without spin data.
    pub fn spin_norm_drift(&self) -> f64 {
        let Some(s) = &self.spins else { return 0.0 };
        let s0 = s[0].norm_sqr();
        s.iter().map(|x| (x.norm_sqr() - s0).abs()).fold(0.0, f64::max)
    }
}

fn pack(init: &InitialState, full: bool) -> Vec<f64> {
    let mut y = vec![init.point.x, init.point.y];
    if full {
        y.extend([init.spin.sp.re, init.spin.sp.im, init.spin.sz]);
    }
    y
}

/// Integrates from `t = 0` to `t_max`, sampling `samples` evenly spaced times
/// after the start. The system is chosen by `params.eta`.
pub fn integrate(init: &InitialState, params: &MeanFieldParams, t_max: f64, samples: usize) -> Result<Trajectory> {
    integrate_until(init, params, t_max, samples, &OdeOptions::default(), |_, _| false)
}

/// As [`integrate`], ending at the first sample where `stop` holds.
pub fn integrate_until<S>(
    init: &InitialState,
    params: &MeanFieldParams,
    t_max: f64,
    samples: usize,
    opts: &OdeOptions,
    mut stop: S,
) -> Result<Trajectory>
where
    S: FnMut(PhasePoint, Option<SpinState>) -> bool,
{
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::param("t_max", format!("must be positive, got {t_max}")));
    }
    if samples == 0 {
        return Err(Error::param("samples", "at least one sample required"));
    }
    let full = params.eta.is_some();
    let times = linspace(0.0, t_max, samples + 1);
    let unpack = |y: &[f64]| {
        let p = PhasePoint::new(y[0], y[1]);
        let s = full.then(|| SpinState { sp: C64::new(y[2], y[3]), sz: y[4] });
        (p, s)
    };
    let sol = if full {
        let p = *params;
        dop853(
            move |_, y, d| {
                let s = SpinState { sp: C64::new(y[2], y[3]), sz: y[4] };
                let r = full_rhs(PhasePoint::new(y[0], y[1]), s, &p).expect("eta checked");
                d.copy_from_slice(&[r.dx, r.dy, r.dsp.re, r.dsp.im, r.dsz]);
            },
            0.0,
            &pack(init, true),
            &times[1..],
            opts,
            |_, y| {
                let (p, s) = unpack(y);
                stop(p, s)
            },
        )?
    } else {
        let p = *params;
        dop853(
            move |_, y, d| {
                let (dx, dy) = reduced_rhs(PhasePoint::new(y[0], y[1]), &p);
                d[0] = dx;
                d[1] = dy;
            },
            0.0,
            &pack(init, false),
            &times[1..],
            opts,
            |_, y| stop(PhasePoint::new(y[0], y[1]), None),
        )?
    };
    let mut points = Vec::with_capacity(sol.states.len());
    let mut spins = full.then(|| Vec::with_capacity(sol.states.len()));
    for y in &sol.states {
        let (p, s) = unpack(y);
        points.push(p);
        if let (Some(v), Some(s)) = (spins.as_mut(), s) {
            v.push(s);
        }
    }
    Ok(Trajectory { times: sol.times, points, spins, stats: sol.stats, stopped_early: sol.stopped_early })
}
