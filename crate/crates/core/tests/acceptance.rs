//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{SQRT_2, TAU};
use std::process::ExitCode;
use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rabi2p::catqec::{run_protocol, stabilize_target, CodeCoefficients, CorrectionMode, ProtocolConfig};
use rabi2p::hilbert::{fidelity, rabi_hamiltonian, two_photon_jump, FockSpace, SpaceTag, SystemParams, C64};
use rabi2p::liouvillian::{
    build_effective, build_full_rabi, evolve, parity_blocks, photon_point, spectrum, sweep_point, truncation_rule,
    EffectiveParams, Sector, SpectrumOptions,
};
use rabi2p::meanfield::{
    critical_coupling, dominant_fixed_point, eigenvalues_2x2, jacobian, linspace, lyapunov_certificate, lyapunov_vdot,
    reduced_rhs, integrate_until, FixedPointOptions, InitialState, MeanFieldParams, OdeOptions, PhasePoint, Stability,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// Relative change, with `floor` guarding values that are zero.
fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

fn criterion_1() -> Outcome {
    let opts = FixedPointOptions::default();
    let mut worst_normal: f64 = 0.0;
    let mut ordered_ok = true;
    let mut onsets = Vec::new();
    for h in [0.25, 1.0, 4.0] {
        for g in linspace(0.0, 1.0, 101) {
            let p = dominant_fixed_point(&MeanFieldParams::new(g, h).unwrap(), &opts);
            worst_normal = worst_normal.max(p.location.abs());
        }
        for g in linspace(1.01, 2.0, 100) {
            let p = dominant_fixed_point(&MeanFieldParams::new(g, h).unwrap(), &opts);
            ordered_ok &= p.location.abs() > 0.0 && p.residual < 1e-12 && p.stability == Stability::Stable;
        }
        onsets.push(critical_coupling(h, 0.5, 2.0, 1e-6, &opts).unwrap().unwrap_or(f64::NAN));
    }
    let onset_ok = onsets.iter().all(|g| *g > 1.0 && *g < 1.01);
    Outcome::new(
        worst_normal < 1e-8 && ordered_ok && onset_ok,
        format!("max |alpha| for g <= 1: {worst_normal:.1e}; ordered branch stable with residual < 1e-12: {ordered_ok}; onsets {onsets:.7?}"),
    )
}

fn criterion_2() -> Outcome {
    let mut eig_err: f64 = 0.0;
    for g in [0.2, 0.6, 0.99, 1.01, 1.5, 2.0] {
        let params = MeanFieldParams::new(g, 1.0).unwrap();
        let ev = eigenvalues_2x2(&jacobian(PhasePoint::ORIGIN, &params));
        let s = C64::new(g * g - 1.0, 0.0).sqrt();
        for target in [s, -s] {
            eig_err = eig_err.max(ev.iter().map(|z| (z - target).norm()).fold(f64::INFINITY, f64::min));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut fd_err: f64 = 0.0;
    let eps = 1e-6;
    for _ in 0..200 {
        let params = MeanFieldParams::new(rng.random_range(0.0..3.0), rng.random_range(0.0..4.0)).unwrap();
        let p = PhasePoint::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let j = jacobian(p, &params);
        for (col, (ex, ey)) in [(eps, 0.0), (0.0, eps)].into_iter().enumerate() {
            let (fx1, fy1) = reduced_rhs(PhasePoint::new(p.x + ex, p.y + ey), &params);
            let (fx0, fy0) = reduced_rhs(PhasePoint::new(p.x - ex, p.y - ey), &params);
            let scale = 1.0 + j[0][col].abs().max(j[1][col].abs());
            fd_err = fd_err.max((j[0][col] - (fx1 - fx0) / (2.0 * eps)).abs() / scale);
            fd_err = fd_err.max((j[1][col] - (fy1 - fy0) / (2.0 * eps)).abs() / scale);
        }
    }
    Outcome::new(
        eig_err < 1e-10 && fd_err < 1e-6,
        format!("origin eigenvalue error {eig_err:.1e}; Jacobian vs finite differences {fd_err:.1e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut all_pass = true;
    let mut chain_err: f64 = 0.0;
    for g in [0.3, 0.6, 0.9] {
        for h in [0.25, 1.0] {
            let params = MeanFieldParams::new(g, h).unwrap();
            all_pass &= lyapunov_certificate(&params, 2.0, 101).unwrap().passes;
            for x in linspace(-2.0, 2.0, 101) {
                for y in linspace(-2.0, 2.0, 101) {
                    let p = PhasePoint::new(x, y);
                    let (fx, fy) = reduced_rhs(p, &params);
                    let grad_x = x - g * g * x / (1.0 + 4.0 * g * g * x * x).sqrt();
                    let chain = grad_x * fx + y * fy;
                    chain_err = chain_err.max((chain - lyapunov_vdot(p, g, h)).abs());
                }
            }
        }
    }
    Outcome::new(
        all_pass && chain_err < 1e-10,
        format!("certificates pass: {all_pass}; closed-form V-dot vs chain rule {chain_err:.1e}"),
    )
}

fn criterion_4() -> Outcome {
    let params = MeanFieldParams::new(0.6, 0.25).unwrap().with_eta(1.0).unwrap();
    let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, ..OdeOptions::default() };
    let mut worst_abs: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    let mut t_end: f64 = 0.0;
    for k in 0..8 {
        let th = TAU * k as f64 / 8.0;
        let init = InitialState::new(PhasePoint::new(th.cos(), th.sin()));
        let tr = integrate_until(&init, &params, 4e6, 4000, &opts, |p, _| p.abs() < 1e-3).unwrap();
        worst_abs = worst_abs.max(tr.last().abs());
        worst_drift = worst_drift.max(tr.spin_norm_drift());
        t_end = t_end.max(*tr.times.last().unwrap());
    }
    Outcome::new(
        worst_abs < 1e-3 && worst_drift < 1e-8,
        format!("eta = 1: final |alpha| <= {worst_abs:.2e} by t = {t_end:.3e}; spin norm drift {worst_drift:.1e}"),
    )
}

struct DegeneracyValues {
    degeneracy: [usize; 2],
    splitting: [f64; 2],
    gaps: [f64; 2],
}

fn degeneracy_values(fock_dim: usize) -> DegeneracyValues {
    let opts = SpectrumOptions::default();
    let mut v = DegeneracyValues { degeneracy: [0; 2], splitting: [0.0; 2], gaps: [0.0; 2] };
    for (i, g) in [0.5, 2.0].into_iter().enumerate() {
        let l = parity_blocks(build_effective(&EffectiveParams::new(g, 30.0, fock_dim).unwrap()).unwrap()).unwrap();
        let s = spectrum(&l, &opts).unwrap();
        v.degeneracy[i] = s.degeneracy;
        v.splitting[i] = s.gap_splitting();
        v.gaps[i] = s.gap;
    }
    v
}

fn criterion_5(v: &DegeneracyValues) -> Outcome {
    Outcome::new(
        v.degeneracy == [2, 4] && v.splitting.iter().all(|s| *s < 1e-8),
        format!(
            "zeta = 30, N = 120: degeneracy {} at g = 0.5 and {} at g = 2; gap pair splitting {:.1e}, {:.1e}",
            v.degeneracy[0], v.degeneracy[1], v.splitting[0], v.splitting[1]
        ),
    )
}

const ZETAS: [f64; 3] = [10.0, 20.0, 30.0];

struct GapValues {
    closing: [f64; 3],
    gap_ordered: f64,
    ratio: f64,
}

fn gap_values(extra: usize) -> GapValues {
    let opts = SpectrumOptions::default();
    let mut closing = [f64::NAN; 3];
    for (i, zeta) in ZETAS.into_iter().enumerate() {
        let n = truncation_rule(zeta, 2.0) + extra;
        for k in 0..=60 {
            let g = 1.0 + 0.01 * k as f64;
            if sweep_point(g, zeta, n, &opts).unwrap().gap.unwrap() < 1e-6 {
                closing[i] = g;
                break;
            }
        }
    }
    let n = truncation_rule(30.0, 2.0) + extra;
    let gap = |g| sweep_point(g, 30.0, n, &opts).unwrap().gap.unwrap();
    let gap_ordered = gap(2.0);
    GapValues { closing, gap_ordered, ratio: gap_ordered / gap(0.5) }
}

fn criterion_6(v: &GapValues) -> Outcome {
    let c = v.closing;
    Outcome::new(
        c[0] > c[1] && c[1] > c[2] && v.ratio < 1e-2,
        format!("first g with gap < 1e-6 at zeta = 10, 20, 30: {c:.2?}; gap(2) / gap(0.5) at zeta = 30: {:.2e}", v.ratio),
    )
}

struct PhotonValues {
    low: f64,
    sqrt2: f64,
    sharpness: [f64; 3],
}

fn photon_values(extra: usize) -> PhotonValues {
    let opts = SpectrumOptions::default();
    let ratio = |g: f64, zeta: f64| {
        photon_point(g, zeta, truncation_rule(zeta, 2.0) + extra, &opts).unwrap().photon_ratio.unwrap()
    };
    let sharpness = ZETAS.map(|z| ratio(1.05, z) - ratio(0.95, z));
    PhotonValues { low: ratio(0.5, 30.0), sqrt2: ratio(SQRT_2, 30.0), sharpness }
}

fn criterion_7(v: &PhotonValues) -> Outcome {
    let s = v.sharpness;
    let dev = (v.sqrt2 - 0.5).abs() / 0.5;
    Outcome::new(
        v.low < 0.02 && dev < 0.05 && s[0] < s[1] && s[1] < s[2],
        format!(
            "zeta = 30: ratio {:.4} at g = 0.5, {:.4} at g = sqrt 2 ({:.1}% from g^2/4); jump across 1 +/- 0.05: {s:.4?}",
            v.low,
            v.sqrt2,
            100.0 * dev
        ),
    )
}

fn stationarity_fidelity(extra: usize) -> f64 {
    let mut config = ProtocolConfig::new(SQRT_2, 30.0);
    config.fock_dim = Some(config.resolved_fock_dim() + extra);
    let target = stabilize_target(&config, CodeCoefficients::default()).unwrap();
    let rho = evolve(&target.rho, &config.target_liouvillian().unwrap(), 5.0).unwrap();
    fidelity(&target.rho, &rho).unwrap()
}

fn criterion_8(f: f64) -> Outcome {
    Outcome::new(f > 1.0 - 1e-6, format!("fidelity after t = 5 under the target Liouvillian: 1 - {:.1e}", 1.0 - f))
}

struct QecValues {
    ordered: f64,
    normal: f64,
    asymptotic: f64,
    by_zeta: [f64; 3],
}

fn qec_values(extra: usize) -> QecValues {
    let run = |g_err: f64, zeta: f64, mode: CorrectionMode| {
        let mut config = ProtocolConfig::new(g_err, zeta);
        config.mode = mode;
        config.fock_dim = Some(config.resolved_fock_dim() + extra);
        run_protocol(&config, CodeCoefficients::default()).unwrap().fidelity_corr
    };
    QecValues {
        ordered: run(1.5, 30.0, CorrectionMode::Fixed),
        normal: run(0.5, 30.0, CorrectionMode::Fixed),
        asymptotic: run(1.5, 30.0, CorrectionMode::Asymptotic),
        by_zeta: ZETAS.map(|z| run(0.5, z, CorrectionMode::Fixed)),
    }
}

fn criterion_9(v: &QecValues) -> Outcome {
    let z = v.by_zeta;
    Outcome::new(
        v.ordered - v.normal >= 0.1 && v.asymptotic > 0.99 && z[0] > z[1] && z[1] > z[2],
        format!(
            "F_corr {:.4} at g_err = 1.5 vs {:.4} at 0.5; asymptotic {:.6}; g_err = 0.5 over zeta = 10, 20, 30: {z:.4?}",
            v.ordered, v.normal, v.asymptotic
        ),
    )
}

/// Dense `-i[H, rho] + k (2 A rho A^dag - {A^dag A, rho})`.
fn lindblad_oracle(h: &Array2<C64>, a: &Array2<C64>, kappa: f64, rho: &Array2<C64>) -> Array2<C64> {
    let dag = |m: &Array2<C64>| m.t().mapv(|z| z.conj());
    let i = C64::new(0.0, 1.0);
    let ada = dag(a).dot(a);
    let coherent = (h.dot(rho) - rho.dot(h)).mapv(|z| -i * z);
    let jump = a.dot(rho).dot(&dag(a)).mapv(|z| 2.0 * z) - ada.dot(rho) - rho.dot(&ada);
    coherent + jump.mapv(|z| kappa * z)
}

fn criterion_10() -> Outcome {
    let opts = FixedPointOptions::default();
    let h_limit = 1e4;
    let spectral = SpectrumOptions::default();
    let mut worst: f64 = 0.0;
    let mut pairs = Vec::new();
    for g in [1.2, 1.5, 2.0] {
        let ratio = photon_point(g, 30.0, truncation_rule(30.0, 2.0), &spectral).unwrap().photon_ratio.unwrap();
        let p = dominant_fixed_point(&MeanFieldParams::new(g, h_limit).unwrap(), &opts);
        let mf = h_limit * p.location.abs().powi(2);
        worst = worst.max((ratio - mf).abs() / mf);
        pairs.push((ratio, mf));
    }

    let n = 8;
    let params = SystemParams::from_dimensionless(1.3, 5.0, 10.0).unwrap();
    let l = parity_blocks(build_full_rabi(&params, n).unwrap()).unwrap();
    let trace = l.trace_preservation_defect();
    let blocks = l.blocks().unwrap();
    let sector_of = |k: usize| {
        [Sector::EE, Sector::EO, Sector::OE, Sector::OO].into_iter().find(|s| blocks.indices(*s).contains(&k)).unwrap()
    };
    let leak = l.matrix().triplets().filter(|(i, j, _)| sector_of(*i) != sector_of(*j)).map(|(_, _, z)| z.norm()).fold(0.0, f64::max);

    let fock = FockSpace::new(n).unwrap();
    let h = rabi_hamiltonian(&params, fock).into_entries();
    let a2 = two_photon_jump(SpaceTag::QubitOscillator(fock)).into_entries();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut action: f64 = 0.0;
    for _ in 0..5 {
        let rho = Array2::from_shape_fn((2 * n, 2 * n), |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let expected = lindblad_oracle(&h, &a2, 1.0 / params.zeta(), &rho);
        let got = l.apply(&rho).unwrap();
        action = action.max((&got - &expected).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }

    Outcome::new(
        worst < 0.10 && trace < 1e-12 && leak < 1e-12 && action < 1e-12,
        format!(
            "photon ratio vs h|alpha|^2 at h = 1e4 {pairs:.4?}, worst {:.1}%; full model N = 8: trace {trace:.1e}, block leak {leak:.1e}, action {action:.1e}",
            100.0 * worst
        ),
    )
}

fn criterion_11(
    d: (&DegeneracyValues, &DegeneracyValues),
    gaps: (&GapValues, &GapValues),
    photons: (&PhotonValues, &PhotonValues),
    stationarity: (f64, f64),
    qec: (&QecValues, &QecValues),
) -> Outcome {
    let mut changes: Vec<(&str, f64)> = Vec::new();
    changes.push(("degeneracy", if d.0.degeneracy == d.1.degeneracy { 0.0 } else { 1.0 }));
    changes.push(("gap g=0.5", rel(d.0.gaps[0], d.1.gaps[0], 0.0)));
    changes.push(("gap closing g", gaps.0.closing.iter().zip(&gaps.1.closing).map(|(a, b)| rel(*a, *b, 0.0)).fold(0.0, f64::max)));
    changes.push(("gap ratio", rel(gaps.0.ratio, gaps.1.ratio, 0.0)));
    let (p0, p1) = photons;
    let mut photon: f64 = rel(p0.low, p1.low, 0.0).max(rel(p0.sqrt2, p1.sqrt2, 0.0));
    for (a, b) in p0.sharpness.iter().zip(&p1.sharpness) {
        photon = photon.max(rel(*a, *b, 0.0));
    }
    changes.push(("photon ratio", photon));
    changes.push(("stationarity fidelity", rel(stationarity.0, stationarity.1, 0.0)));
    let (q0, q1) = qec;
    let mut f = rel(q0.ordered, q1.ordered, 0.0).max(rel(q0.normal, q1.normal, 0.0)).max(rel(q0.asymptotic, q1.asymptotic, 0.0));
    for (a, b) in q0.by_zeta.iter().zip(&q1.by_zeta) {
        f = f.max(rel(*a, *b, 0.0));
    }
    changes.push(("QEC fidelity", f));
    let worst = changes.iter().map(|c| c.1).fold(0.0, f64::max);
    let listing: Vec<String> = changes.iter().map(|(name, c)| format!("{name} {c:.1e}")).collect();
    Outcome::new(
        worst < 0.01,
        format!(
            "relative change at N + 20: {}; gap(2) at zeta = 30 {:.4e} -> {:.4e}",
            listing.join(", "),
            gaps.0.gap_ordered,
            gaps.1.gap_ordered
        ),
    )
}

fn report(k: usize, title: &str, outcome: &Outcome, seconds: f64) -> bool {
    let verdict = if outcome.pass { "PASS" } else { "FAIL" };
    println!("{verdict} criterion {k:>2} ({title}, {seconds:.1} s): {}", outcome.detail);
    outcome.pass
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed().as_secs_f64())
}

fn main() -> ExitCode {
    let mut ok = true;
    let (o, s) = timed(criterion_1);
    ok &= report(1, "mean-field critical point", &o, s);
    let (o, s) = timed(criterion_2);
    ok &= report(2, "Jacobian law", &o, s);
    let (o, s) = timed(criterion_3);
    ok &= report(3, "Lyapunov certificate", &o, s);
    let (o, s) = timed(criterion_4);
    ok &= report(4, "spiral relaxation", &o, s);

    let (deg, s) = timed(|| degeneracy_values(120));
    ok &= report(5, "degeneracy transition", &criterion_5(&deg), s);
    let (gaps, s) = timed(|| gap_values(0));
    ok &= report(6, "gap closing", &criterion_6(&gaps), s);
    let (photons, s) = timed(|| photon_values(0));
    ok &= report(7, "photon-number transition", &criterion_7(&photons), s);
    let (stat, s) = timed(|| stationarity_fidelity(0));
    ok &= report(8, "cat-state stationarity", &criterion_8(stat), s);
    let (qec, s) = timed(|| qec_values(0));
    ok &= report(9, "error-correction benchmark", &criterion_9(&qec), s);
    let (o, s) = timed(criterion_10);
    ok &= report(10, "cross-model consistency", &o, s);

    let (o, s) = timed(|| {
        let deg2 = degeneracy_values(140);
        let gaps2 = gap_values(20);
        let photons2 = photon_values(20);
        let stat2 = stationarity_fidelity(20);
        let qec2 = qec_values(20);
        criterion_11((&deg, &deg2), (&gaps, &gaps2), (&photons, &photons2), (stat, stat2), (&qec, &qec2))
    });
    ok &= report(11, "truncation robustness", &o, s);

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
