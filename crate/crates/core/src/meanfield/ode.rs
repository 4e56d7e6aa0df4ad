//! Adaptive Dormand-Prince 8(5,3) integrator.

use super::dop853_tableau::{A, B, C, E3, E5, STAGES};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Initial step; estimated from the right-hand side when `None`.
    pub first_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-11, max_steps: 50_000_000, first_step: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: OdeStats,
    /// Set when the stop predicate fired before the final time.
    pub stopped_early: bool,
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

fn rms_scaled(v: &[f64], scale: &[f64]) -> f64 {
    (v.iter().zip(scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

fn initial_step<F>(f: &mut F, t0: f64, y0: &[f64], f0: &[f64], opts: &OdeOptions, stats: &mut OdeStats) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let scale: Vec<f64> = y0.iter().map(|y| opts.atol + y.abs() * opts.rtol).collect();
    let d0 = rms_scaled(y0, &scale);
    let d1 = rms_scaled(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, d)| y + h0 * d).collect();
    let mut f1 = vec![0.0; y0.len()];
    f(t0 + h0, &y1, &mut f1);
    stats.rhs_evals += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_scaled(&diff, &scale) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    (100.0 * h0).min(h1)
}

/// Integrates `y' = f(t, y)` from `t0` and records the state at every time
/// in `samples` (increasing, within `(t0, t_end]`). Steps are shortened to
/// land on each sample exactly. Integration ends at `t_end` or after the
/// first sample at which `stop` returns true.
pub fn dop853<F, S>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    samples: &[f64],
    opts: &OdeOptions,
    mut stop: S,
) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &[f64]) -> bool,
{
    if samples.windows(2).any(|w| w[1] <= w[0]) || samples.first().is_some_and(|&s| s <= t0) {
        return Err(Error::param("samples", "sample times must increase strictly from t0"));
    }
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut times = vec![t0];
    let mut states = vec![y0.to_vec()];
    let Some(&t_end) = samples.last() else {
        return Ok(OdeSolution { times, states, stats, stopped_early: false });
    };

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; n]; STAGES + 1];
    f(t, &y, &mut k[0]);
    stats.rhs_evals += 1;
    let mut h = match opts.first_step {
        Some(h) => h,
        None => {
            let f0 = k[0].clone();
            initial_step(&mut f, t, &y, &f0, opts, &mut stats)
        }
    };
    let mut next = 0;
    let mut y_new = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut err5 = vec![0.0; n];
    let mut err3 = vec![0.0; n];

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Solver(format!("step limit {} reached at t = {t}", opts.max_steps)));
        }
        let min_step = 10.0 * f64::EPSILON * t.abs().max(1.0);
        let target = samples[next];
        let mut step_rejected = false;
        let (h_taken, factor) = loop {
            let clamp = h >= target - t;
            let hs = if clamp { target - t } else { h };
            if hs < min_step {
                return Err(Error::StepSizeUnderflow { t, step: hs });
            }
            for s in 1..STAGES {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, a) in A[s][..s].iter().enumerate() {
                        acc += a * k[j][i];
                    }
                    stage[i] = y[i] + hs * acc;
                }
                f(t + C[s] * hs, &stage, &mut k[s]);
            }
            for i in 0..n {
                let mut acc = 0.0;
                for (j, b) in B.iter().enumerate() {
                    acc += b * k[j][i];
                }
                y_new[i] = y[i] + hs * acc;
            }
            f(t + hs, &y_new, &mut k[STAGES]);
            stats.rhs_evals += STAGES;

            for i in 0..n {
                let scale = opts.atol + y[i].abs().max(y_new[i].abs()) * opts.rtol;
                let (mut e5, mut e3) = (0.0, 0.0);
                for j in 0..=STAGES {
                    e5 += E5[j] * k[j][i];
                    e3 += E3[j] * k[j][i];
                }
                err5[i] = e5 / scale;
                err3[i] = e3 / scale;
            }
            let n5: f64 = err5.iter().map(|e| e * e).sum();
            let n3: f64 = err3.iter().map(|e| e * e).sum();
            let err = if n5 == 0.0 && n3 == 0.0 {
                0.0
            } else {
                hs.abs() * n5 / ((n5 + 0.01 * n3) * n as f64).sqrt()
            };
            if err < 1.0 {
                let mut factor =
                    if err == 0.0 { MAX_FACTOR } else { MAX_FACTOR.min(SAFETY * err.powf(ERROR_EXPONENT)) };
                if step_rejected {
                    factor = factor.min(1.0);
                }
                break (if clamp { None } else { Some(hs) }, factor);
            }
            stats.rejected += 1;
            h = hs * MIN_FACTOR.max(SAFETY * err.powf(ERROR_EXPONENT));
            step_rejected = true;
        };
        stats.accepted += 1;
        t = match h_taken {
            Some(hs) => {
                h = hs * factor;
                t + hs
            }
            None => {
                // a clamped step says nothing about the natural step size
                // beyond not shrinking it
                h = h.max((target - t) * factor.min(1.0));
                target
            }
        };
        std::mem::swap(&mut y, &mut y_new);
        let last = k.len() - 1;
        k.swap(0, last);
        if h_taken.is_none() {
            times.push(t);
            states.push(y.clone());
            next += 1;
            if stop(t, &y) && next < samples.len() {
                return Ok(OdeSolution { times, states, stats, stopped_early: true });
            }
        }
    }
    Ok(OdeSolution { times, states, stats, stopped_early: false })
}
