use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use rabi2p::catqec::run_protocol;
use rabi2p::liouvillian::{photon_point, sweep_point, SpectrumOptions, SweepRow};
use rabi2p::meanfield::{
    dominant_fixed_point, find_fixed_points, integrate, FixedPointOptions, InitialState, MeanFieldParams, PhasePoint,
    SweepRow as MeanFieldRow,
};
use rabi2p::report::{self, CsvTable};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{CatConfig, CommandKind, MeanFieldSweep, Params, PortraitConfig, RunConfig, SpectralConfig};
use crate::error::CliError;
use crate::svg::{Plot, Series, Style};

pub struct Output {
    pub table: CsvTable,
    pub plots: Vec<(String, Plot)>,
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub started: String,
    pub finished: String,
    pub rows: usize,
    pub files: Vec<FileEntry>,
}

fn par_map<T, R, F>(items: Vec<T>, workers: usize, f: F) -> Result<Vec<R>, CliError>
where
    T: Send + Sync,
    R: Send,
    F: Fn(&T) -> rabi2p::Result<R> + Send + Sync,
{
    if workers <= 1 {
        return items.iter().map(&f).collect::<rabi2p::Result<Vec<_>>>().map_err(CliError::from);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("parallel: {e}")))?;
    // indexed collect keeps the input order
    pool.install(|| items.par_iter().map(&f).collect::<rabi2p::Result<Vec<_>>>()).map_err(CliError::from)
}

fn meanfield_sweep(sweep: &MeanFieldSweep, workers: usize) -> Result<Output, CliError> {
    let (points, curves, x_label): (Vec<(f64, f64)>, usize, &str) = match sweep {
        MeanFieldSweep::G { g, h } => {
            (h.iter().flat_map(|&h| g.values().into_iter().map(move |g| (g, h))).collect(), h.len(), "g")
        }
        MeanFieldSweep::H { h, g } => {
            (g.iter().flat_map(|&g| h.values().into_iter().map(move |h| (g, h))).collect(), g.len(), "h")
        }
    };
    let opts = FixedPointOptions::default();
    let rows = par_map(points, workers, |&(g, h)| {
        Ok(MeanFieldRow { g, h, point: dominant_fixed_point(&MeanFieldParams::new(g, h)?, &opts) })
    })?;
    let per = rows.len() / curves;
    let mut abs = Plot::new("Order parameter of the stable fixed point", x_label, "|alpha|");
    let mut plane = Plot::new("Location of the stable fixed point", "x", "y");
    for chunk in rows.chunks(per) {
        let (label, xs): (String, Vec<f64>) = match sweep {
            MeanFieldSweep::G { .. } => (format!("h = {}", chunk[0].h), chunk.iter().map(|r| r.g).collect()),
            MeanFieldSweep::H { .. } => (format!("g = {}", chunk[0].g), chunk.iter().map(|r| r.h).collect()),
        };
        abs.add(Series::new(label.clone(), xs.iter().zip(chunk).map(|(x, r)| (*x, r.abs_alpha())).collect(), Style::Line));
        plane.add(Series::new(label, chunk.iter().map(|r| (r.point.location.x, r.point.location.y)).collect(), Style::Markers));
    }
    let mut table = report::meanfield_table(&rows);
    table.comment("rabi2p meanfield-sweep: stable fixed point with the largest |alpha| per (g, h)");
    Ok(Output { table, plots: vec![("plot.svg".into(), abs), ("plane.svg".into(), plane)] })
}

fn portrait(c: &PortraitConfig, workers: usize) -> Result<Output, CliError> {
    let mut params = MeanFieldParams::new(c.g, c.h)?;
    if let Some(eta) = c.eta {
        params = params.with_eta(eta)?;
    }
    let inits: Vec<InitialState> = (0..c.initial)
        .map(|k| {
            let th = TAU * k as f64 / c.initial as f64;
            InitialState::new(PhasePoint::new(c.radius * th.cos(), c.radius * th.sin()))
        })
        .collect();
    let trajectories = par_map(inits, workers, |init| integrate(init, &params, c.t_max, c.samples))?;
    let mut plot = Plot::new(format!("Phase portrait, g = {}, h = {}", c.g, c.h), "x", "y");
    plot.square = true;
    for (k, t) in trajectories.iter().enumerate() {
        plot.add(Series::new(format!("start {k}"), t.points.iter().map(|p| (p.x, p.y)).collect(), Style::Line));
    }
    let fixed = find_fixed_points(&MeanFieldParams::new(c.g, c.h)?);
    plot.add(Series::new("fixed points", fixed.iter().map(|f| (f.location.x, f.location.y)).collect(), Style::Markers));
    let mut table = report::trajectory_table(&trajectories);
    table.comment(format!(
        "rabi2p portrait: {} trajectories from radius {} up to t = {}{}",
        c.initial,
        c.radius,
        c.t_max,
        c.eta.map(|e| format!(", eta = {e}")).unwrap_or_default()
    ));
    Ok(Output { table, plots: vec![("plot.svg".into(), plot)] })
}

fn spectral(c: &SpectralConfig, gap: bool, workers: usize) -> Result<Output, CliError> {
    let points: Vec<(f64, f64, usize)> =
        c.zeta.iter().flat_map(|&z| c.g.values().into_iter().map(move |g| (g, z, c.fock_dim_for(z)))).collect();
    let opts = SpectrumOptions::default();
    let rows: Vec<SweepRow> = par_map(points, workers, |&(g, z, n)| {
        if gap {
            sweep_point(g, z, n, &opts)
        } else {
            photon_point(g, z, n, &opts)
        }
    })?;
    let per = c.g.steps;
    let mut plots = Vec::new();
    let mut ratio = Plot::new("Steady-state photon number", "g", "<a^dag a> / zeta");
    for chunk in rows.chunks(per) {
        ratio.add(Series::new(
            format!("zeta = {}", chunk[0].zeta),
            chunk.iter().filter_map(|r| Some((r.g, r.photon_ratio?))).collect(),
            Style::Line,
        ));
    }
    let mf: Vec<(f64, f64)> = c.g.values().into_iter().map(|g| (g, if g > 1.0 { (g * g - 1.0).sqrt() / 2.0 } else { 0.0 })).collect();
    ratio.add(Series::new("mean field", mf, Style::Dashed));
    if gap {
        let mut p = Plot::new("Liouvillian gap", "g", "Re[-Lambda]");
        p.log_y = true;
        for chunk in rows.chunks(per) {
            p.add(Series::new(
                format!("zeta = {}", chunk[0].zeta),
                chunk.iter().filter_map(|r| Some((r.g, r.gap?))).collect(),
                Style::Line,
            ));
        }
        plots.push(("plot.svg".into(), p));
        plots.push(("photon.svg".into(), ratio));
    } else {
        plots.push(("plot.svg".into(), ratio));
    }
    let mut table = report::spectral_table(&rows);
    table.comment(format!("rabi2p {}: effective oscillator model", if gap { "gap-sweep" } else { "photon-sweep" }));
    Ok(Output { table, plots })
}

fn cat(c: &CatConfig, sweep: bool, workers: usize) -> Result<Output, CliError> {
    let coeffs = c.coefficients();
    let results = par_map(c.protocols(), workers, |p| run_protocol(p, coeffs))?;
    for r in &results {
        if !r.diagnostics.converged {
            log::warn!("g_err = {}, zeta = {}: asymptotic correction did not settle", r.config.g_err, r.config.zeta);
        }
    }
    let plot = if sweep {
        let mut p = Plot::new("Passive error correction", "g_err", "fidelity");
        for chunk in results.chunks(c.g_err.len()) {
            let z = chunk[0].config.zeta;
            p.add(Series::new(format!("corrected, zeta = {z}"), chunk.iter().map(|r| (r.config.g_err, r.fidelity_corr)).collect(), Style::Line));
            p.add(Series::new(format!("after error, zeta = {z}"), chunk.iter().map(|r| (r.config.g_err, r.fidelity_err)).collect(), Style::Dashed));
        }
        p
    } else {
        let r = &results[0];
        let mut p = Plot::new(format!("Protocol stages, g_err = {}", r.config.g_err), "stage (0 target, 1 error, 2 corrected)", "fidelity");
        p.add(Series::new("fidelity", vec![(0.0, 1.0), (1.0, r.fidelity_err), (2.0, r.fidelity_corr)], Style::Markers));
        p
    };
    let mut table = report::protocol_table(&results);
    table.comment(format!("rabi2p {}", if sweep { "cat-sweep" } else { "cat-protocol" }));
    Ok(Output { table, plots: vec![("plot.svg".into(), plot)] })
}

pub fn compute(config: &RunConfig) -> Result<Output, CliError> {
    let w = config.parallel;
    match (&config.params, config.command) {
        (Params::MeanField(s), _) => meanfield_sweep(s, w),
        (Params::Portrait(c), _) => portrait(c, w),
        (Params::Spectral(c), cmd) => spectral(c, cmd == CommandKind::GapSweep, w),
        (Params::Cat(c), cmd) => cat(c, cmd == CommandKind::CatSweep, w),
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<FileEntry, CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    Ok(FileEntry { name: name.into(), bytes: bytes.len() as u64, sha256: hex::encode(Sha256::digest(bytes)) })
}

/// Computes the run and writes `data.csv`, the plots and `manifest.json`.
pub fn run(config: &RunConfig) -> Result<RunManifest, CliError> {
    let started = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let out = compute(config)?;
    let mut files = vec![write_file(dir, "data.csv", out.table.render().as_bytes())?];
    for (name, plot) in &out.plots {
        files.push(write_file(dir, name, plot.render().as_bytes())?);
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        started,
        finished: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
        rows: out.table.len(),
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Config(format!("manifest: {e}")))?;
    let path = dir.join("manifest.json");
    fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}
