//! Flat `key = value` configuration with flag overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::path::PathBuf;

use rabi2p::catqec::{CodeCoefficients, CorrectionMode, ProtocolConfig};
use rabi2p::liouvillian::truncation_rule;
use rabi2p::meanfield::MeanFieldParams;
use rabi2p::C64;
use serde::Serialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    MeanfieldSweep,
    Portrait,
    GapSweep,
    PhotonSweep,
    CatProtocol,
    CatSweep,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::MeanfieldSweep => "meanfield-sweep",
            Self::Portrait => "portrait",
            Self::GapSweep => "gap-sweep",
            Self::PhotonSweep => "photon-sweep",
            Self::CatProtocol => "cat-protocol",
            Self::CatSweep => "cat-sweep",
        }
    }
}

/// Unvalidated key/value pairs; keys use underscores.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig(BTreeMap<String, String>);

fn normalize_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

impl RawConfig {
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value, got {line:?}", n + 1)))?;
            let k = normalize_key(k);
            if k.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key", n + 1)));
            }
            map.insert(k, v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(normalize_key(key), value.into());
    }

    /// Entries of `other` win.
    pub fn overlay(&mut self, other: RawConfig) {
        self.0.extend(other.0);
    }
}

struct Reader {
    raw: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

fn bad(key: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {why}"))
}

impl Reader {
    fn get(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.raw.get(key).cloned()
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key)
            .map(|v| {
                let x: f64 = v.parse().map_err(|_| bad(key, format!("cannot parse {v:?} as a number")))?;
                if !x.is_finite() {
                    return Err(bad(key, "must be finite"));
                }
                Ok(x)
            })
            .transpose()
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.opt_usize(key)?.unwrap_or(default))
    }

    fn opt_usize(&mut self, key: &str) -> Result<Option<usize>, CliError> {
        self.get(key).map(|v| v.parse().map_err(|_| bad(key, format!("cannot parse {v:?} as a count")))).transpose()
    }

    fn list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let Some(v) = self.get(key) else { return Ok(default.to_vec()) };
        let xs = v
            .split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad(key, format!("cannot parse {s:?} as a number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if xs.is_empty() {
            return Err(bad(key, "empty list"));
        }
        Ok(xs)
    }

    fn complex(&mut self, key: &str, default: f64) -> Result<C64, CliError> {
        match self.get(key) {
            None => Ok(C64::new(default, 0.0)),
            Some(v) => v.trim().parse::<C64>().map_err(|_| bad(key, format!("cannot parse {v:?} as a complex number"))),
        }
    }

    fn bool(&mut self, key: &str) -> Result<bool, CliError> {
        match self.get(key).as_deref() {
            None | Some("false") | Some("0") => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some(v) => Err(bad(key, format!("expected true or false, got {v:?}"))),
        }
    }

    fn finish(self, command: CommandKind) -> Result<(), CliError> {
        match self.raw.keys().find(|k| !self.used.contains(*k)) {
            Some(k) => Err(bad(k, format!("unknown key for {}", command.name()))),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    fn read(r: &mut Reader, prefix: &str, min: f64, max: f64, steps: usize) -> Result<Self, CliError> {
        let out = Self {
            min: r.f64(&format!("{prefix}_min"), min)?,
            max: r.f64(&format!("{prefix}_max"), max)?,
            steps: r.usize(&format!("{prefix}_steps"), steps)?,
        };
        if out.steps == 0 {
            return Err(bad(&format!("{prefix}_steps"), "must be at least 1"));
        }
        if out.max < out.min {
            return Err(bad(&format!("{prefix}_max"), format!("{} is below {prefix}_min = {}", out.max, out.min)));
        }
        if out.steps > 1 && out.max == out.min {
            return Err(bad(&format!("{prefix}_max"), "equals the minimum for a multi-point sweep"));
        }
        Ok(out)
    }

    pub fn values(&self) -> Vec<f64> {
        rabi2p::meanfield::linspace(self.min, self.max, self.steps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "axis", rename_all = "lowercase")]
pub enum MeanFieldSweep {
    /// `g` varies, one curve per `h`.
    G { g: Range, h: Vec<f64> },
    /// `h` varies, one curve per `g`.
    H { h: Range, g: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PortraitConfig {
    pub g: f64,
    pub h: f64,
    pub eta: Option<f64>,
    pub t_max: f64,
    pub samples: usize,
    pub initial: usize,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralConfig {
    pub g: Range,
    pub zeta: Vec<f64>,
    pub fock_dim: Option<usize>,
}

impl SpectralConfig {
    /// Truncation per `zeta`.
    pub fn fock_dim_for(&self, zeta: f64) -> usize {
        self.fock_dim.unwrap_or_else(|| truncation_rule(zeta, self.g.max))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatConfig {
    pub g_target: f64,
    /// One value for `cat-protocol`; the swept values for `cat-sweep`.
    pub g_err: Vec<f64>,
    pub zeta: Vec<f64>,
    pub tau: f64,
    pub t_corr: f64,
    pub fock_dim: Option<usize>,
    pub ce: [f64; 2],
    pub co: [f64; 2],
    pub asymptotic: bool,
}

impl CatConfig {
    pub fn coefficients(&self) -> CodeCoefficients {
        CodeCoefficients { c_e: C64::new(self.ce[0], self.ce[1]), c_o: C64::new(self.co[0], self.co[1]) }
    }

    /// Protocol runs in output order: `zeta` outer, `g_err` inner.
    pub fn protocols(&self) -> Vec<ProtocolConfig> {
        self.zeta
            .iter()
            .flat_map(|&zeta| {
                self.g_err.iter().map(move |&g_err| ProtocolConfig {
                    g_target: self.g_target,
                    g_err,
                    tau: self.tau,
                    t_corr: self.t_corr,
                    zeta,
                    fock_dim: self.fock_dim,
                    mode: if self.asymptotic { CorrectionMode::Asymptotic } else { CorrectionMode::Fixed },
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    MeanField(MeanFieldSweep),
    Portrait(PortraitConfig),
    Spectral(SpectralConfig),
    Cat(CatConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: Params,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub parallel: usize,
}

fn core_error(e: rabi2p::Error) -> CliError {
    match e {
        rabi2p::Error::InvalidParameter { name, reason } => bad(&name, reason),
        other => CliError::Config(other.to_string()),
    }
}

fn non_negative(key: &str, xs: &[f64]) -> Result<(), CliError> {
    match xs.iter().find(|x| **x < 0.0) {
        Some(x) => Err(bad(key, format!("must be non-negative, got {x}"))),
        None => Ok(()),
    }
}

fn positive(key: &str, xs: &[f64]) -> Result<(), CliError> {
    match xs.iter().find(|x| **x <= 0.0) {
        Some(x) => Err(bad(key, format!("must be positive, got {x}"))),
        None => Ok(()),
    }
}

fn check_fock(fock_dim: Option<usize>, zetas: &[f64], g_max: f64) -> Result<(), CliError> {
    if let Some(n) = fock_dim {
        for &z in zetas {
            let need = truncation_rule(z, g_max);
            if n < need {
                return Err(bad("fock_dim", format!("{n} is below the {need} levels required at zeta = {z}, g = {g_max}")));
            }
        }
    }
    Ok(())
}

fn read_params(command: CommandKind, r: &mut Reader) -> Result<Params, CliError> {
    Ok(match command {
        CommandKind::MeanfieldSweep => {
            let axis = r.get("axis").unwrap_or_else(|| "g".into());
            let sweep = match axis.as_str() {
                "g" => MeanFieldSweep::G { g: Range::read(r, "g", 0.0, 2.0, 201)?, h: r.list("h", &[1.0])? },
                "h" => MeanFieldSweep::H { h: Range::read(r, "h", 0.0, 10.0, 201)?, g: r.list("g", &[1.5])? },
                other => return Err(bad("axis", format!("expected g or h, got {other:?}"))),
            };
            let (gs, hs) = match &sweep {
                MeanFieldSweep::G { g, h } => (vec![g.min, g.max], h.clone()),
                MeanFieldSweep::H { h, g } => (g.clone(), vec![h.min, h.max]),
            };
            non_negative("g", &gs)?;
            non_negative("h", &hs)?;
            Params::MeanField(sweep)
        }
        CommandKind::Portrait => {
            let c = PortraitConfig {
                g: r.f64("g", 0.6)?,
                h: r.f64("h", 0.25)?,
                eta: r.opt_f64("eta")?,
                t_max: r.f64("t_max", 200.0)?,
                samples: r.usize("samples", 2000)?,
                initial: r.usize("initial", 8)?,
                radius: r.f64("radius", 1.0)?,
            };
            let p = MeanFieldParams::new(c.g, c.h).map_err(core_error)?;
            if let Some(eta) = c.eta {
                p.with_eta(eta).map_err(core_error)?;
            }
            positive("t_max", &[c.t_max])?;
            positive("radius", &[c.radius])?;
            if c.samples == 0 {
                return Err(bad("samples", "must be at least 1"));
            }
            if c.initial == 0 {
                return Err(bad("initial", "must be at least 1"));
            }
            Params::Portrait(c)
        }
        CommandKind::GapSweep | CommandKind::PhotonSweep => {
            let c = SpectralConfig {
                g: Range::read(r, "g", 0.5, 2.0, 31)?,
                zeta: r.list("zeta", &[10.0, 20.0, 30.0])?,
                fock_dim: r.opt_usize("fock_dim")?,
            };
            non_negative("g_min", &[c.g.min])?;
            positive("zeta", &c.zeta)?;
            check_fock(c.fock_dim, &c.zeta, c.g.max)?;
            Params::Spectral(c)
        }
        CommandKind::CatProtocol | CommandKind::CatSweep => {
            let g_target = r.f64("g_target", SQRT_2)?;
            let (g_err, zeta) = if command == CommandKind::CatProtocol {
                (vec![r.f64("g_err", 0.5)?], vec![r.f64("zeta", 30.0)?])
            } else {
                (Range::read(r, "g", 0.2, 2.0, 19)?.values(), r.list("zeta", &[30.0])?)
            };
            let ce = r.complex("ce", FRAC_1_SQRT_2)?;
            let co = r.complex("co", FRAC_1_SQRT_2)?;
            let c = CatConfig {
                g_target,
                g_err,
                zeta,
                tau: r.f64("tau", 1.0)?,
                t_corr: r.f64("t_corr", 1.0)?,
                fock_dim: r.opt_usize("fock_dim")?,
                ce: [ce.re, ce.im],
                co: [co.re, co.im],
                asymptotic: r.bool("asymptotic")?,
            };
            CodeCoefficients::new(ce, co).map_err(|e| bad("ce", format!("{e} (with co)")))?;
            for p in c.protocols() {
                p.validate().map_err(core_error)?;
            }
            let g_max = c.g_err.iter().cloned().fold(c.g_target, f64::max);
            check_fock(c.fock_dim, &c.zeta, g_max)?;
            Params::Cat(c)
        }
    })
}

/// Builds a validated configuration. Keys present in `flags` override
/// those from the file.
pub fn parse_config(command: CommandKind, file: Option<RawConfig>, flags: RawConfig) -> Result<RunConfig, CliError> {
    let mut raw = file.unwrap_or_default();
    raw.overlay(flags);
    let mut r = Reader { raw: raw.0, used: BTreeSet::new() };
    let params = read_params(command, &mut r)?;
    let output_dir = r.get("out").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs").join(command.name()));
    let seed = r.get("seed").map(|v| v.parse().map_err(|_| bad("seed", format!("cannot parse {v:?}")))).transpose()?.unwrap_or(0);
    let parallel = match r.opt_usize("parallel")? {
        Some(0) => return Err(bad("parallel", "must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    r.finish(command)?;
    Ok(RunConfig { command, params, output_dir, seed, parallel })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(pairs: &[(&str, &str)]) -> RawConfig {
        let mut r = RawConfig::default();
        for (k, v) in pairs {
            r.set(k, *v);
        }
        r
    }

    #[test]
    fn file_syntax() {
        let r = RawConfig::parse("# comment\n\ng-err = 0.7\nzeta=20\n").unwrap();
        assert_eq!(r, flags(&[("g_err", "0.7"), ("zeta", "20")]));
        assert!(RawConfig::parse("zeta 20").is_err());
    }

    #[test]
    fn cat_defaults() {
        let c = parse_config(CommandKind::CatProtocol, None, RawConfig::default()).unwrap();
        let Params::Cat(cat) = c.params else { panic!() };
        assert_eq!(cat.g_target, SQRT_2);
        assert_eq!((cat.tau, cat.t_corr), (1.0, 1.0));
        assert_eq!(cat.zeta, vec![30.0]);
        assert_eq!(cat.ce, [FRAC_1_SQRT_2, 0.0]);
    }

    #[test]
    fn flags_override_file() {
        let file = RawConfig::parse("g_err = 1.5\ntau = 2").unwrap();
        let c = parse_config(CommandKind::CatProtocol, Some(file), flags(&[("g-err", "0.5")])).unwrap();
        let Params::Cat(cat) = c.params else { panic!() };
        assert_eq!(cat.g_err, vec![0.5]);
        assert_eq!(cat.tau, 2.0);
    }

    #[test]
    fn errors_name_the_key() {
        let cases: [(CommandKind, &[(&str, &str)], &str); 7] = [
            (CommandKind::CatProtocol, &[("zeta", "-1")], "zeta"),
            (CommandKind::GapSweep, &[("zeta", "10,x")], "zeta"),
            (CommandKind::Portrait, &[("g_err", "1")], "g_err"),
            (CommandKind::MeanfieldSweep, &[("h", "-2")], "h"),
            (CommandKind::GapSweep, &[("fock_dim", "20")], "fock_dim"),
            (CommandKind::CatProtocol, &[("ce", "1"), ("co", "1")], "ce"),
            (CommandKind::CatProtocol, &[("g_target", "1.2")], "g_target"),
        ];
        for (cmd, f, key) in cases {
            let e = parse_config(cmd, None, flags(f)).unwrap_err();
            assert_eq!(e.exit_code(), 2);
            assert!(e.to_string().contains(key), "{e} should name {key}");
        }
    }

    #[test]
    fn sweep_axes() {
        let c = parse_config(CommandKind::MeanfieldSweep, None, flags(&[("axis", "h"), ("g", "1.2,1.5")])).unwrap();
        assert_eq!(
            c.params,
            Params::MeanField(MeanFieldSweep::H { h: Range { min: 0.0, max: 10.0, steps: 201 }, g: vec![1.2, 1.5] })
        );
        let c = parse_config(CommandKind::MeanfieldSweep, None, RawConfig::default()).unwrap();
        let Params::MeanField(MeanFieldSweep::G { g, .. }) = c.params else { panic!() };
        assert_eq!(g.values().len(), 201);
    }
}
