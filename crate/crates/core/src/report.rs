//! CSV tables for sweep and protocol output.
//!
//! Every table starts with `#` lines describing each column, followed by a
//! header row and comma-separated records. Floats carry 17 significant
//! digits; absent values are empty fields.

use std::fmt::Write as _;
use std::io;

use crate::catqec::ProtocolResult;
use crate::liouvillian::SweepRow as SpectralRow;
use crate::meanfield::{SweepRow as MeanFieldRow, Trajectory};

/// Negative zero prints as zero.
pub fn float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    comments: Vec<String>,
    columns: Vec<(&'static str, &'static str)>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    /// Columns as `(name, description)` pairs.
    pub fn new(columns: &[(&'static str, &'static str)]) -> Self {
        Self { comments: Vec::new(), columns: columns.to_vec(), rows: Vec::new() }
    }

    /// Extra `#` line written before the column descriptions.
    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_names(&self) -> Vec<&'static str> {
        self.columns.iter().map(|c| c.0).collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        for (name, desc) in &self.columns {
            let _ = writeln!(s, "# {name}: {desc}");
        }
        s.push_str(&self.column_names().join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write_to<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.render().as_bytes())
    }
}

pub fn meanfield_table(rows: &[MeanFieldRow]) -> CsvTable {
    let mut t = CsvTable::new(&[
        ("g", "dimensionless coupling"),
        ("h", "dimensionless two-photon decay rate"),
        ("x", "Re alpha of the reported fixed point"),
        ("y", "Im alpha of the reported fixed point"),
        ("abs_alpha", "|alpha|"),
        ("stability", "stable, unstable, marginal-linearization or stable-by-lyapunov"),
        ("jacobian_re1", "real part of the first Jacobian eigenvalue"),
        ("jacobian_im1", "imaginary part of the first Jacobian eigenvalue"),
        ("jacobian_re2", "real part of the second Jacobian eigenvalue"),
        ("jacobian_im2", "imaginary part of the second Jacobian eigenvalue"),
    ]);
    for r in rows {
        let p = &r.point;
        let [e1, e2] = p.jacobian_eigenvalues;
        t.push(vec![
            float(r.g),
            float(r.h),
            float(p.location.x),
            float(p.location.y),
            float(p.location.abs()),
            p.stability.label().to_string(),
            float(e1.re),
            float(e1.im),
            float(e2.re),
            float(e2.im),
        ]);
    }
    t
}

pub fn spectral_table(rows: &[SpectralRow]) -> CsvTable {
    let mut t = CsvTable::new(&[
        ("g", "dimensionless coupling"),
        ("zeta", "omega0 / kappa"),
        ("fock_dim", "oscillator truncation"),
        ("gap", "Re[-Lambda] of the slowest non-stationary mode"),
        ("degeneracy", "eigenvalues with |Re| <= 1e-8"),
        ("photon_ratio", "<a^dag a> / zeta in the ee steady state"),
    ]);
    for r in rows {
        t.push(vec![
            float(r.g),
            float(r.zeta),
            r.fock_dim.to_string(),
            opt_float(r.gap),
            r.degeneracy.map(|d| d.to_string()).unwrap_or_default(),
            opt_float(r.photon_ratio),
        ]);
    }
    t
}

pub fn protocol_table(results: &[ProtocolResult]) -> CsvTable {
    let mut t = CsvTable::new(&[
        ("g_target", "operating coupling"),
        ("g_err", "drifted coupling"),
        ("tau", "error duration"),
        ("t_corr", "correction duration actually used"),
        ("zeta", "omega0 / kappa"),
        ("fock_dim", "oscillator truncation"),
        ("c_e_re", "Re c_e"),
        ("c_e_im", "Im c_e"),
        ("c_o_re", "Re c_o"),
        ("c_o_im", "Im c_o"),
        ("fidelity_err", "F(rho_target, rho_err)"),
        ("fidelity_corr", "F(rho_target, rho_corr)"),
    ]);
    for r in results {
        let c = r.code.coefficients();
        t.push(vec![
            float(r.config.g_target),
            float(r.config.g_err),
            float(r.config.tau),
            float(r.t_corr),
            float(r.config.zeta),
            r.fock_dim.to_string(),
            float(c.c_e.re),
            float(c.c_e.im),
            float(c.c_o.re),
            float(c.c_o.im),
            float(r.fidelity_err),
            float(r.fidelity_corr),
        ]);
    }
    t
}

/// Spin columns are empty for the reduced system.
pub fn trajectory_table(trajectories: &[Trajectory]) -> CsvTable {
    let mut t = CsvTable::new(&[
        ("trajectory", "index of the initial condition"),
        ("t", "renormalized time omega0 t"),
        ("x", "Re alpha"),
        ("y", "Im alpha"),
        ("abs_alpha", "|alpha|"),
        ("sp_re", "Re <sigma_+>"),
        ("sp_im", "Im <sigma_+>"),
        ("sz", "<sigma_z>"),
    ]);
    for (k, tr) in trajectories.iter().enumerate() {
        for (i, (time, p)) in tr.times.iter().zip(&tr.points).enumerate() {
            let s = tr.spins.as_ref().map(|s| s[i]);
            t.push(vec![
                k.to_string(),
                float(*time),
                float(p.x),
                float(p.y),
                float(p.abs()),
                opt_float(s.map(|s| s.sp.re)),
                opt_float(s.map(|s| s.sp.im)),
                opt_float(s.map(|s| s.sz)),
            ]);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI] {
            let s = float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn layout() {
        let mut t = CsvTable::new(&[("a", "first"), ("b", "second")]);
        t.comment("run 1");
        t.push(vec!["1".into(), "".into()]);
        assert_eq!(t.render(), "# run 1\n# a: first\n# b: second\na,b\n1,\n");
    }

    #[test]
    fn spectral_missing_fields_are_empty() {
        let row = SpectralRow { g: 1.0, zeta: 30.0, fock_dim: 73, gap: None, degeneracy: None, photon_ratio: Some(0.5) };
        let s = spectral_table(&[row]).render();
        let last = s.lines().last().unwrap();
        assert_eq!(last, "1.0000000000000000e0,3.0000000000000000e1,73,,,5.0000000000000000e-1");
    }
}
