use crate::error::{Error, Result};

/// Physical frequencies of the qubit-oscillator model.
///
/// `omega0` is the oscillator frequency, `omega` the qubit splitting,
/// `lambda` the coupling and `kappa` the two-photon decay rate. The
/// dimensionless controls are derived on demand:
///
/// * `g = 2 lambda / sqrt(omega0 omega)`
/// * `eta = omega / omega0`
/// * `zeta = omega0 / kappa`
/// * `h = eta / zeta`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    omega0: f64,
    omega: f64,
    lambda: f64,
    kappa: f64,
}

impl SystemParams {
    pub fn new(omega0: f64, omega: f64, lambda: f64, kappa: f64) -> Result<Self> {
        for (name, v) in [("omega0", omega0), ("omega", omega), ("lambda", lambda), ("kappa", kappa)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and positive, got {v}")));
            }
        }
        Ok(Self { omega0, omega, lambda, kappa })
    }

    /// Builds the parameters with `omega0 = 1` from the dimensionless controls.
    pub fn from_dimensionless(g: f64, eta: f64, zeta: f64) -> Result<Self> {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::param("g", format!("must be finite and positive, got {g}")));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::param("eta", format!("must be finite and positive, got {eta}")));
        }
        if !(zeta.is_finite() && zeta > 0.0) {
            return Err(Error::param("zeta", format!("must be finite and positive, got {zeta}")));
        }
        Self::new(1.0, eta, g * eta.sqrt() / 2.0, 1.0 / zeta)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn g(&self) -> f64 {
        2.0 * self.lambda / (self.omega0 * self.omega).sqrt()
    }

    pub fn eta(&self) -> f64 {
        self.omega / self.omega0
    }

    pub fn zeta(&self) -> f64 {
        self.omega0 / self.kappa
    }

    pub fn h(&self) -> f64 {
        self.eta() / self.zeta()
    }

    /// Same physics with time measured in units of `1/omega0`.
    pub fn normalized(&self) -> Self {
        let s = self.omega0;
        Self {
            omega0: 1.0,
            omega: self.omega / s,
            lambda: self.lambda / s,
            kappa: self.kappa / s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn derived_quantities() {
        let p = SystemParams::new(2.0, 50.0, 3.0, 0.1).unwrap();
        assert!(rel(p.g(), 2.0 * 3.0 / (100.0f64).sqrt()) < 1e-12);
        assert!(rel(p.eta(), 25.0) < 1e-12);
        assert!(rel(p.zeta(), 20.0) < 1e-12);
        assert!(rel(p.h(), 0.1 * 50.0 / 4.0) < 1e-12);
    }

    #[test]
    fn dimensionless_round_trip() {
        let p = SystemParams::from_dimensionless(1.5, 40.0, 30.0).unwrap();
        assert!(rel(p.g(), 1.5) < 1e-12);
        assert!(rel(p.eta(), 40.0) < 1e-12);
        assert!(rel(p.zeta(), 30.0) < 1e-12);
        assert!(rel(p.h(), 40.0 / 30.0) < 1e-12);
    }

    #[test]
    fn normalization_keeps_controls() {
        let p = SystemParams::new(3.0, 12.0, 1.0, 0.5).unwrap();
        let n = p.normalized();
        assert_eq!(n.omega0(), 1.0);
        assert!(rel(n.g(), p.g()) < 1e-12);
        assert!(rel(n.h(), p.h()) < 1e-12);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(SystemParams::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
        assert!(matches!(
            SystemParams::new(1.0, 1.0, 1.0, 0.0),
            Err(Error::InvalidParameter { name: "kappa", .. })
        ));
    }
}
