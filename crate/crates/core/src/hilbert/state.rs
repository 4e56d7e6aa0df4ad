use std::fmt;

use ndarray::Array1;

use super::{DensityMatrix, FockSpace, SpaceTag, C64, ZERO};
use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-10;

/// Photon-number (or joint excitation) parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParityLabel {
    Even,
    Odd,
}

impl ParityLabel {
    pub fn of_count(n: usize) -> Self {
        if n % 2 == 0 {
            ParityLabel::Even
        } else {
            ParityLabel::Odd
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            ParityLabel::Even => 1.0,
            ParityLabel::Odd => -1.0,
        }
    }
}

impl fmt::Display for ParityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParityLabel::Even => "even",
            ParityLabel::Odd => "odd",
        })
    }
}

/// Unit-norm pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Array1<C64>,
    space: SpaceTag,
}

impl StateVector {
    pub fn new(amplitudes: Array1<C64>, space: SpaceTag) -> Result<Self> {
        check_len(&amplitudes, space)?;
        let norm = l2(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes, space })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Array1<C64>, space: SpaceTag) -> Result<Self> {
        check_len(&amplitudes, space)?;
        let norm = l2(&amplitudes);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroNorm(format!("cannot normalize vector of norm {norm}")));
        }
        Ok(Self { amplitudes: amplitudes / C64::new(norm, 0.0), space })
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn space(&self) -> SpaceTag {
        self.space
    }

    /// `<self|other>`
    pub fn overlap(&self, other: &StateVector) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!("{:?} vs {:?}", self.space, other.space)));
        }
        Ok(self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// `c1 |self> + c2 |other>`, renormalized.
    pub fn superpose(&self, c1: C64, other: &StateVector, c2: C64) -> Result<StateVector> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!("{:?} vs {:?}", self.space, other.space)));
        }
        let v = &self.amplitudes.mapv(|z| z * c1) + &other.amplitudes.mapv(|z| z * c2);
        StateVector::normalized(v, self.space)
    }
}

fn check_len(v: &Array1<C64>, space: SpaceTag) -> Result<()> {
    if v.len() != space.dim() {
        return Err(Error::Shape(format!(
            "vector of length {} for a space of dimension {}",
            v.len(),
            space.dim()
        )));
    }
    Ok(())
}

fn l2(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Smallest truncation that keeps a coherent state of amplitude `beta_abs`
/// accurate: `ceil(|beta|^2 + 6 |beta| + 10)`.
pub fn required_fock_dim(beta_abs: f64) -> usize {
    (beta_abs * beta_abs + 6.0 * beta_abs + 10.0).ceil() as usize
}

fn check_truncation(beta: C64, space: FockSpace) -> Result<()> {
    let required = required_fock_dim(beta.norm());
    if space.dim() < required {
        return Err(Error::TruncationInsufficient { required, actual: space.dim() });
    }
    Ok(())
}

fn coherent_amplitudes(beta: C64, n: usize) -> Array1<C64> {
    let mut c = Array1::from_elem(n, ZERO);
    c[0] = C64::new((-beta.norm_sqr() / 2.0).exp(), 0.0);
    for k in 1..n {
        c[k] = c[k - 1] * beta / (k as f64).sqrt();
    }
    c
}

/// Coherent state `|beta>` on a truncated oscillator, renormalized after
/// truncation.
pub fn coherent_state(beta: C64, space: FockSpace) -> Result<StateVector> {
    check_truncation(beta, space)?;
    StateVector::normalized(coherent_amplitudes(beta, space.dim()), SpaceTag::Oscillator(space))
}

/// Even or odd Schrödinger cat `(|beta> +/- |-beta>) / sqrt(2 (1 +/- exp(-2|beta|^2)))`.
///
/// The analytic normalizer is exact only without truncation; the result is
/// renormalized numerically.
pub fn cat_state(beta: C64, parity: ParityLabel, space: FockSpace) -> Result<StateVector> {
    check_truncation(beta, space)?;
    if parity == ParityLabel::Odd && beta.norm() == 0.0 {
        return Err(Error::ZeroNorm("the odd cat is undefined at beta = 0".into()));
    }
    let mut c = coherent_amplitudes(beta, space.dim());
    // |-beta> differs from |beta> only by the sign of odd amplitudes
    for (k, z) in c.iter_mut().enumerate() {
        let keep = ParityLabel::of_count(k) == parity;
        *z = if keep { *z * 2.0 } else { ZERO };
    }
    StateVector::normalized(c, SpaceTag::Oscillator(space))
}
