//! Truncated Fock-space operator algebra for a qubit coupled to one oscillator.
//!
//! Conventions used throughout the crate:
//!
//! * the oscillator keeps the levels `|0>, ..., |N-1>`;
//! * composite operators are ordered qubit-first, so the joint basis index is
//!   `q * N + n` with qubit index `0 = |up>` (sigma_z = +1) and `1 = |down>`;
//! * density matrices are vectorized by stacking columns, element `(i, j)`
//!   going to index `j * d + i`.

mod density;
mod params;
mod state;

pub use density::{
    devectorize, expectation, fidelity, fidelity_matrices, vectorize, DensityMatrix, Repair,
    HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL,
};
pub use params::SystemParams;
pub use state::{
    cat_state, coherent_state, required_fock_dim, ParityLabel, StateVector, NORM_TOL,
};

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Oscillator Hilbert space truncated to `dim` Fock levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension { dim, min: 2 });
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Which space an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceTag {
    Oscillator(FockSpace),
    QubitOscillator(FockSpace),
}

impl SpaceTag {
    pub fn dim(&self) -> usize {
        match self {
            SpaceTag::Oscillator(f) => f.dim(),
            SpaceTag::QubitOscillator(f) => 2 * f.dim(),
        }
    }

    pub fn fock(&self) -> FockSpace {
        match self {
            SpaceTag::Oscillator(f) | SpaceTag::QubitOscillator(f) => *f,
        }
    }

    /// Parity eigenvalue (+1 or -1) of each basis state.
    ///
    /// For the oscillator alone this is `(-1)^n`; for the composite space it is
    /// `(-1)^(n + q)` with `q = 1` for the excited qubit.
    pub fn basis_parities(&self) -> Vec<ParityLabel> {
        let n = self.fock().dim();
        match self {
            SpaceTag::Oscillator(_) => (0..n).map(ParityLabel::of_count).collect(),
            SpaceTag::QubitOscillator(_) => (0..2 * n)
                .map(|k| {
                    let excitation = if k < n { 1 } else { 0 };
                    ParityLabel::of_count(k % n + excitation)
                })
                .collect(),
        }
    }
}

/// A square complex matrix tagged with the space it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    entries: Array2<C64>,
    space: SpaceTag,
}

impl OperatorMatrix {
    pub fn new(entries: Array2<C64>, space: SpaceTag) -> Result<Self> {
        let d = space.dim();
        if entries.dim() != (d, d) {
            return Err(Error::Shape(format!(
                "operator of shape {:?} does not match space dimension {d}",
                entries.dim()
            )));
        }
        Ok(Self { entries, space })
    }

    pub fn identity(space: SpaceTag) -> Self {
        Self { entries: Array2::eye(space.dim()), space }
    }

    pub fn zeros(space: SpaceTag) -> Self {
        let d = space.dim();
        Self { entries: Array2::zeros((d, d)), space }
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    pub fn space(&self) -> SpaceTag {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.t().mapv(|z| z.conj()), space: self.space }
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!("{:?} vs {:?}", self.space, other.space)));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self { entries: self.entries.dot(&other.entries), space: self.space })
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self { entries: &self.entries + &other.entries, space: self.space })
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self { entries: &self.entries - &other.entries, space: self.space })
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { entries: self.entries.mapv(|z| z * factor), space: self.space }
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.minus(&other.matmul(self)?)
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.entries)
    }
}

pub(crate) fn hermiticity_defect(m: &Array2<C64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Ladder operator `a` with `a[n-1, n] = sqrt(n)`.
pub fn annihilation_op(space: FockSpace) -> OperatorMatrix {
    let n = space.dim();
    let mut a = Array2::zeros((n, n));
    for k in 1..n {
        a[[k - 1, k]] = C64::new((k as f64).sqrt(), 0.0);
    }
    OperatorMatrix { entries: a, space: SpaceTag::Oscillator(space) }
}

pub fn creation_op(space: FockSpace) -> OperatorMatrix {
    annihilation_op(space).adjoint()
}

pub fn number_op(space: FockSpace) -> OperatorMatrix {
    let n = space.dim();
    let mut m = Array2::zeros((n, n));
    for k in 0..n {
        m[[k, k]] = C64::new(k as f64, 0.0);
    }
    OperatorMatrix { entries: m, space: SpaceTag::Oscillator(space) }
}

/// Pauli matrices in the `(|up>, |down>)` basis.
pub mod pauli {
    use super::{C64, I, ONE, ZERO};
    use ndarray::{array, Array2};

    pub fn identity() -> Array2<C64> {
        array![[ONE, ZERO], [ZERO, ONE]]
    }

    pub fn sigma_x() -> Array2<C64> {
        array![[ZERO, ONE], [ONE, ZERO]]
    }

    pub fn sigma_y() -> Array2<C64> {
        array![[ZERO, -I], [I, ZERO]]
    }

    pub fn sigma_z() -> Array2<C64> {
        array![[ONE, ZERO], [ZERO, -ONE]]
    }

    /// `|up><down|`
    pub fn sigma_plus() -> Array2<C64> {
        array![[ZERO, ONE], [ZERO, ZERO]]
    }

    pub fn sigma_minus() -> Array2<C64> {
        array![[ZERO, ZERO], [ONE, ZERO]]
    }
}

/// Dense Kronecker product `a (x) b`.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == ZERO {
                continue;
            }
            let mut block = out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            block.zip_mut_with(b, |o, &bv| *o = aij * bv);
        }
    }
    out
}

/// Lift a qubit operator and an oscillator operator to the composite space,
/// qubit index outermost.
pub fn tensor_qubit_oscillator(
    qubit_op: &Array2<C64>,
    osc_op: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    if qubit_op.dim() != (2, 2) {
        return Err(Error::Shape(format!("qubit operator has shape {:?}", qubit_op.dim())));
    }
    let fock = match osc_op.space {
        SpaceTag::Oscillator(f) => f,
        other => {
            return Err(Error::SpaceMismatch(format!(
                "expected an oscillator-only operator, got {other:?}"
            )))
        }
    };
    Ok(OperatorMatrix {
        entries: kron(qubit_op, &osc_op.entries),
        space: SpaceTag::QubitOscillator(fock),
    })
}

/// Diagonal parity operator: `(-1)^n` on the oscillator, `(-1)^(n+q)` on the
/// composite space.
pub fn parity_operator(space: SpaceTag) -> OperatorMatrix {
    let parities = space.basis_parities();
    let mut m = Array2::zeros((space.dim(), space.dim()));
    for (k, p) in parities.iter().enumerate() {
        m[[k, k]] = C64::new(p.sign(), 0.0);
    }
    OperatorMatrix { entries: m, space }
}

/// Two-photon jump operator `a^2` on the requested space.
pub fn two_photon_jump(space: SpaceTag) -> OperatorMatrix {
    let fock = space.fock();
    let a = annihilation_op(fock);
    let a2 = a.matmul(&a).expect("same space");
    match space {
        SpaceTag::Oscillator(_) => a2,
        SpaceTag::QubitOscillator(_) => {
            tensor_qubit_oscillator(&pauli::identity(), &a2).expect("oscillator operator")
        }
    }
}

/// Rabi Hamiltonian in units of the oscillator frequency:
/// `a^dag a + (eta/2) sigma_z - (lambda/omega0) (a + a^dag) sigma_x`.
pub fn rabi_hamiltonian(params: &SystemParams, fock: FockSpace) -> OperatorMatrix {
    let p = params.normalized();
    let a = annihilation_op(fock);
    let ad = a.adjoint();
    let num = number_op(fock);
    let eye = OperatorMatrix::identity(SpaceTag::Oscillator(fock));
    let x = a.plus(&ad).expect("same space");

    let field = tensor_qubit_oscillator(&pauli::identity(), &num).expect("oscillator");
    let qubit = tensor_qubit_oscillator(&pauli::sigma_z(), &eye).expect("oscillator");
    let coupling = tensor_qubit_oscillator(&pauli::sigma_x(), &x).expect("oscillator");

    field
        .plus(&qubit.scaled(C64::new(p.omega() / 2.0, 0.0)))
        .and_then(|h| h.minus(&coupling.scaled(C64::new(p.lambda(), 0.0))))
        .expect("same space")
}

/// Effective oscillator Hamiltonian after eliminating the qubit, in units of
/// the oscillator frequency: `(1 - g^2/2) a^dag a - (g^2/4) (a^2 + a^dag^2)`.
pub fn effective_hamiltonian(g: f64, fock: FockSpace) -> OperatorMatrix {
    let a = annihilation_op(fock);
    let a2 = a.matmul(&a).expect("same space");
    let squeeze = a2.plus(&a2.adjoint()).expect("same space");
    number_op(fock)
        .scaled(C64::new(1.0 - g * g / 2.0, 0.0))
        .minus(&squeeze.scaled(C64::new(g * g / 4.0, 0.0)))
        .expect("same space")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fock(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    #[test]
    fn fock_space_rejects_tiny_dims() {
        assert!(matches!(FockSpace::new(1), Err(Error::InvalidDimension { dim: 1, .. })));
        assert!(FockSpace::new(0).is_err());
    }

    #[test]
    fn smallest_ladder() {
        let a = annihilation_op(fock(2));
        let e = a.entries();
        assert_eq!(e[[0, 1]], ONE);
        assert_eq!(e[[0, 0]], ZERO);
        assert_eq!(e[[1, 0]], ZERO);
        assert_eq!(e[[1, 1]], ZERO);
    }

    #[test]
    fn number_operator_spectrum() {
        let f = fock(4);
        let a = annihilation_op(f);
        let n = a.adjoint().matmul(&a).unwrap();
        for k in 0..4 {
            assert!((n.entries()[[k, k]] - C64::new(k as f64, 0.0)).norm() < 1e-14);
        }
        assert!((n.max_abs() - 3.0).abs() < 1e-14);
        assert!(n.minus(&number_op(f)).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn truncated_commutator() {
        let f = fock(50);
        let a = annihilation_op(f);
        let c = a.commutator(&a.adjoint()).unwrap();
        for i in 0..50 {
            for j in 0..50 {
                let expected = if i != j {
                    0.0
                } else if i == 49 {
                    1.0 - 50.0
                } else {
                    1.0
                };
                assert!((c.entries()[[i, j]] - C64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn tensor_products() {
        let f = fock(3);
        let eye = OperatorMatrix::identity(SpaceTag::Oscillator(f));
        let id = tensor_qubit_oscillator(&pauli::identity(), &eye).unwrap();
        assert_eq!(id.entries(), &Array2::<C64>::eye(6));

        let z = tensor_qubit_oscillator(&pauli::sigma_z(), &OperatorMatrix::identity(SpaceTag::Oscillator(fock(2)))).unwrap();
        let diag: Vec<f64> = z.entries().diag().iter().map(|c| c.re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);

        let xa = tensor_qubit_oscillator(&pauli::sigma_x(), &annihilation_op(f)).unwrap();
        assert_eq!(xa.trace(), ZERO);
    }

    #[test]
    fn tensor_rejects_composite_input() {
        let f = fock(3);
        let comp = OperatorMatrix::identity(SpaceTag::QubitOscillator(f));
        assert!(matches!(
            tensor_qubit_oscillator(&pauli::sigma_x(), &comp),
            Err(Error::SpaceMismatch(_))
        ));
        let a = annihilation_op(f);
        assert!(a.matmul(&comp).is_err());
    }

    #[test]
    fn parity_is_an_involution() {
        let p = parity_operator(SpaceTag::Oscillator(fock(2)));
        assert_eq!(p.entries().diag().to_vec(), vec![ONE, -ONE]);
        for tag in [SpaceTag::Oscillator(fock(7)), SpaceTag::QubitOscillator(fock(7))] {
            let p = parity_operator(tag);
            let p2 = p.matmul(&p).unwrap();
            assert_eq!(p2.minus(&OperatorMatrix::identity(tag)).unwrap().max_abs(), 0.0);
        }
        // excited qubit with zero photons has odd joint parity
        let pq = parity_operator(SpaceTag::QubitOscillator(fock(3)));
        assert_eq!(pq.entries()[[0, 0]], -ONE);
        assert_eq!(pq.entries()[[3, 3]], ONE);
    }

    #[test]
    fn rabi_hamiltonian_commutes_with_parity() {
        let f = fock(20);
        let params = SystemParams::new(1.3, 7.0, 2.1, 0.2).unwrap();
        let h = rabi_hamiltonian(&params, f);
        assert!(h.hermiticity_defect() < 1e-14);
        let p = parity_operator(SpaceTag::QubitOscillator(f));
        assert!(h.commutator(&p).unwrap().max_abs() < 1e-12);
        let a2 = two_photon_jump(SpaceTag::QubitOscillator(f));
        assert!(a2.commutator(&p).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn effective_hamiltonian_number_term_vanishes_at_sqrt2() {
        let f = fock(6);
        let h = effective_hamiltonian(2f64.sqrt(), f);
        for k in 0..6 {
            assert!(h.entries()[[k, k]].norm() < 1e-14);
        }
        let h0 = effective_hamiltonian(0.0, f);
        assert_eq!(h0.minus(&number_op(f)).unwrap().max_abs(), 0.0);
    }
}
