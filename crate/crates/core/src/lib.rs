//! Open quantum Rabi model with two-photon relaxation.
//!
//! * [`hilbert`]: truncated Fock-space operators, states and density matrices.
//! * [`meanfield`]: semiclassical equations of motion, fixed points and
//!   stability.
//! * [`liouvillian`]: sparse superoperators, parity-resolved spectra and time
//!   evolution.
//! * [`catqec`]: passive error correction of a cat qubit.
//! * [`report`]: CSV tables for all of the above.

pub mod catqec;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod liouvillian;
pub mod meanfield;
pub mod report;

pub use catqec::{CatQubitCode, CodeCoefficients, CorrectionMode, ProtocolConfig, ProtocolResult};
pub use error::{Error, Result};
pub use hilbert::{DensityMatrix, FockSpace, OperatorMatrix, SpaceTag, StateVector, SystemParams, C64};
pub use liouvillian::{EffectiveParams, Sector, SpectrumOptions, SpectrumResult, Superoperator};
pub use meanfield::{FixedPointReport, MeanFieldParams, PhasePoint, SpinState, Stability, Trajectory};
