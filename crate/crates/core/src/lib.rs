//! Numerical engines for Markovian open quantum systems.
//!
//! * [`ops`]: dense complex operator algebra (tensor products, partial traces,
//!   eigendecompositions, matrix exponentials, spin and fermion operators).
//! * [`weakcoupling`]: microscopic construction of secular Lindblad generators
//!   from a system Hamiltonian, coupling operators and bath spectral data, plus
//!   the Pauli rate equation for populations.
//! * [`liouvillian`]: the GKSL generator in diagonal form, its superoperator,
//!   propagation, steady states, spectra, Kraus maps, gauge freedom, the
//!   commutant uniqueness test and quantum-jump trajectories.
//! * [`collision`]: repeated-interaction (collision) models and their
//!   continuum limit.
//! * [`fermigauss`]: quadratic fermions with boundary driving, reduced to a
//!   Lyapunov equation for the two-point correlation matrix.
//! * [`lattloss`]: hard-core bosons with K-body losses.
//! * [`spinchain`]: boundary-driven XXZ chains.
//!
//! Units: `hbar = 1`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod collision;
pub mod error;
pub mod fermigauss;
pub mod lattloss;
pub mod liouvillian;
pub mod ops;
pub mod random;
pub mod spinchain;
pub mod weakcoupling;

pub use error::{Error, Result};
pub use liouvillian::{KrausMap, LindbladModel, Superoperator};
pub use ops::{CMatrix, CVector, DensityMatrix, Hermitian, C64};

/// Crate version, recorded in experiment metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
