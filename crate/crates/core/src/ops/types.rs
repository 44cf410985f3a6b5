use std::ops::Deref;

use super::{eigh, ensure_finite, ensure_square, hermitian_part, hermiticity_defect, max_abs, trace, CMatrix};
use crate::error::{Error, Result};

/// Hermiticity tolerance, relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted for a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// A Hermitian operator. Construction symmetrizes inputs that are Hermitian
/// within [`HERMITIAN_TOL`] and rejects the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, HERMITIAN_TOL)
    }

    pub fn with_tolerance(m: CMatrix, rel_tol: f64) -> Result<Self> {
        ensure_square(&m.view(), "Hermitian operator")?;
        ensure_finite(&m, "Hermitian operator")?;
        let deviation = hermiticity_defect(&m);
        if deviation > rel_tol * max_abs(&m).max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(hermitian_part(&m)))
    }

    /// Symmetrizes without checking. Used for operators Hermitian by construction.
    pub(crate) fn from_hermitian_part(m: &CMatrix) -> Self {
        Self(hermitian_part(m))
    }

    pub fn zeros(n: usize) -> Self {
        Self(super::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self(super::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

impl Deref for Hermitian {
    type Target = CMatrix;
    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates against the default tolerances.
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, TRACE_TOL, POSITIVITY_TOL)
    }

    pub fn with_tolerance(m: CMatrix, trace_tol: f64, positivity_tol: f64) -> Result<Self> {
        let h = Hermitian::new(m).map_err(|e| Error::InvalidState(e.to_string()))?;
        let tr = trace(&h);
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = eigh(&h)?.values[0];
        if min < -positivity_tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self(h.into_matrix()))
    }

    /// Pure state `|psi><psi|` after normalizing `psi`.
    pub fn pure(psi: &super::CVector) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("state vector has zero or non-finite norm".into()));
        }
        let u = psi / super::r(norm);
        Ok(Self(super::outer(&u, &u)))
    }

    /// Maximally mixed state.
    pub fn maximally_mixed(n: usize) -> Self {
        Self(super::identity(n) / super::r(n as f64))
    }

    /// Computational basis projector `|k><k|`.
    pub fn basis(n: usize, k: usize) -> Self {
        Self(super::ket_bra(n, k, k))
    }

    /// Wraps the output of an engine that preserves the state structure up to
    /// round-off. Only the Hermitian part is kept; trace and positivity are
    /// left to the caller to monitor.
    pub(crate) fn from_evolved(m: CMatrix) -> Self {
        Self(hermitian_part(&m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Diagonal entries (populations in the computational basis).
    pub fn populations(&self) -> Vec<f64> {
        self.0.diag().iter().map(|z| z.re).collect()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigh(&self.0)?.values[0])
    }

    pub fn trace(&self) -> f64 {
        trace(&self.0).re
    }

    /// `tr(rho A)`.
    pub fn expectation(&self, a: &CMatrix) -> super::C64 {
        let n = self.dim();
        let mut acc = super::ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.0[(i, j)] * a[(j, i)];
            }
        }
        acc
    }
}

impl Deref for DensityMatrix {
    type Target = CMatrix;
    fn deref(&self) -> &CMatrix {
        &self.0
    }
}
