use super::LindbladModel;
use crate::error::{Error, Result};
use crate::ops::{identity, tensor_with_limit, trace, unvectorize, vectorize, CMatrix, CVector, C64};

/// Largest system dimension accepted by [`build_superoperator`]
/// (superoperator dimension 4096).
pub const MAX_SUPEROP_SYSTEM_DIM: usize = 64;

/// Matrix of the generator acting on column-stacked operators.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    /// System dimension `N` (the matrix is `N^2 x N^2`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        unvectorize(&self.matrix.dot(&vectorize(x)), self.dim)
    }

    /// `max |vec(I)^dagger S|`, zero for trace-preserving generators.
    pub fn trace_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for col in 0..n * n {
            let s: C64 = (0..n).map(|i| self.matrix[(i + n * i, col)]).sum();
            worst = worst.max(s.norm());
        }
        worst
    }
}

pub fn build_superoperator(m: &LindbladModel) -> Result<Superoperator> {
    build_superoperator_with_limit(m, MAX_SUPEROP_SYSTEM_DIM)
}

pub fn build_superoperator_with_limit(m: &LindbladModel, max_dim: usize) -> Result<Superoperator> {
    let n = m.dim();
    if n > max_dim {
        return Err(Error::SizeLimit { what: "superoperator system dimension", value: n, limit: max_dim });
    }
    let limit = n * n;
    let eye = identity(n);
    let heff = m.effective_hamiltonian();
    // vec(A X B) = (B^T (x) A) vec(X)
    let mut s = tensor_with_limit(&eye, &heff, limit)? * C64::new(0.0, -1.0);
    let heff_conj = heff.mapv(|z| z.conj());
    s = s + tensor_with_limit(&heff_conj, &eye, limit)? * C64::new(0.0, 1.0);
    for l in m.jumps() {
        s = s + tensor_with_limit(&l.mapv(|z| z.conj()), l, limit)?;
    }
    Ok(Superoperator { dim: n, matrix: s })
}

/// Null-space projection of `vec(I)` expressed as a state, used when a model
/// has several stationary states.
pub(crate) fn identity_overlap(basis: &[CVector], n: usize) -> Result<CMatrix> {
    let mut acc = CVector::zeros(n * n);
    for v in basis {
        // <vec(I), v> = tr(v)
        let tr = trace(&unvectorize(v, n)?);
        acc = acc + v * tr.conj();
    }
    unvectorize(&acc, n)
}
