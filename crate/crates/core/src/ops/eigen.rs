use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eig, Eigh, UPLO};

use super::{ensure_finite, ensure_square, CMatrix, C64};
use crate::error::Result;

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// orthonormal column eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Array1<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `V diag(f(lambda)) V^dagger`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            scaled.column_mut(j).mapv_inplace(|z| z * fj);
        }
        scaled.dot(&super::dagger(&self.vectors))
    }
}

/// Eigendecomposition of a general square matrix (unordered).
#[derive(Debug, Clone)]
pub struct GeneralEigen {
    pub values: Array1<C64>,
    pub vectors: CMatrix,
}

/// Eigendecomposition of a Hermitian matrix. Only the lower triangle is read.
pub fn eigh(m: &CMatrix) -> Result<HermitianEigen> {
    ensure_square(&m.view(), "eigh input")?;
    ensure_finite(m, "eigh input")?;
    // the LAPACK binding returns conjugated eigenvectors for row-major input
    let mut f = Array2::zeros(m.dim().f());
    f.assign(m);
    let (values, vectors) = f.eigh(UPLO::Lower)?;
    Ok(HermitianEigen { values, vectors })
}

pub fn eig(m: &CMatrix) -> Result<GeneralEigen> {
    ensure_square(&m.view(), "eig input")?;
    ensure_finite(m, "eig input")?;
    let (values, vectors) = m.eig()?;
    Ok(GeneralEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{dagger, diag_real, max_abs, max_abs_diff, r};
    use crate::random::{random_complex_matrix, random_hermitian, rng};

    #[test]
    fn hermitian_reconstruction() {
        let mut g = rng(3);
        for n in [1, 2, 5, 9] {
            let h = random_hermitian(&mut g, n, 1.0);
            let e = eigh(&h).unwrap();
            let rec = e.map(r);
            assert!(max_abs_diff(&rec, &h) <= 1e-9 * max_abs(&h));
            for w in e.values.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn general_residuals() {
        let mut g = rng(4);
        let m = random_complex_matrix(&mut g, 6, 1.0);
        let e = eig(&m).unwrap();
        let norm = max_abs(&m) * 6.0;
        for k in 0..6 {
            let v = e.vectors.column(k).to_owned();
            let res = m.dot(&v) - &v * e.values[k];
            assert!(res.iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-9 * norm);
        }
        let _ = dagger(&m);
    }

    #[test]
    fn diagonal_values_sorted() {
        let e = eigh(&diag_real(&[3.0, -1.0, 2.0])).unwrap();
        assert_eq!(e.values.to_vec(), vec![-1.0, 2.0, 3.0]);
    }
}
