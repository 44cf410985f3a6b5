use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{c, CMatrix};
use crate::error::{Error, Result};

/// Wire form of a square complex matrix: `{dim, re[], im[]}` with row-major
/// real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        let dim = super::ensure_square(&m.view(), "serialized matrix")?;
        Ok(Self { dim, re: m.iter().map(|z| z.re).collect(), im: m.iter().map(|z| z.im).collect() })
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        if n == 0 || self.re.len() != n * n || self.im.len() != n * n {
            return Err(Error::Dimension(format!(
                "matrix of dim {n} needs {} entries, got re={} im={}",
                n * n,
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(Array2::from_shape_fn((n, n), |(i, j)| c(self.re[i * n + j], self.im[i * n + j])))
    }
}
