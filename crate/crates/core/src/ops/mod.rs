//! Dense complex operator algebra.
//!
//! All operators are stored as row-major `Array2<Complex64>`. Vectorization of
//! operators (for superoperators) uses column stacking: element `(i, j)` of an
//! `N x N` matrix lands at index `i + N * j`.

mod eigen;
mod expm;
mod json;
mod spin;
mod types;

pub use eigen::{eig, eigh, GeneralEigen, HermitianEigen};
pub use expm::{expm, expm_pade};
pub use json::MatrixJson;
pub use spin::{
    jordan_wigner_lowering, jordan_wigner_set, number_op, sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z, site_op,
    two_site_op,
};
pub use types::{DensityMatrix, Hermitian, HERMITIAN_TOL, POSITIVITY_TOL, TRACE_TOL};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = Array2<C64>;
pub type CVector = Array1<C64>;

/// Default upper bound on the dimension produced by [`tensor`].
pub const MAX_TENSOR_DIM: usize = 1 << 14;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    Array2::eye(n)
}

pub fn zeros(n: usize) -> CMatrix {
    Array2::zeros((n, n))
}

/// Diagonal matrix from real entries.
pub fn diag_real(d: &[f64]) -> CMatrix {
    let mut m = zeros(d.len());
    for (i, &v) in d.iter().enumerate() {
        m[(i, i)] = r(v);
    }
    m
}

/// Real matrix promoted to complex.
pub fn from_real(m: &Array2<f64>) -> CMatrix {
    m.mapv(r)
}

/// Conjugate transpose.
pub fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.dot(b) - b.dot(a)
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.dot(b) + b.dot(a)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diag().sum()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(m: &CMatrix) -> f64 {
    m.axis_iter(Axis(1)).map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Elementwise deviation from Hermiticity, `max |M - M^dagger|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M^dagger) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + &dagger(m)) * r(0.5)
}

pub fn is_normal(m: &CMatrix, tol: f64) -> bool {
    let md = dagger(m);
    let scale = max_abs(m).powi(2).max(f64::MIN_POSITIVE);
    max_abs_diff(&m.dot(&md), &md.dot(m)) <= tol * scale * m.nrows() as f64
}

pub fn ensure_square(m: &ArrayView2<C64>, what: &str) -> Result<usize> {
    let (r, c) = m.dim();
    if r != c || r == 0 {
        return Err(Error::Dimension(format!("{what} must be square and non-empty, got {r}x{c}")));
    }
    Ok(r)
}

pub fn ensure_finite(m: &CMatrix, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{what} has non-finite entries")))
    }
}

/// Kronecker product with the default dimension cap.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    tensor_with_limit(a, b, MAX_TENSOR_DIM)
}

pub fn tensor_with_limit(a: &CMatrix, b: &CMatrix, limit: usize) -> Result<CMatrix> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let rows = ar.saturating_mul(br);
    let cols = ac.saturating_mul(bc);
    if rows > limit || cols > limit {
        return Err(Error::SizeLimit { what: "tensor dimension", value: rows.max(cols), limit });
    }
    let mut out = Array2::zeros((rows, cols));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            let mut block = out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            block.zip_mut_with(b, |o, &x| *o = aij * x);
        }
    }
    Ok(out)
}

/// Kronecker product of a sequence, left to right.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> Result<CMatrix> {
    let mut acc: Option<CMatrix> = None;
    for f in factors {
        acc = Some(match acc {
            None => f.clone(),
            Some(a) => tensor(&a, f)?,
        });
    }
    acc.ok_or_else(|| Error::InvalidArgument("empty tensor product".into()))
}

/// Which factor of a bipartite space to keep in [`partial_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of an operator on `A (x) B` with factor dimensions `dims`.
pub fn partial_trace(m: &CMatrix, dims: (usize, usize), keep: Keep) -> Result<CMatrix> {
    let n = ensure_square(&m.view(), "partial_trace input")?;
    let (da, db) = dims;
    if da == 0 || db == 0 || da * db != n {
        return Err(Error::Dimension(format!("partial_trace: {da} x {db} does not match operator dimension {n}")));
    }
    Ok(match keep {
        Keep::A => Array2::from_shape_fn((da, da), |(i, j)| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Keep::B => Array2::from_shape_fn((db, db), |(k, l)| (0..da).map(|i| m[(i * db + k, i * db + l)]).sum()),
    })
}

/// Column-stacked vectorization.
pub fn vectorize(m: &CMatrix) -> CVector {
    // the transpose of a row-major array iterates in column-major order
    m.t().iter().copied().collect()
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CVector, n: usize) -> Result<CMatrix> {
    if v.len() != n * n {
        return Err(Error::Dimension(format!("cannot reshape {} entries into {n}x{n}", v.len())));
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| v[i + n * j]))
}

/// Trace distance `1/2 ||a - b||_1` between two Hermitian operators.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let diff = hermitian_part(&(a - b));
    let eig = eigh(&diff)?;
    Ok(0.5 * eig.values.iter().map(|x| x.abs()).sum::<f64>())
}

/// Solves `A X = B` for a square `A` through one LU factorization.
pub fn solve_matrix(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    use ndarray_linalg::{Factorize, Solve};
    let n = ensure_square(&a.view(), "linear system")?;
    if b.nrows() != n {
        return Err(Error::Dimension(format!("right-hand side has {} rows, expected {n}", b.nrows())));
    }
    let lu = a.factorize()?;
    let mut x = Array2::zeros(b.raw_dim());
    for (j, col) in b.axis_iter(Axis(1)).enumerate() {
        let sol = lu.solve(&col.to_owned())?;
        x.column_mut(j).assign(&sol);
    }
    Ok(x)
}

/// Solves `A x = b`.
pub fn solve_vector(a: &CMatrix, b: &CVector) -> Result<CVector> {
    use ndarray_linalg::Solve;
    ensure_square(&a.view(), "linear system")?;
    Ok(a.solve(b)?)
}

/// Outer product `|u><v|`.
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    Array2::from_shape_fn((u.len(), v.len()), |(i, j)| u[i] * v[j].conj())
}

/// `<u|v>`.
pub fn inner(u: &CVector, v: &CVector) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Computational basis vector.
pub fn basis(n: usize, k: usize) -> CVector {
    let mut v = Array1::zeros(n);
    v[k] = ONE;
    v
}

/// Matrix unit `|i><j|`.
pub fn ket_bra(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(n);
    m[(i, j)] = ONE;
    m
}
