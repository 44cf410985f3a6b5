//! Seeded random operators and models for tests, benchmarks and verification.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::liouvillian::LindbladModel;
use crate::ops::{c, dagger, hermitian_part, r, trace, CMatrix, CVector, DensityMatrix, Hermitian};

pub type SimRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` of the generator seeded by `seed`.
pub fn stream(seed: u64, index: u64) -> SimRng {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    g.set_stream(index);
    g
}

fn gaussian<R: Rng + ?Sized>(g: &mut R) -> f64 {
    g.sample(StandardNormal)
}

/// Matrix with i.i.d. complex Gaussian entries of standard deviation `scale`.
pub fn random_complex_matrix<R: Rng + ?Sized>(g: &mut R, n: usize, scale: f64) -> CMatrix {
    let s = scale / 2f64.sqrt();
    Array2::from_shape_simple_fn((n, n), || c(s * gaussian(g), s * gaussian(g)))
}

pub fn random_hermitian<R: Rng + ?Sized>(g: &mut R, n: usize, scale: f64) -> CMatrix {
    hermitian_part(&random_complex_matrix(g, n, scale))
}

/// Normalized complex Gaussian vector.
pub fn random_state<R: Rng + ?Sized>(g: &mut R, n: usize) -> CVector {
    let v: CVector = Array1::from_shape_simple_fn(n, || c(gaussian(g), gaussian(g)));
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v / r(norm)
}

/// Full-rank random density matrix `G G^dagger / tr(G G^dagger)`.
pub fn random_density_matrix<R: Rng + ?Sized>(g: &mut R, n: usize) -> DensityMatrix {
    let a = random_complex_matrix(g, n, 1.0);
    let m = a.dot(&dagger(&a));
    let t = trace(&m).re;
    DensityMatrix::from_evolved(m / r(t))
}

/// Random Hamiltonian plus `jumps` random jump operators.
pub fn random_lindblad<R: Rng + ?Sized>(g: &mut R, n: usize, jumps: usize) -> LindbladModel {
    let h = Hermitian::from_hermitian_part(&random_hermitian(g, n, 1.0));
    let ls = (0..jumps).map(|_| random_complex_matrix(g, n, 0.5)).collect();
    LindbladModel::new(h, ls).expect("random model dimensions are consistent")
}
