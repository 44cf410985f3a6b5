use ndarray::{s, Array2};
use ndarray_linalg::SVD;

use super::LindbladModel;
use crate::error::Result;
use crate::ops::{dagger, eigh, frobenius, hermitian_part, identity, r, tensor, trace, unvectorize, CMatrix, C64};

/// Outcome of [`commutant_uniqueness_test`].
#[derive(Debug, Clone)]
pub enum Commutant {
    /// Only multiples of the identity commute with `{H, L_k, L_k^dagger}`.
    Irreducible,
    /// A non-trivial commutant. `witness` is Hermitian, traceless and has unit
    /// Frobenius norm.
    Reducible { dimension: usize, witness: CMatrix },
}

impl Commutant {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, Commutant::Irreducible)
    }
}

/// Largest system dimension for which the constraint matrix is decomposed by
/// SVD; beyond it the Gram matrix is diagonalized instead.
const SVD_MAX_DIM: usize = 16;

/// Solves `[A, X] = 0` for `X` in `{H, L_k, L_k^dagger}`. Singular values below
/// `tol` times the largest one count as zero.
pub fn commutant_uniqueness_test(m: &LindbladModel, tol: f64) -> Result<Commutant> {
    let n = m.dim();
    let eye = identity(n);
    let mut generators: Vec<CMatrix> = vec![m.hamiltonian().matrix().clone()];
    for l in m.jumps() {
        generators.push(l.clone());
        generators.push(dagger(l));
    }
    // vec(A X - X A) = (X^T (x) I - I (x) X) vec(A)
    let mut blocks = Vec::with_capacity(generators.len());
    for x in &generators {
        blocks.push(tensor(&x.t().to_owned(), &eye)? - tensor(&eye, x)?);
    }

    let null_basis =
        if n <= SVD_MAX_DIM { svd_null_space(&blocks, n * n, tol)? } else { gram_null_space(&blocks, n * n, tol)? };
    let dimension = null_basis.len();
    if dimension <= 1 {
        return Ok(Commutant::Irreducible);
    }

    let mut best: Option<CMatrix> = None;
    for v in &null_basis {
        let a = unvectorize(v, n)?;
        let traceless = &a - &(&eye * (trace(&a) / r(n as f64)));
        let better = match &best {
            None => true,
            Some(b) => frobenius(&traceless) > frobenius(b),
        };
        if better {
            best = Some(traceless);
        }
    }
    let a = best.expect("null space has at least two vectors");
    let herm = hermitian_part(&a);
    let witness = if frobenius(&herm) >= 0.5 * frobenius(&a) {
        herm
    } else {
        // anti-Hermitian part divided by i
        (&a - &herm) * C64::new(0.0, -1.0)
    };
    let norm = frobenius(&witness);
    Ok(Commutant::Reducible { dimension, witness: witness / r(norm) })
}

fn svd_null_space(blocks: &[CMatrix], cols: usize, tol: f64) -> Result<Vec<ndarray::Array1<C64>>> {
    let rows = blocks.len() * cols;
    let mut stacked = Array2::<C64>::zeros((rows, cols));
    for (k, b) in blocks.iter().enumerate() {
        stacked.slice_mut(s![k * cols..(k + 1) * cols, ..]).assign(b);
    }
    let (_, sv, vt) = stacked.svd(false, true)?;
    let vt = vt.expect("requested right singular vectors");
    let scale = sv.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for k in 0..cols {
        let sigma = if k < sv.len() { sv[k] } else { 0.0 };
        if scale == 0.0 || sigma <= tol * scale {
            out.push(vt.row(k).mapv(|z| z.conj()));
        }
    }
    Ok(out)
}

fn gram_null_space(blocks: &[CMatrix], cols: usize, tol: f64) -> Result<Vec<ndarray::Array1<C64>>> {
    let mut gram = Array2::<C64>::zeros((cols, cols));
    for b in blocks {
        gram = gram + dagger(b).dot(b);
    }
    let e = eigh(&gram)?;
    let scale = e.values.iter().cloned().fold(0.0, f64::max);
    // squared singular values lose half the digits
    let cut = tol.max(1e-7).powi(2) * scale;
    Ok((0..cols).filter(|&k| e.values[k] <= cut).map(|k| e.vectors.column(k).to_owned()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{commutator, max_abs, sigma_minus, sigma_z, site_op, Hermitian};

    #[test]
    fn damped_qubit_is_irreducible() {
        let h = Hermitian::new(sigma_z() * r(0.5)).unwrap();
        let m = LindbladModel::new(h, vec![sigma_minus()]).unwrap();
        assert!(commutant_uniqueness_test(&m, 1e-9).unwrap().is_irreducible());
    }

    #[test]
    fn identity_jump_is_reducible() {
        let m = LindbladModel::new(Hermitian::zeros(3), vec![identity(3)]).unwrap();
        match commutant_uniqueness_test(&m, 1e-9).unwrap() {
            Commutant::Reducible { dimension, witness } => {
                assert_eq!(dimension, 9);
                assert!(trace(&witness).norm() < 1e-12);
                assert!(max_abs(&(&witness - &dagger(&witness))) < 1e-12);
            }
            Commutant::Irreducible => panic!("expected reducible"),
        }
    }

    #[test]
    fn independently_damped_qubits_are_irreducible() {
        // sigma^- and sigma^+ on each site generate the full algebra
        let jumps = vec![site_op(2, 1, &sigma_minus()).unwrap(), site_op(2, 2, &sigma_minus()).unwrap()];
        let m = LindbladModel::new(Hermitian::zeros(4), jumps).unwrap();
        assert!(commutant_uniqueness_test(&m, 1e-9).unwrap().is_irreducible());
    }

    #[test]
    fn undamped_spectator_is_reducible() {
        let jumps = vec![site_op(2, 1, &sigma_minus()).unwrap()];
        let m = LindbladModel::new(Hermitian::zeros(4), jumps.clone()).unwrap();
        match commutant_uniqueness_test(&m, 1e-9).unwrap() {
            Commutant::Reducible { dimension, witness } => {
                assert_eq!(dimension, 4);
                for l in &jumps {
                    assert!(max_abs(&commutator(&witness, l)) < 1e-10);
                    assert!(max_abs(&commutator(&witness, &dagger(l))) < 1e-10);
                }
            }
            Commutant::Irreducible => panic!("expected reducible"),
        }
    }

    #[test]
    fn gram_path_agrees_with_svd() {
        let eye = identity(2);
        let mut blocks = Vec::new();
        for x in [sigma_z(), sigma_minus(), dagger(&sigma_minus())] {
            blocks.push(tensor(&x.t().to_owned(), &eye).unwrap() - tensor(&eye, &x).unwrap());
        }
        assert_eq!(svd_null_space(&blocks, 4, 1e-9).unwrap().len(), 1);
        assert_eq!(gram_null_space(&blocks, 4, 1e-9).unwrap().len(), 1);
    }
}
