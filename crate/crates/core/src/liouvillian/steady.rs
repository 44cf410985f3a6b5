use ndarray::Array2;

use super::superop::identity_overlap;
use super::{build_superoperator, LindbladModel};
use crate::error::{Error, Result};
use crate::ops::{
    dagger, eig, hermitian_part, inner, max_abs, norm1, r, trace, unvectorize, CMatrix, CVector, DensityMatrix, C64,
};
use crate::random::{random_state, rng};

/// Systems up to this dimension use the full superoperator spectrum.
const FULL_SPECTRUM_MAX_DIM: usize = 16;

#[derive(Debug, Clone, Copy)]
pub struct SteadyOptions {
    /// Absolute zero-eigenvalue threshold. Defaults to `1e-9 * ||L||_1`.
    pub zero_tol: Option<f64>,
    /// Iteration budget for the inverse-iteration path.
    pub max_iterations: usize,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self { zero_tol: None, max_iterations: 200 }
    }
}

/// Stationary state(s) of a Lindblad generator.
#[derive(Debug, Clone)]
pub struct SteadyState {
    /// A stationary state. When the null space is degenerate this is the
    /// normalized projection of the identity onto the null space; no physical
    /// selection is made among stationary states.
    pub state: DensityMatrix,
    /// `-max Re(lambda)` over the non-zero eigenvalues. Only computed on the
    /// full-spectrum path.
    pub gap: Option<f64>,
    pub unique: bool,
    /// Numerical dimension of the null space (a lower bound of 2 is reported
    /// on the inverse-iteration path when degenerate).
    pub null_dim: usize,
    /// Orthonormal basis of the computed null space (as operators).
    pub null_space: Vec<CMatrix>,
    /// `max |L(state)|`.
    pub residual: f64,
    /// Threshold used to decide which eigenvalues vanish.
    pub zero_tol: f64,
}

pub fn steady_state(m: &LindbladModel) -> Result<SteadyState> {
    steady_state_with(m, &SteadyOptions::default())
}

pub fn steady_state_with(m: &LindbladModel, opts: &SteadyOptions) -> Result<SteadyState> {
    let n = m.dim();
    let s = build_superoperator(m)?;
    let norm = norm1(s.matrix()).max(f64::MIN_POSITIVE);
    let tol = opts.zero_tol.unwrap_or(1e-9 * norm);

    let (basis, gap, null_dim) = if n <= FULL_SPECTRUM_MAX_DIM {
        full_spectrum_null_space(s.matrix(), tol)?
    } else {
        inverse_iteration_null_space(s.matrix(), norm, tol, opts.max_iterations)?
    };

    let candidate = if null_dim == 1 { unvectorize(&basis[0], n)? } else { identity_overlap(&basis, n)? };
    let tr = trace(&candidate);
    if tr.norm() < 1e-14 {
        return Err(Error::Numeric("null space has no trace-carrying direction".into()));
    }
    let state = hermitian_part(&(candidate / tr));
    let residual = max_abs(&m.apply(&state));
    let null_space = basis.iter().map(|v| unvectorize(v, n)).collect::<Result<_>>()?;
    Ok(SteadyState {
        state: DensityMatrix::from_evolved(state),
        gap,
        unique: null_dim == 1,
        null_dim,
        null_space,
        residual,
        zero_tol: tol,
    })
}

fn full_spectrum_null_space(s: &CMatrix, tol: f64) -> Result<(Vec<CVector>, Option<f64>, usize)> {
    let e = eig(s)?;
    let mut order: Vec<usize> = (0..e.values.len()).collect();
    order.sort_by(|&a, &b| e.values[a].norm().total_cmp(&e.values[b].norm()));
    let null_dim = order.iter().filter(|&&k| e.values[k].norm() <= tol).count().max(1);
    let gap = order[null_dim..]
        .iter()
        .map(|&k| e.values[k].re)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
        .map(|x| -x);
    let raw: Vec<CVector> = order[..null_dim].iter().map(|&k| e.vectors.column(k).to_owned()).collect();
    Ok((orthonormalize(raw), gap, null_dim))
}

fn inverse_iteration_null_space(
    s: &CMatrix,
    norm: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<(Vec<CVector>, Option<f64>, usize)> {
    use ndarray_linalg::{Factorize, Solve};
    let dim = s.nrows();
    let shift = -1e-6 * norm;
    let mut shifted = s.clone();
    for i in 0..dim {
        shifted[(i, i)] -= r(shift);
    }
    let lu = shifted.factorize()?;
    let mut g = rng(0x5eed);
    let mut block = vec![random_state(&mut g, dim), random_state(&mut g, dim)];
    let mut previous = [f64::INFINITY; 2];
    for it in 0..max_iterations {
        let next: Vec<CVector> = block.iter().map(|v| lu.solve(v)).collect::<std::result::Result<_, _>>()?;
        block = orthonormalize(next);
        if block.len() < 2 {
            return Err(Error::Numeric("inverse iteration block collapsed".into()));
        }
        let (values, vectors) = ritz(s, &block)?;
        let converged = (values[0] - previous[0]).abs() <= 1e-12 * norm
            && (values[1] - previous[1]).abs() <= 1e-9 * norm.max(values[1]);
        previous = values;
        if converged || it + 1 == max_iterations {
            let unique = values[1] > tol;
            let basis = if unique { vec![vectors[0].clone()] } else { vectors };
            if !converged && values[0] > tol {
                return Err(Error::NonConvergence { iterations: max_iterations, residual: values[0] });
            }
            let null_dim = if unique { 1 } else { 2 };
            return Ok((basis, None, null_dim));
        }
    }
    unreachable!("loop returns on the final iteration")
}

/// Ritz values (moduli, ascending) and vectors of `s` on the span of `block`.
fn ritz(s: &CMatrix, block: &[CVector]) -> Result<([f64; 2], Vec<CVector>)> {
    let q = Array2::from_shape_fn((block[0].len(), 2), |(i, j)| block[j][i]);
    let projected = dagger(&q).dot(&s.dot(&q));
    let e = eig(&projected)?;
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| e.values[a].norm().total_cmp(&e.values[b].norm()));
    let vectors = order.iter().map(|&k| q.dot(&e.vectors.column(k))).collect();
    Ok(([e.values[order[0]].norm(), e.values[order[1]].norm()], vectors))
}

/// Modified Gram–Schmidt; drops numerically dependent vectors.
fn orthonormalize(vs: Vec<CVector>) -> Vec<CVector> {
    let mut out: Vec<CVector> = Vec::with_capacity(vs.len());
    for mut v in vs {
        for u in &out {
            let p = inner(u, &v);
            v = v - u * p;
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-10 {
            out.push(v / r(norm));
        }
    }
    out
}

/// Eigenvalues of the superoperator, sorted by decreasing real part.
pub fn liouvillian_spectrum(m: &LindbladModel) -> Result<Vec<C64>> {
    let s = build_superoperator(m)?;
    let mut values = eig(s.matrix())?.values.to_vec();
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{diag_real, identity, max_abs_diff, sigma_minus, sigma_plus, sigma_z, Hermitian};
    use crate::random::random_lindblad;

    fn thermal_qubit(down: f64, up: f64) -> LindbladModel {
        let h = Hermitian::new(diag_real(&[0.0, 1.0])).unwrap();
        LindbladModel::new(h, vec![sigma_minus() * r(down.sqrt()), sigma_plus() * r(up.sqrt())]).unwrap()
    }

    #[test]
    fn amplitude_damping_steady_state_and_gap() {
        let gamma = 0.6;
        let h = Hermitian::new(sigma_z() * r(0.7)).unwrap();
        let m = LindbladModel::new(h, vec![sigma_minus() * r(f64::sqrt(gamma))]).unwrap();
        let ss = steady_state(&m).unwrap();
        assert!(ss.unique);
        assert!(max_abs_diff(&ss.state, &diag_real(&[1.0, 0.0])) < 1e-12);
        assert!((ss.gap.unwrap() - gamma / 2.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_qubit_rate_balance() {
        let (down, up) = (1.0, 0.3);
        let ss = steady_state(&thermal_qubit(down, up)).unwrap();
        let p = ss.state.populations();
        assert!((p[0] - down / (down + up)).abs() < 1e-12);
        assert!((p[1] - up / (down + up)).abs() < 1e-12);
    }

    #[test]
    fn closed_system_is_degenerate() {
        let h = Hermitian::new(diag_real(&[0.0, 0.4, 1.3])).unwrap();
        let ss = steady_state(&LindbladModel::unitary(h)).unwrap();
        assert!(!ss.unique);
        assert_eq!(ss.null_dim, 3);
        assert!(max_abs_diff(&ss.state, &(identity(3) * r(1.0 / 3.0))) < 1e-10);
    }

    #[test]
    fn random_models_residual() {
        let mut g = rng(21);
        for n in 2..6 {
            let m = random_lindblad(&mut g, n, 2);
            let ss = steady_state(&m).unwrap();
            assert!(ss.unique);
            assert!(ss.residual <= ss.zero_tol);
            assert!((ss.state.trace() - 1.0).abs() < 1e-12);
            assert!(ss.state.min_eigenvalue().unwrap() > -1e-10);
        }
    }

    #[test]
    fn inverse_iteration_agrees_with_full_spectrum() {
        let mut g = rng(22);
        let m = random_lindblad(&mut g, 6, 2);
        let s = build_superoperator(&m).unwrap();
        let norm = norm1(s.matrix());
        let (full, _, _) = full_spectrum_null_space(s.matrix(), 1e-9 * norm).unwrap();
        let (inv, gap, dim) = inverse_iteration_null_space(s.matrix(), norm, 1e-9 * norm, 200).unwrap();
        assert_eq!(dim, 1);
        assert!(gap.is_none());
        let a = unvectorize(&full[0], 6).unwrap();
        let b = unvectorize(&inv[0], 6).unwrap();
        let (a, b) = (&a / trace(&a), &b / trace(&b));
        assert!(max_abs_diff(&a, &b) < 1e-9);
    }

    #[test]
    fn large_system_path() {
        // number-conserving hopping with damping on every site: N = 32 > 16
        let sites = 5;
        let mut jumps = Vec::new();
        for j in 1..=sites {
            jumps.push(crate::ops::site_op(sites, j, &sigma_minus()).unwrap());
        }
        let hop = crate::ops::two_site_op(sites, 1, &sigma_plus(), 2, &sigma_minus()).unwrap();
        let h = Hermitian::from_hermitian_part(&(&hop + &crate::ops::dagger(&hop)));
        let m = LindbladModel::new(h, jumps).unwrap();
        let ss = steady_state(&m).unwrap();
        assert!(ss.unique);
        assert!((ss.state[(0, 0)].re - 1.0).abs() < 1e-9);
    }
}
