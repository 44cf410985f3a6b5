//! Quadratic, number-conserving fermions coupled to fermionic ancilla modes.
//!
//! A Gaussian state is described by the correlation matrix
//! `C_ij = <c_j^dagger c_i>`, which evolves as `dC/dt = P C + C P^dagger + F` with
//! `P = -i T_S - (g Theta)(g Theta)^dagger / 2` and `F = (g Theta) C_A (g Theta)^dagger`.

mod rainbow;
mod transport;

pub use rainbow::{pair_state, rainbow_experiment, AncillaState, PairState, RainbowConfig, RainbowMode, RainbowReport};
pub use transport::{
    ballistic_scaling_experiment, boundary_driven_chain, chain_hopping, BallisticPoint, BallisticReport,
};

use std::ops::Deref;

use ndarray::{s, Array2};
use ndarray_linalg::LeastSquaresSvd;

use crate::error::{Error, Result};
use crate::liouvillian::LindbladModel;
use crate::ops::{
    dagger, eig, eigh, expm, hermitian_part, hermiticity_defect, identity, jordan_wigner_set, max_abs, norm1, r,
    solve_vector, tensor, trace, unvectorize, vectorize, zeros, CMatrix, DensityMatrix, Hermitian, C64,
};

/// Slack on the occupation bounds `0 <= spec(C) <= 1`.
pub const OCCUPATION_TOL: f64 = 1e-10;
/// Eigenvalue pairs of `P` and `-P^dagger` closer than this make the steady state non-unique.
pub const UNIQUENESS_TOL: f64 = 1e-9;
/// Largest number of system modes for the vectorized steady-state solve.
pub const MAX_LYAPUNOV_MODES: usize = 64;
/// Largest number of modes for the Jordan–Wigner many-body representation.
pub const MAX_MANY_BODY_MODES: usize = 8;

#[derive(Debug, Clone)]
pub struct LyapunovModel {
    t_s: Hermitian,
    theta: CMatrix,
    g: f64,
    c_a: CMatrix,
    p: CMatrix,
    f: CMatrix,
}

impl LyapunovModel {
    pub fn new(t_s: Hermitian, theta: CMatrix, g: f64, c_a: CMatrix) -> Result<Self> {
        let n = t_s.dim();
        if theta.nrows() != n {
            return Err(Error::Dimension(format!("Theta has {} rows, system has {n} modes", theta.nrows())));
        }
        if c_a.dim() != (theta.ncols(), theta.ncols()) {
            return Err(Error::Dimension(format!(
                "ancilla correlation shape {:?}, Theta has {} columns",
                c_a.dim(),
                theta.ncols()
            )));
        }
        if !g.is_finite() {
            return Err(Error::InvalidArgument(format!("coupling g = {g}")));
        }
        check_occupations(&c_a, "ancilla correlation matrix")?;
        let b = &theta * r(g);
        let bbd = b.dot(&dagger(&b));
        let p = t_s.matrix() * C64::new(0.0, -1.0) - &bbd * r(0.5);
        let f = hermitian_part(&b.dot(&c_a).dot(&dagger(&b)));
        Ok(Self { t_s, theta, g, c_a, p, f })
    }

    /// Same system and coupling with a different ancilla state.
    pub fn with_ancilla(&self, c_a: CMatrix) -> Result<Self> {
        Self::new(self.t_s.clone(), self.theta.clone(), self.g, c_a)
    }

    pub fn dim(&self) -> usize {
        self.t_s.dim()
    }

    pub fn ancilla_dim(&self) -> usize {
        self.theta.ncols()
    }

    pub fn hopping(&self) -> &Hermitian {
        &self.t_s
    }

    pub fn theta(&self) -> &CMatrix {
        &self.theta
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn ancilla_correlations(&self) -> &CMatrix {
        &self.c_a
    }

    pub fn p(&self) -> &CMatrix {
        &self.p
    }

    pub fn f(&self) -> &CMatrix {
        &self.f
    }

    /// `g Theta`.
    pub fn coupling(&self) -> CMatrix {
        &self.theta * r(self.g)
    }
}

/// Hermitian correlation matrix with eigenvalues in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(CMatrix);

impl CorrelationMatrix {
    pub fn new(c: CMatrix) -> Result<Self> {
        check_occupations(&c, "correlation matrix")?;
        Ok(Self(hermitian_part(&c)))
    }

    /// Wraps the Hermitian part of `c` without checking the occupation bounds.
    pub fn from_evolved(c: CMatrix) -> Self {
        Self(hermitian_part(&c))
    }

    pub fn vacuum(n: usize) -> Self {
        Self(zeros(n))
    }

    /// `n * I`.
    pub fn uniform(n: usize, occupation: f64) -> Result<Self> {
        Self::new(identity(n) * r(occupation))
    }

    /// Fock state with the given site occupations.
    pub fn fock(occupied: &[bool]) -> Self {
        let d: Vec<f64> = occupied.iter().map(|&o| if o { 1.0 } else { 0.0 }).collect();
        Self(crate::ops::diag_real(&d))
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

    pub fn occupations(&self) -> Vec<f64> {
        self.0.diag().iter().map(|z| z.re).collect()
    }

    /// Smallest and largest eigenvalue.
    pub fn spectrum_bounds(&self) -> Result<(f64, f64)> {
        let e = eigh(&self.0)?;
        let n = e.values.len();
        Ok(if n == 0 { (0.0, 0.0) } else { (e.values[0], e.values[n - 1]) })
    }
}

impl Deref for CorrelationMatrix {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

fn check_occupations(c: &CMatrix, what: &str) -> Result<()> {
    if c.nrows() != c.ncols() {
        return Err(Error::Dimension(format!("{what} has shape {:?}", c.dim())));
    }
    let deviation = hermiticity_defect(c);
    if deviation > OCCUPATION_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    if c.nrows() == 0 {
        return Ok(());
    }
    let e = eigh(&hermitian_part(c))?;
    let (lo, hi) = (e.values[0], e.values[c.nrows() - 1]);
    if lo < -OCCUPATION_TOL || hi > 1.0 + OCCUPATION_TOL {
        return Err(Error::InvalidState(format!("{what} eigenvalues in [{lo:.3e}, {hi:.3e}]")));
    }
    Ok(())
}

fn check_dim(m: &LyapunovModel, c: &CMatrix) -> Result<()> {
    if c.dim() != (m.dim(), m.dim()) {
        return Err(Error::Dimension(format!("correlation shape {:?}, model has {} modes", c.dim(), m.dim())));
    }
    Ok(())
}

/// `P C + C P^dagger + F`.
pub fn lyapunov_rhs(m: &LyapunovModel, c: &CorrelationMatrix) -> Result<CMatrix> {
    check_dim(m, c)?;
    let pc = m.p.dot(c.matrix());
    Ok(hermitian_part(&(&pc + &dagger(&pc) + &m.f)))
}

/// Exact propagator over `h`: `C -> E C E^dagger + G` with
/// `E = exp(P h)` and `G = int_0^h exp(P s) F exp(P^dagger s) ds`.
fn step_maps(m: &LyapunovModel, h: f64) -> Result<(CMatrix, CMatrix)> {
    let n = m.dim();
    let mut block = Array2::<C64>::zeros((2 * n, 2 * n));
    block.slice_mut(s![..n, ..n]).assign(&m.p);
    block.slice_mut(s![..n, n..]).assign(&m.f);
    block.slice_mut(s![n.., n..]).assign(&(-dagger(&m.p)));
    let x = expm(&block, h)?;
    let e = x.slice(s![..n, ..n]).to_owned();
    let g = x.slice(s![..n, n..]).dot(&dagger(&e));
    Ok((e, hermitian_part(&g)))
}

/// Correlation matrix at time `t`, evaluated with exact block-exponential steps.
pub fn evolve_correlations(m: &LyapunovModel, c0: &CorrelationMatrix, t: f64) -> Result<CorrelationMatrix> {
    Ok(evolve_correlations_series(m, c0, &[t])?.pop().expect("one time requested"))
}

/// Correlation matrices at ascending `times`.
pub fn evolve_correlations_series(
    m: &LyapunovModel,
    c0: &CorrelationMatrix,
    times: &[f64],
) -> Result<Vec<CorrelationMatrix>> {
    check_dim(m, c0)?;
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidArgument("times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be ascending".into()));
    }
    // keep ||P h|| <= 1 so that exp(-P^dagger h) stays well conditioned
    let scale = norm1(&m.p).max(norm1(&m.f)).max(1e-300);
    let mut c = c0.matrix().clone();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let steps = (span * scale).ceil().max(1.0) as usize;
            let (e, g) = step_maps(m, span / steps as f64)?;
            let ed = dagger(&e);
            for _ in 0..steps {
                c = e.dot(&c).dot(&ed) + &g;
            }
            now = t;
        }
        out.push(CorrelationMatrix::from_evolved(c.clone()));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct LyapunovSteady {
    pub correlation: CorrelationMatrix,
    /// No eigenvalue of `P` meets one of `-P^dagger`.
    pub unique: bool,
    /// `min_ij |lambda_i(P) + conj(lambda_j(P))|`.
    pub min_separation: f64,
    /// Null-space dimension of the vectorized map (0 when unique).
    pub null_dim: usize,
    /// `max |P C + C P^dagger + F|`.
    pub residual: f64,
}

/// `I (x) P + conj(P) (x) I`, the vectorized form of `C -> P C + C P^dagger`.
pub fn lyapunov_operator(m: &LyapunovModel) -> Result<CMatrix> {
    let n = m.dim();
    if n > MAX_LYAPUNOV_MODES {
        return Err(Error::SizeLimit { what: "system modes", value: n, limit: MAX_LYAPUNOV_MODES });
    }
    let eye = identity(n);
    Ok(tensor(&eye, &m.p)? + tensor(&m.p.mapv(|z| z.conj()), &eye)?)
}

/// Number of singular values of the vectorized map below `tol` times the largest.
pub fn lyapunov_null_dimension(m: &LyapunovModel, tol: f64) -> Result<usize> {
    use ndarray_linalg::SVD;
    let a = lyapunov_operator(m)?;
    let (_, sv, _) = a.svd(false, false)?;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    Ok(sv.iter().filter(|&&x| x <= tol * top || top == 0.0).count())
}

/// Solves `P C + C P^dagger = -F`. A non-unique problem returns the minimum-norm
/// least-squares solution, and an incompatible `F` shows up in `residual`.
pub fn lyapunov_steady(m: &LyapunovModel) -> Result<LyapunovSteady> {
    let n = m.dim();
    let a = lyapunov_operator(m)?;
    let lambda = eig(&m.p)?.values;
    let mut min_separation = f64::INFINITY;
    for x in lambda.iter() {
        for y in lambda.iter() {
            min_separation = min_separation.min((x + y.conj()).norm());
        }
    }
    let unique = min_separation >= UNIQUENESS_TOL;
    let rhs = -vectorize(&m.f);
    let (x, null_dim) = if unique {
        (solve_vector(&a, &rhs)?, 0)
    } else {
        let ls = a.least_squares(&rhs)?;
        let top = ls.singular_values.iter().cloned().fold(0.0, f64::max);
        let rank = ls.singular_values.iter().filter(|&&x| x > UNIQUENESS_TOL * top).count();
        (ls.solution, n * n - rank)
    };
    let c = hermitian_part(&unvectorize(&x, n)?);
    let pc = m.p.dot(&c);
    let residual = max_abs(&(&pc + &dagger(&pc) + &m.f));
    Ok(LyapunovSteady { correlation: CorrelationMatrix::from_evolved(c), unique, min_separation, null_dim, residual })
}

/// Particle current from site `k` to `k + 1` (1-based) across a hopping bond of
/// amplitude `j`: `-2 J Im C_{k+1,k}`, positive when particles flow to larger indices.
pub fn bond_current(c: &CMatrix, j: f64, k: usize) -> Result<f64> {
    let n = c.nrows();
    if k < 1 || k >= n {
        return Err(Error::InvalidArgument(format!("bond {k} outside 1..{n}")));
    }
    Ok(-2.0 * j * c[(k, k - 1)].im)
}

/// Currents on bonds `1 .. L-1`.
pub fn bond_currents(c: &CMatrix, j: f64) -> Result<Vec<f64>> {
    (1..c.nrows()).map(|k| bond_current(c, j, k)).collect()
}

/// Many-body Lindblad model on the Jordan–Wigner space whose two-point function
/// obeys the same Lyapunov equation. Gain and loss channels diagonalize
/// `F` and `(g Theta)(I - C_A)(g Theta)^dagger`.
pub fn many_body_lindblad(m: &LyapunovModel) -> Result<LindbladModel> {
    let n = m.dim();
    if n > MAX_MANY_BODY_MODES {
        return Err(Error::SizeLimit { what: "many-body modes", value: n, limit: MAX_MANY_BODY_MODES });
    }
    let cs = jordan_wigner_set(n)?;
    let cds: Vec<CMatrix> = cs.iter().map(dagger).collect();
    let dim = 1usize << n;
    let mut h = zeros(dim);
    for i in 0..n {
        for k in 0..n {
            let t = m.t_s[(i, k)];
            if t != C64::new(0.0, 0.0) {
                h = h + cds[i].dot(&cs[k]) * t;
            }
        }
    }
    let b = m.coupling();
    let loss = hermitian_part(&b.dot(&(identity(m.ancilla_dim()) - &m.c_a)).dot(&dagger(&b)));
    let scale = max_abs(&b.dot(&dagger(&b))).max(1e-300);
    let mut jumps = Vec::new();
    for (mat, ops, conj) in [(&m.f, &cds, false), (&loss, &cs, true)] {
        let e = eigh(mat)?;
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= 1e-14 * scale {
                continue;
            }
            let mut l = zeros(dim);
            for i in 0..n {
                let v = e.vectors[(i, k)];
                let w = if conj { v.conj() } else { v };
                l = l + &ops[i] * w;
            }
            jumps.push(l * r(lam.sqrt()));
        }
    }
    LindbladModel::new(Hermitian::new(hermitian_part(&h))?, jumps)
}

/// `C_ij = tr(rho c_j^dagger c_i)` on the Jordan–Wigner space of `modes` sites.
pub fn correlations_from_state(rho: &DensityMatrix, modes: usize) -> Result<CMatrix> {
    if rho.dim() != 1usize << modes {
        return Err(Error::Dimension(format!("state dim {} vs {modes} modes", rho.dim())));
    }
    let cs = jordan_wigner_set(modes)?;
    let mut c = zeros(modes);
    for i in 0..modes {
        for j in 0..modes {
            c[(i, j)] = trace(&rho.matrix().dot(&dagger(&cs[j])).dot(&cs[i]));
        }
    }
    Ok(c)
}

/// Fock state with the given site occupations on the Jordan–Wigner space.
pub fn fock_density(occupied: &[bool]) -> DensityMatrix {
    let n = occupied.len();
    let index = occupied.iter().enumerate().fold(0usize, |acc, (k, &o)| acc | ((o as usize) << (n - 1 - k)));
    DensityMatrix::basis(1 << n, index)
}
