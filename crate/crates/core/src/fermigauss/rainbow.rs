use ndarray::{s, Array1, Array2};

use super::{chain_hopping, lyapunov_steady, CorrelationMatrix, LyapunovModel};
use crate::error::{Error, Result};
use crate::ops::{dagger, diag_real, expm, max_abs_diff, outer, r, CMatrix, C64};

/// State of the two ancilla modes feeding the chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AncillaState {
    /// One particle in `(e^{i phi} a^dagger + b^dagger)/sqrt(2)`.
    Bell { phase: f64 },
    /// Mode `a` empty, mode `b` filled.
    Product,
}

impl AncillaState {
    pub fn correlations(&self) -> CMatrix {
        match *self {
            AncillaState::Bell { phase } => {
                let u = Array1::from(vec![C64::from_polar(1.0, phase), r(1.0)]) / r(2f64.sqrt());
                outer(&u, &u)
            }
            AncillaState::Product => diag_real(&[0.0, 1.0]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RainbowMode {
    /// Steady state of the continuum Lyapunov equation.
    Continuum,
    /// Repeated Gaussian collisions of duration `tau` with coupling `g / sqrt(tau)`,
    /// iterated until one collision changes `C` by at most `tol * tau`.
    Collisions { tau: f64, max_collisions: usize, tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RainbowConfig {
    pub length: usize,
    pub j: f64,
    pub g: f64,
    /// Phase of the target Bell state.
    pub bell_phase: f64,
    pub ancilla: AncillaState,
    pub mode: RainbowMode,
    pub threshold: f64,
}

/// Two-mode reduced state of a mirror pair in the one-particle sector plus double occupancy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    pub site: usize,
    pub p10: f64,
    pub p01: f64,
    pub p11: f64,
    /// `<d^dagger c>` between the two chains.
    pub coherence: C64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RainbowReport {
    pub pairs: Vec<PairState>,
    pub min_fidelity: f64,
    pub all_above_threshold: bool,
    /// Largest `|C|` entry in the cross-chain block.
    pub max_cross_correlation: f64,
    pub collisions: Option<usize>,
    pub correlation: CorrelationMatrix,
}

/// Reduced state of modes `(a, b)` by Wick factorization, and its fidelity with
/// `psi10 |10> + psi01 |01>`.
pub fn pair_state(c: &CMatrix, a: usize, b: usize, psi10: C64, psi01: C64) -> PairState {
    let na = c[(a, a)].re;
    let nb = c[(b, b)].re;
    let coherence = c[(a, b)];
    let p11 = na * nb - coherence.norm_sqr();
    let p10 = na - p11;
    let p01 = nb - p11;
    let fidelity = psi10.norm_sqr() * p10 + psi01.norm_sqr() * p01 + 2.0 * (psi10.conj() * coherence * psi01).re;
    PairState { site: a + 1, p10, p01, p11, coherence, fidelity }
}

/// Two chains of `length` sites, site 1 of each coupled to one of two ancilla
/// modes. Pair `i` joins site `i` of both chains, mirror images about the drive.
pub fn rainbow_experiment(cfg: &RainbowConfig) -> Result<RainbowReport> {
    let l = cfg.length;
    if l < 1 {
        return Err(Error::InvalidArgument("chains need at least one site".into()));
    }
    if !(cfg.g > 0.0) {
        return Err(Error::InvalidArgument(format!("coupling g = {} must be positive", cfg.g)));
    }
    let model = two_chain_model(l, cfg.j, cfg.g, cfg.ancilla.correlations())?;
    let (c, collisions) = match cfg.mode {
        RainbowMode::Continuum => {
            let s = lyapunov_steady(&model)?;
            if !s.unique {
                return Err(Error::Degenerate("two-chain steady state is not unique".into()));
            }
            (s.correlation.into_matrix(), None)
        }
        RainbowMode::Collisions { tau, max_collisions, tol } => {
            let (c, n) = collide_to_convergence(&model, tau, max_collisions, tol)?;
            (c, Some(n))
        }
    };
    let psi10 = C64::from_polar(1.0 / 2f64.sqrt(), cfg.bell_phase);
    let psi01 = r(1.0 / 2f64.sqrt());
    let pairs: Vec<PairState> = (0..l).map(|i| pair_state(&c, i, l + i, psi10, psi01)).collect();
    let min_fidelity = pairs.iter().map(|p| p.fidelity).fold(f64::INFINITY, f64::min);
    let max_cross_correlation = c.slice(s![..l, l..]).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(RainbowReport {
        min_fidelity,
        all_above_threshold: min_fidelity > cfg.threshold,
        pairs,
        max_cross_correlation,
        collisions,
        correlation: CorrelationMatrix::from_evolved(c),
    })
}

fn two_chain_model(l: usize, j: f64, g: f64, c_a: CMatrix) -> Result<LyapunovModel> {
    let single = chain_hopping(l, j);
    let mut t = Array2::<C64>::zeros((2 * l, 2 * l));
    t.slice_mut(s![..l, ..l]).assign(single.matrix());
    t.slice_mut(s![l.., l..]).assign(single.matrix());
    let mut theta = Array2::<C64>::zeros((2 * l, 2));
    theta[(0, 0)] = r(1.0);
    theta[(l, 1)] = r(1.0);
    LyapunovModel::new(crate::ops::Hermitian::new(t)?, theta, g, c_a)
}

fn collide_to_convergence(m: &LyapunovModel, tau: f64, max_collisions: usize, tol: f64) -> Result<(CMatrix, usize)> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("collision time tau = {tau}")));
    }
    let n = m.dim();
    let na = m.ancilla_dim();
    let mut h = Array2::<C64>::zeros((n + na, n + na));
    let b = m.coupling() * r(1.0 / tau.sqrt());
    h.slice_mut(s![..n, ..n]).assign(m.hopping().matrix());
    h.slice_mut(s![..n, n..]).assign(&b);
    h.slice_mut(s![n.., ..n]).assign(&dagger(&b));
    let u = expm(&(h * C64::new(0.0, -1.0)), tau)?;
    let ud = dagger(&u);
    let mut joint = Array2::<C64>::zeros((n + na, n + na));
    joint.slice_mut(s![n.., n..]).assign(m.ancilla_correlations());
    let mut c = Array2::<C64>::zeros((n, n));
    let mut change = f64::INFINITY;
    for k in 1..=max_collisions {
        joint.slice_mut(s![..n, ..n]).assign(&c);
        joint.slice_mut(s![..n, n..]).fill(r(0.0));
        joint.slice_mut(s![n.., ..n]).fill(r(0.0));
        let next = u.dot(&joint).dot(&ud).slice(s![..n, ..n]).to_owned();
        change = max_abs_diff(&next, &c);
        c = next;
        if change <= tol * tau {
            return Ok((c, k));
        }
    }
    Err(Error::NonConvergence { iterations: max_collisions, residual: change })
}
