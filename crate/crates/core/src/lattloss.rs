//! Hard-core bosons on a lattice with K-body losses.
//!
//! Sites are spin-1/2 with `|1>` occupied. Hopping is `J (sigma+_i sigma-_{i+1} + h.c.)`,
//! losses remove `K` adjacent particles through `sqrt(Gamma) prod sigma-`.

use crate::error::{Error, Result};
use crate::liouvillian::{propagate_series, LindbladModel, Method};
use crate::ops::{number_op, r, sigma_minus, sigma_plus, site_op, zeros, CMatrix, DensityMatrix, Hermitian, C64};

pub const MAX_LOSS_SITES: usize = 12;
/// Quadratic-fit threshold above which a log-log or semilog series counts as curved.
pub const CURVATURE_TOL: f64 = 1e-3;
/// Smallest number of points accepted by [`decay_exponent_fit`].
pub const MIN_FIT_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossModel {
    pub sites: usize,
    pub j: f64,
    pub k: usize,
    pub gamma: f64,
    pub boundary: Boundary,
    /// Curvature `v` of the trap `v (j - (L+1)/2)^2`.
    pub trap: Option<f64>,
}

impl LossModel {
    pub fn new(sites: usize, j: f64, k: usize, gamma: f64, boundary: Boundary) -> Result<Self> {
        let m = Self { sites, j, k, gamma, boundary, trap: None };
        m.validate()?;
        Ok(m)
    }

    pub fn with_trap(mut self, v: f64) -> Self {
        self.trap = Some(v);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 1 {
            return Err(Error::InvalidArgument("lattice needs at least one site".into()));
        }
        if self.sites > MAX_LOSS_SITES {
            return Err(Error::SizeLimit { what: "lattice sites", value: self.sites, limit: MAX_LOSS_SITES });
        }
        if self.k < 1 || self.k > self.sites {
            return Err(Error::InvalidArgument(format!("loss order K = {} outside 1..={}", self.k, self.sites)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("loss rate {} must be non-negative", self.gamma)));
        }
        if !self.j.is_finite() || self.trap.is_some_and(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("hopping and trap must be finite".into()));
        }
        Ok(())
    }

    /// Starting sites (1-based) of the loss windows.
    pub fn windows(&self) -> Vec<usize> {
        let count = match self.boundary {
            Boundary::Open => self.sites - self.k + 1,
            Boundary::Periodic => self.sites,
        };
        (1..=count).collect()
    }

    fn bonds(&self) -> Vec<(usize, usize)> {
        let l = self.sites;
        let mut bonds: Vec<(usize, usize)> = (1..l).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && l > 2 {
            bonds.push((l, 1));
        }
        bonds
    }
}

pub fn build_loss_lindblad(m: &LossModel) -> Result<LindbladModel> {
    m.validate()?;
    let l = m.sites;
    let sp = sigma_plus();
    let sm = sigma_minus();
    let mut h = zeros(1 << l);
    for (a, b) in m.bonds() {
        let hop = site_op(l, a, &sp)?.dot(&site_op(l, b, &sm)?);
        h = h + &hop * r(m.j) + crate::ops::dagger(&hop) * r(m.j);
    }
    if let Some(v) = m.trap {
        let centre = (l as f64 + 1.0) / 2.0;
        for site in 1..=l {
            h = h + site_op(l, site, &number_op())? * r(v * (site as f64 - centre).powi(2));
        }
    }
    let mut jumps = Vec::new();
    if m.gamma > 0.0 {
        for start in m.windows() {
            let mut op = site_op(l, start, &sm)?;
            for off in 1..m.k {
                let site = (start - 1 + off) % l + 1;
                op = op.dot(&site_op(l, site, &sm)?);
            }
            jumps.push(op * r(m.gamma.sqrt()));
        }
    }
    LindbladModel::new(Hermitian::new(h)?, jumps)
}

/// `(1/L) sum_j <n_j>`.
pub fn mean_density(rho: &DensityMatrix, sites: usize) -> Result<f64> {
    check_state(rho, sites)?;
    let mut total = 0.0;
    for (s, p) in rho.populations().iter().enumerate() {
        total += p * s.count_ones() as f64;
    }
    Ok(total / sites as f64)
}

/// Mean density at each of the ascending `times`.
pub fn density_trajectory(m: &LossModel, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<f64>> {
    let lind = build_loss_lindblad(m)?;
    propagate_series(&lind, rho0, times, Method::ExactExp)?.iter().map(|rho| mean_density(rho, m.sites)).collect()
}

/// `G_jl = <c_j^dagger c_l>` for Jordan–Wigner fermions, read directly from the
/// computational-basis entries of `rho`.
pub fn fermion_two_point(rho: &DensityMatrix, sites: usize) -> Result<CMatrix> {
    check_state(rho, sites)?;
    let bit = |site: usize| 1usize << (sites - site);
    let mut g = zeros(sites);
    for j in 1..=sites {
        for l in 1..=sites {
            let mut acc = C64::new(0.0, 0.0);
            for s in 0..(1usize << sites) {
                if j == l {
                    if s & bit(j) != 0 {
                        acc += rho[(s, s)];
                    }
                    continue;
                }
                // c_j^dagger c_l maps |s> to sign |t>
                if s & bit(l) == 0 || s & bit(j) != 0 {
                    continue;
                }
                let t = (s & !bit(l)) | bit(j);
                let (lo, hi) = if j < l { (j, l) } else { (l, j) };
                let between = (lo + 1..hi).filter(|&x| s & bit(x) != 0).count();
                let sign = if between % 2 == 0 { 1.0 } else { -1.0 };
                acc += rho[(s, t)] * sign;
            }
            g[(j - 1, l - 1)] = acc;
        }
    }
    Ok(g)
}

/// Momentum grid `k_q = 2 pi q / L` and `n(k) = (1/L) sum_jl e^{ik(j-l)} <c_j^dagger c_l>`.
/// With open boundaries the same discrete transform is applied, although `k` is
/// then not a conserved label.
pub fn momentum_occupation(rho: &DensityMatrix, sites: usize) -> Result<Vec<(f64, f64)>> {
    let g = fermion_two_point(rho, sites)?;
    let l = sites as f64;
    Ok((0..sites)
        .map(|q| {
            let k = 2.0 * std::f64::consts::PI * q as f64 / l;
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..sites {
                for b in 0..sites {
                    acc += C64::from_polar(1.0, k * (a as f64 - b as f64)) * g[(a, b)];
                }
            }
            (k, acc.re / l)
        })
        .collect())
}

/// `(1/L) sum_q n(k_q) e^{-i k_q}`.
pub fn first_fourier_mode(nk: &[(f64, f64)]) -> C64 {
    let l = nk.len().max(1) as f64;
    nk.iter().map(|&(k, n)| C64::from_polar(n, -k)).sum::<C64>() / l
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Slope of `log n` against `log t`.
    pub alpha: f64,
    pub stderr: f64,
    pub points: usize,
    /// `|c2| w^2` for a quadratic fit of `log n` in `log t`, `w` the half-width of the window.
    pub loglog_curvature: f64,
    /// Same statistic for `log n` against `t`.
    pub semilog_curvature: f64,
    pub non_power_law: bool,
    pub non_exponential: bool,
}

/// Least-squares power-law exponent over `window = (t_min, t_max)`, with curvature
/// flags. A small lattice cannot fix asymptotic exponents, so this is a trend
/// diagnostic.
pub fn decay_exponent_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> =
        series.iter().cloned().filter(|&(t, _)| t >= window.0 && t <= window.1 && t > 0.0).collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidArgument(format!("{} points in window, need at least {MIN_FIT_POINTS}", pts.len())));
    }
    if pts.iter().any(|&(_, n)| !(n > 0.0)) {
        return Err(Error::InvalidArgument("all densities in the window must be positive".into()));
    }
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let t: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (alpha, stderr) = linear_fit(&x, &y);
    let loglog_curvature = curvature(&x, &y);
    let semilog_curvature = curvature(&t, &y);
    Ok(DecayFit {
        alpha,
        stderr,
        points: pts.len(),
        loglog_curvature,
        semilog_curvature,
        non_power_law: loglog_curvature > CURVATURE_TOL,
        non_exponential: semilog_curvature > CURVATURE_TOL,
    })
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    (slope, (ssr / (n - 2.0) / sxx).sqrt())
}

fn curvature(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let half = x.iter().map(|a| (a - mx).abs()).fold(0.0, f64::max);
    if half == 0.0 {
        return 0.0;
    }
    // normal equations for y = c0 + c1 u + c2 u^2, u = (x - mx) / half
    let u: Vec<f64> = x.iter().map(|a| (a - mx) / half).collect();
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for (ui, yi) in u.iter().zip(y) {
        let basis = [1.0, *ui, ui * ui];
        for p in 0..3 {
            b[p] += basis[p] * yi;
            for q in 0..3 {
                a[p][q] += basis[p] * basis[q];
            }
        }
    }
    solve3(a, b)[2].abs()
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn check_state(rho: &DensityMatrix, sites: usize) -> Result<()> {
    if rho.dim() != 1usize << sites {
        return Err(Error::Dimension(format!("state dim {} vs {sites} sites", rho.dim())));
    }
    Ok(())
}

/// Product state with the given occupations (site 1 first).
pub fn occupation_state(occupied: &[bool]) -> DensityMatrix {
    let n = occupied.len();
    let index = occupied.iter().enumerate().fold(0usize, |acc, (k, &o)| acc | ((o as usize) << (n - 1 - k)));
    DensityMatrix::basis(1 << n, index)
}
