use rand::Rng;
use rayon::prelude::*;

use super::LindbladModel;
use crate::error::{Error, Result};
use crate::ops::{eigh, identity, outer, zeros, CMatrix, CVector, DensityMatrix, C64};
use crate::random::stream;

/// Largest accepted `dt * max_rate`.
pub const MAX_JUMP_PROBABILITY: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
pub struct TrajectoryOptions {
    pub t: f64,
    pub dt: f64,
    pub n_traj: usize,
    pub seed: u64,
}

/// Jump counts for one channel across the ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpStats {
    pub total: u64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsembleResult {
    pub n_traj: usize,
    pub n_steps: usize,
    /// Step actually used, `t / n_steps`.
    pub dt: f64,
    pub seed: u64,
    pub mean_state: DensityMatrix,
    pub jump_stats: Vec<JumpStats>,
    /// Standard error of each diagonal entry of `mean_state`.
    pub diag_stderr: Vec<f64>,
    /// `sqrt(N)/2 * sqrt(sum_ij Var(rho_ij) / n_traj)`, a sampling-error scale
    /// for the trace distance of `mean_state` to the ensemble limit.
    pub stat_error: f64,
}

/// First-order quantum-jump unraveling. Each trajectory draws from its own
/// stream keyed by `(seed, index)`, so results do not depend on scheduling.
pub fn run_trajectories(
    m: &LindbladModel,
    psi0: &CVector,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryEnsembleResult> {
    let n = m.dim();
    if psi0.len() != n {
        return Err(Error::Dimension(format!("state length {} vs model dim {n}", psi0.len())));
    }
    let norm = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("initial state norm {norm}")));
    }
    if opts.n_traj < 1 {
        return Err(Error::InvalidArgument("n_traj must be at least 1".into()));
    }
    if !(opts.dt > 0.0) || !opts.dt.is_finite() || !(opts.t >= 0.0) || !opts.t.is_finite() {
        return Err(Error::InvalidArgument(format!("need dt > 0 and t >= 0 (dt={}, t={})", opts.dt, opts.t)));
    }
    let max_rate = if m.jumps().is_empty() { 0.0 } else { eigh(m.decay_operator())?.values[n - 1] };
    if opts.dt * max_rate > MAX_JUMP_PROBABILITY {
        return Err(Error::InvalidArgument(format!(
            "dt * max_rate = {:.3e} exceeds {MAX_JUMP_PROBABILITY}",
            opts.dt * max_rate
        )));
    }

    let n_steps = (opts.t / opts.dt).ceil() as usize;
    let dt = if n_steps == 0 { 0.0 } else { opts.t / n_steps as f64 };
    let drift = identity(n) - m.effective_hamiltonian() * C64::new(0.0, dt);

    let runs: Vec<(CVector, Vec<u64>)> = (0..opts.n_traj)
        .into_par_iter()
        .map(|k| single_trajectory(m, &drift, psi0, dt, n_steps, opts.seed, k as u64))
        .collect();

    let channels = m.jumps().len();
    let mut mean = zeros(n);
    let mut second = ndarray::Array2::<f64>::zeros((n, n));
    let mut totals = vec![0u64; channels];
    let mut sq = vec![0f64; channels];
    for (psi, counts) in &runs {
        let p = outer(psi, psi);
        mean += &p;
        second = second + p.mapv(|z| z.norm_sqr());
        for (j, &c) in counts.iter().enumerate() {
            totals[j] += c;
            sq[j] += (c as f64).powi(2);
        }
    }
    let nt = opts.n_traj as f64;
    mean /= C64::new(nt, 0.0);
    let second = second / nt;
    let var = |i: usize, j: usize| (second[(i, j)] - mean[(i, j)].norm_sqr()).max(0.0);
    let denom = (nt - 1.0).max(1.0);
    let diag_stderr = (0..n).map(|i| (var(i, i) * nt / denom / nt).sqrt()).collect();
    let total_var: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| var(i, j)).sum();
    let stat_error = 0.5 * (n as f64).sqrt() * (total_var * nt / denom / nt).sqrt();
    let jump_stats = (0..channels)
        .map(|j| {
            let mu = totals[j] as f64 / nt;
            let v = (sq[j] / nt - mu * mu).max(0.0) * nt / denom;
            JumpStats { total: totals[j], mean: mu, std: v.sqrt() }
        })
        .collect();

    Ok(TrajectoryEnsembleResult {
        n_traj: opts.n_traj,
        n_steps,
        dt,
        seed: opts.seed,
        mean_state: DensityMatrix::from_evolved(mean),
        jump_stats,
        diag_stderr,
        stat_error,
    })
}

fn single_trajectory(
    m: &LindbladModel,
    drift: &CMatrix,
    psi0: &CVector,
    dt: f64,
    n_steps: usize,
    seed: u64,
    index: u64,
) -> (CVector, Vec<u64>) {
    let mut g = stream(seed, index);
    let mut psi = psi0.clone();
    let mut counts = vec![0u64; m.jumps().len()];
    let mut branches: Vec<CVector> = Vec::with_capacity(m.jumps().len());
    let mut probs: Vec<f64> = Vec::with_capacity(m.jumps().len());
    for _ in 0..n_steps {
        branches.clear();
        probs.clear();
        for l in m.jumps() {
            let phi = l.dot(&psi);
            probs.push(dt * phi.iter().map(|z| z.norm_sqr()).sum::<f64>());
            branches.push(phi);
        }
        let u: f64 = g.random();
        let mut acc = 0.0;
        let mut jumped = None;
        for (j, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                jumped = Some(j);
                break;
            }
        }
        psi = match jumped {
            Some(j) => {
                counts[j] += 1;
                normalized(&branches[j])
            }
            None => normalized(&drift.dot(&psi)),
        };
    }
    (psi, counts)
}

fn normalized(v: &CVector) -> CVector {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v / C64::new(norm, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::{propagate, Method};
    use crate::ops::{basis, expm, max_abs_diff, r, sigma_minus, sigma_x, sigma_z, trace_distance, Hermitian};

    fn damped(gamma: f64) -> LindbladModel {
        let h = Hermitian::new(sigma_z() * r(0.5)).unwrap();
        LindbladModel::new(h, vec![sigma_minus() * r(gamma.sqrt())]).unwrap()
    }

    #[test]
    fn closed_system_is_deterministic_unitary() {
        let h = Hermitian::new(sigma_x() * r(0.7)).unwrap();
        let m = LindbladModel::unitary(h.clone());
        let psi0 = basis(2, 0);
        let opts = TrajectoryOptions { t: 1.0, dt: 1e-4, n_traj: 3, seed: 1 };
        let res = run_trajectories(&m, &psi0, &opts).unwrap();
        let u = expm(&(h.matrix() * C64::new(0.0, -1.0)), 1.0).unwrap();
        let psi = u.dot(&psi0);
        // first-order drift with renormalization: error O(dt)
        assert!(max_abs_diff(&res.mean_state, &outer(&psi, &psi)) < 1e-3);
        assert!(res.stat_error < 1e-6);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let m = damped(1.0);
        let opts = TrajectoryOptions { t: 0.5, dt: 1e-2, n_traj: 64, seed: 99 };
        let a = run_trajectories(&m, &basis(2, 1), &opts).unwrap();
        let b = run_trajectories(&m, &basis(2, 1), &opts).unwrap();
        assert_eq!(a, b);
        let c = run_trajectories(&m, &basis(2, 1), &TrajectoryOptions { seed: 100, ..opts }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn damped_qubit_population() {
        let m = damped(1.0);
        let opts = TrajectoryOptions { t: 1.0, dt: 1e-3, n_traj: 4000, seed: 3 };
        let res = run_trajectories(&m, &basis(2, 1), &opts).unwrap();
        let p1 = res.mean_state[(1, 1)].re;
        let bound = (3.0 * res.diag_stderr[1]).max(5.0 * opts.dt);
        assert!((p1 - (-1.0f64).exp()).abs() <= bound, "p1={p1} bound={bound}");
        let exact = propagate(&m, &DensityMatrix::basis(2, 1), 1.0, Method::ExactExp).unwrap();
        let d = trace_distance(&res.mean_state, &exact).unwrap();
        assert!(d <= (3.0 * res.stat_error).max(5.0 * opts.dt));
        // each trajectory jumps at most once
        assert!(res.jump_stats[0].total <= 4000);
    }

    #[test]
    fn rejects_bad_arguments() {
        let m = damped(1.0);
        let psi = basis(2, 1);
        let base = TrajectoryOptions { t: 1.0, dt: 1e-3, n_traj: 10, seed: 0 };
        assert!(run_trajectories(&m, &psi, &TrajectoryOptions { dt: 0.2, ..base }).is_err());
        assert!(run_trajectories(&m, &psi, &TrajectoryOptions { n_traj: 0, ..base }).is_err());
        assert!(run_trajectories(&m, &(psi.clone() * r(2.0)), &base).is_err());
        assert!(run_trajectories(&m, &basis(3, 0), &base).is_err());
    }
}
