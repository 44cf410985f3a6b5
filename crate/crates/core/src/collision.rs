//! Repeated interactions with fresh ancillae.
//!
//! Each collision couples the system to an ancilla prepared in `eta` for a time
//! `tau` through `K = exp(-i tau (H_S + h + V))` and then discards the ancilla.
//! With `V` scaled as `1/sqrt(tau)` the stroboscopic dynamics approaches a
//! Lindblad semigroup as `tau -> 0`.

use crate::error::{Error, Result};
use crate::liouvillian::{propagate, KrausMap, LindbladModel, Method};
use crate::ops::{
    basis, dagger, eigh, expm, identity, partial_trace, r, sigma_minus, sigma_plus, tensor, trace_distance, CMatrix,
    DensityMatrix, Hermitian, Keep, C64,
};

/// Ancilla weights below this are treated as empty.
const WEIGHT_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct CollisionSpec {
    h_s: Hermitian,
    h_a: Hermitian,
    v: Hermitian,
    eta: DensityMatrix,
    eta_sequence: Vec<DensityMatrix>,
    tau: f64,
}

impl CollisionSpec {
    pub fn new(h_s: Hermitian, h_a: Hermitian, v: Hermitian, eta: DensityMatrix, tau: f64) -> Result<Self> {
        let (ds, da) = (h_s.dim(), h_a.dim());
        if v.dim() != ds * da {
            return Err(Error::Dimension(format!("interaction dim {} but system x ancilla = {}", v.dim(), ds * da)));
        }
        if eta.dim() != da {
            return Err(Error::Dimension(format!("ancilla state dim {} vs ancilla dim {da}", eta.dim())));
        }
        check_tau(tau)?;
        Ok(Self { h_s, h_a, v, eta, eta_sequence: Vec::new(), tau })
    }

    /// Ancilla states used cyclically, collision `k` taking `seq[k % len]`.
    pub fn with_eta_sequence(mut self, seq: Vec<DensityMatrix>) -> Result<Self> {
        if let Some(bad) = seq.iter().find(|e| e.dim() != self.ancilla_dim()) {
            return Err(Error::Dimension(format!("ancilla state dim {} vs {}", bad.dim(), self.ancilla_dim())));
        }
        self.eta_sequence = seq;
        Ok(self)
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self { tau, ..self.clone() })
    }

    /// Same spec with `V -> factor * V`.
    pub fn with_interaction_scaled(&self, factor: f64) -> Self {
        let v = Hermitian::from_hermitian_part(&(self.v.matrix() * r(factor)));
        Self { v, ..self.clone() }
    }

    pub fn system_dim(&self) -> usize {
        self.h_s.dim()
    }

    pub fn ancilla_dim(&self) -> usize {
        self.h_a.dim()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn eta(&self) -> &DensityMatrix {
        &self.eta
    }

    pub fn system_hamiltonian(&self) -> &Hermitian {
        &self.h_s
    }

    /// Ancilla state for collision number `k`.
    pub fn eta_at(&self, k: usize) -> &DensityMatrix {
        if self.eta_sequence.is_empty() {
            &self.eta
        } else {
            &self.eta_sequence[k % self.eta_sequence.len()]
        }
    }

    /// `exp(-i tau (H_S (x) 1 + 1 (x) h + V))`.
    pub fn unitary(&self) -> Result<CMatrix> {
        let total = tensor(&self.h_s, &identity(self.ancilla_dim()))?
            + tensor(&identity(self.system_dim()), &self.h_a)?
            + self.v.matrix();
        expm(&(total * C64::new(0.0, -1.0)), self.tau)
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau must be finite and non-negative, got {tau}")));
    }
    Ok(())
}

fn collide(k: &CMatrix, rho: &CMatrix, eta: &DensityMatrix, ds: usize) -> Result<CMatrix> {
    let joint = tensor(rho, eta)?;
    let evolved = k.dot(&joint).dot(&dagger(k));
    partial_trace(&evolved, (ds, eta.dim()), Keep::A)
}

/// One collision with the spec's ancilla state.
pub fn collision_map(spec: &CollisionSpec, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_state(spec, rho)?;
    let k = spec.unitary()?;
    Ok(DensityMatrix::from_evolved(collide(&k, rho, &spec.eta, spec.system_dim())?))
}

fn check_state(spec: &CollisionSpec, rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != spec.system_dim() {
        return Err(Error::Dimension(format!("state dim {} vs system dim {}", rho.dim(), spec.system_dim())));
    }
    Ok(())
}

/// Kraus form `{sqrt(pi_q) W_p^q}` of one collision, with
/// `W_p^q = <phi_p| K |phi_q>` on the system space and `eta = sum_q pi_q |phi_q><phi_q|`.
#[derive(Debug, Clone)]
pub struct CollisionKraus {
    pub map: KrausMap,
    /// `(p, q)` for each generator.
    pub indices: Vec<(usize, usize)>,
    /// Eigenvalues `pi_q` of `eta`.
    pub weights: Vec<f64>,
}

pub fn extract_kraus(spec: &CollisionSpec) -> Result<CollisionKraus> {
    let (ds, da) = (spec.system_dim(), spec.ancilla_dim());
    let k = spec.unitary()?;
    let e = eigh(&spec.eta)?;
    let mut generators = Vec::new();
    let mut indices = Vec::new();
    for q in 0..da {
        let pi = e.values[q];
        if pi <= WEIGHT_CUTOFF {
            continue;
        }
        let phi_q = e.vectors.column(q).to_owned();
        for p in 0..da {
            let phi_p = e.vectors.column(p).to_owned();
            // (1 (x) <phi_p|) K (1 (x) |phi_q>)
            let w = CMatrix::from_shape_fn((ds, ds), |(i, j)| {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..da {
                    for b in 0..da {
                        acc += phi_p[a].conj() * k[(i * da + a, j * da + b)] * phi_q[b];
                    }
                }
                acc
            });
            generators.push(w * r(pi.sqrt()));
            indices.push((p, q));
        }
    }
    let weights = e.values.to_vec();
    Ok(CollisionKraus { map: KrausMap::new(generators)?, indices, weights })
}

/// `n` collisions, each with a fresh ancilla.
pub fn stroboscopic_evolve(spec: &CollisionSpec, rho0: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    check_state(spec, rho0)?;
    let k = spec.unitary()?;
    let mut rho = rho0.matrix().clone();
    for step in 0..n {
        rho = collide(&k, &rho, spec.eta_at(step), spec.system_dim())?;
    }
    Ok(DensityMatrix::from_evolved(rho))
}

#[derive(Debug, Clone)]
pub struct ContinuumPoint {
    pub tau: f64,
    pub collisions: usize,
    pub trace_distance: f64,
}

#[derive(Debug, Clone)]
pub struct ContinuumReport {
    pub points: Vec<ContinuumPoint>,
    /// Least-squares slope of `log(distance)` against `log(tau)`; `None` when
    /// fewer than two points have a positive distance.
    pub fitted_order: Option<f64>,
}

/// Runs the collision model at each `tau` up to `t_final` and compares with
/// `exp(t_final L_ref) rho0`. With `rescale`, `V` is multiplied by
/// `sqrt(base.tau / tau)` so that `|V|^2 tau` is held fixed.
pub fn continuum_limit_check(
    base: &CollisionSpec,
    reference: &LindbladModel,
    rho0: &DensityMatrix,
    taus: &[f64],
    t_final: f64,
    rescale: bool,
) -> Result<ContinuumReport> {
    if reference.dim() != base.system_dim() {
        return Err(Error::Dimension(format!("reference dim {} vs system dim {}", reference.dim(), base.system_dim())));
    }
    let target = propagate(reference, rho0, t_final, Method::ExactExp)?;
    let mut points = Vec::with_capacity(taus.len());
    for &tau in taus {
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
        }
        let n = (t_final / tau).round();
        if (n * tau - t_final).abs() > 1e-9 * t_final.max(1.0) {
            return Err(Error::InvalidArgument(format!("t_final {t_final} is not a multiple of tau {tau}")));
        }
        let factor = if rescale { (base.tau / tau).sqrt() } else { 1.0 };
        let spec = base.with_tau(tau)?.with_interaction_scaled(factor);
        let rho = stroboscopic_evolve(&spec, rho0, n as usize)?;
        points.push(ContinuumPoint { tau, collisions: n as usize, trace_distance: trace_distance(&rho, &target)? });
    }
    let usable: Vec<(f64, f64)> =
        points.iter().filter(|p| p.trace_distance > 0.0).map(|p| (p.tau.ln(), p.trace_distance.ln())).collect();
    let fitted_order = (usable.len() >= 2).then(|| slope(&usable));
    Ok(ContinuumReport { points, fitted_order })
}

fn slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Qubit system exchanging excitations with qubit ancillae in `|0>`:
/// `V = g (sigma^+ (x) sigma^- + sigma^- (x) sigma^+)`, `H_S = h = (omega/2) sigma^z`.
/// Returns the spec and its `tau -> 0` limit with `L = sqrt(g^2 tau) sigma^-`.
pub fn exchange_qubit(g: f64, tau: f64, omega: f64) -> Result<(CollisionSpec, LindbladModel)> {
    let hz = Hermitian::new(crate::ops::sigma_z() * r(omega / 2.0))?;
    let exchange = tensor(&sigma_plus(), &sigma_minus())? + tensor(&sigma_minus(), &sigma_plus())?;
    let v = Hermitian::new(exchange * r(g))?;
    let eta = DensityMatrix::pure(&basis(2, 0))?;
    let spec = CollisionSpec::new(hz.clone(), hz.clone(), v, eta, tau)?;
    let reference = LindbladModel::new(hz, vec![sigma_minus() * r((g * g * tau).sqrt())])?;
    Ok((spec, reference))
}
