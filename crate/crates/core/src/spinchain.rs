//! Boundary-driven anisotropic Heisenberg (XXZ) chains.

use crate::error::{Error, Result};
use crate::liouvillian::{steady_state, LindbladModel, SteadyState};
use crate::ops::{
    dagger, expm, r, sigma_minus, sigma_x, sigma_y, sigma_z, site_op, two_site_op, zeros, CMatrix, Hermitian, C64,
};

pub const MAX_XXZ_SITES: usize = 8;

/// `J sum_k (sx sx + sy sy + Delta sz sz)` on an open chain.
pub fn xxz_hamiltonian(sites: usize, j: f64, delta: f64) -> Result<Hermitian> {
    check_sites(sites)?;
    let (x, y, z) = (sigma_x(), sigma_y(), sigma_z());
    let mut h = zeros(1 << sites);
    for k in 1..sites {
        h = h
            + two_site_op(sites, k, &x, k + 1, &x)?
            + two_site_op(sites, k, &y, k + 1, &y)?
            + two_site_op(sites, k, &z, k + 1, &z)? * r(delta);
    }
    Hermitian::new(h * r(j))
}

/// Single-spin operator `U sigma^- U^dagger` whose dark state has Bloch vector `n`.
pub fn polarizing_jump(n: [f64; 3]) -> Result<CMatrix> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidArgument(format!("target direction {n:?} has no length")));
    }
    let theta = (n[2] / norm).clamp(-1.0, 1.0).acos();
    let phi = n[1].atan2(n[0]);
    let u = expm(&(sigma_z() * C64::new(0.0, -phi / 2.0)), 1.0)?
        .dot(&expm(&(sigma_y() * C64::new(0.0, -theta / 2.0)), 1.0)?);
    Ok(u.dot(&sigma_minus()).dot(&dagger(&u)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct XxzConfig {
    pub sites: usize,
    pub j: f64,
    pub delta: f64,
    pub left_target: [f64; 3],
    pub right_target: [f64; 3],
    pub gamma_left: f64,
    pub gamma_right: f64,
}

pub fn xxz_model(cfg: &XxzConfig) -> Result<LindbladModel> {
    if !(cfg.gamma_left >= 0.0) || !(cfg.gamma_right >= 0.0) {
        return Err(Error::InvalidArgument("boundary rates must be non-negative".into()));
    }
    let h = xxz_hamiltonian(cfg.sites, cfg.j, cfg.delta)?;
    let left = site_op(cfg.sites, 1, &polarizing_jump(cfg.left_target)?)? * r(cfg.gamma_left.sqrt());
    let right = site_op(cfg.sites, cfg.sites, &polarizing_jump(cfg.right_target)?)? * r(cfg.gamma_right.sqrt());
    LindbladModel::new(h, vec![left, right])
}

/// Spin-current operators `[j^x, j^y, j^z]` on bond `(k, k+1)`, 1-based.
///
/// `j^z = 2J (sx_k sy_{k+1} - sy_k sx_{k+1})` is the conserved current. The
/// transverse magnetizations are not conserved for `Delta != 1`; their currents
/// average the flow out of site `k` and into site `k+1`, which gives
/// `j^x = J(1+Delta)(sy_k sz_{k+1} - sz_k sy_{k+1})` and the cyclic partner for `j^y`.
pub fn spin_current_operators(sites: usize, j: f64, delta: f64, k: usize) -> Result<[CMatrix; 3]> {
    check_sites(sites)?;
    if k < 1 || k >= sites {
        return Err(Error::InvalidArgument(format!("bond {k} outside 1..{sites}")));
    }
    let (x, y, z) = (sigma_x(), sigma_y(), sigma_z());
    let pair = |a: &CMatrix, b: &CMatrix| two_site_op(sites, k, a, k + 1, b);
    let t = j * (1.0 + delta);
    Ok([
        (pair(&y, &z)? - pair(&z, &y)?) * r(t),
        (pair(&z, &x)? - pair(&x, &z)?) * r(t),
        (pair(&x, &y)? - pair(&y, &x)?) * r(2.0 * j),
    ])
}

#[derive(Debug, Clone)]
pub struct XxzReport {
    /// `currents[a][k-1]` is component `a` (x, y, z) on bond `k`.
    pub currents: [Vec<f64>; 3],
    /// `max - min` of each component across bonds.
    pub flatness: [f64; 3],
    /// `<sigma^a_k>` per site.
    pub magnetization: Vec<[f64; 3]>,
    pub steady: SteadyState,
}

pub fn xxz_ness(cfg: &XxzConfig) -> Result<XxzReport> {
    let model = xxz_model(cfg)?;
    let steady = steady_state(&model)?;
    if !steady.unique {
        return Err(Error::Degenerate(format!("steady state is not unique (null space {})", steady.null_dim)));
    }
    let rho = &steady.state;
    let mut currents: [Vec<f64>; 3] = Default::default();
    for k in 1..cfg.sites {
        let ops = spin_current_operators(cfg.sites, cfg.j, cfg.delta, k)?;
        for (a, op) in ops.iter().enumerate() {
            currents[a].push(rho.expectation(op).re);
        }
    }
    let flatness = currents.clone().map(|v| {
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        if v.is_empty() {
            0.0
        } else {
            hi - lo
        }
    });
    let paulis = [sigma_x(), sigma_y(), sigma_z()];
    let magnetization = (1..=cfg.sites)
        .map(|s| {
            let mut m = [0.0; 3];
            for (a, p) in paulis.iter().enumerate() {
                m[a] = rho.expectation(&site_op(cfg.sites, s, p)?).re;
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(XxzReport { currents, flatness, magnetization, steady })
}

fn check_sites(sites: usize) -> Result<()> {
    if sites < 2 {
        return Err(Error::InvalidArgument("chain needs at least two sites".into()));
    }
    if sites > MAX_XXZ_SITES {
        return Err(Error::SizeLimit { what: "chain sites", value: sites, limit: MAX_XXZ_SITES });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{commutator, max_abs, max_abs_diff};

    fn cfg(left: [f64; 3], right: [f64; 3]) -> XxzConfig {
        XxzConfig {
            sites: 4,
            j: 1.0,
            delta: 0.5,
            left_target: left,
            right_target: right,
            gamma_left: 1.0,
            gamma_right: 1.0,
        }
    }

    #[test]
    fn polarizing_jump_dark_state() {
        for n in [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.3, -0.4, 0.5], [0.0, 0.0, -1.0]] {
            let l = polarizing_jump(n).unwrap();
            let m = crate::liouvillian::LindbladModel::new(Hermitian::zeros(2), vec![l]).unwrap();
            let s = steady_state(&m).unwrap();
            let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            let bloch = [sigma_x(), sigma_y(), sigma_z()].map(|p| s.state.expectation(&p).re);
            for a in 0..3 {
                assert!((bloch[a] - n[a] / norm).abs() < 1e-10, "{n:?}");
            }
        }
        assert!(max_abs_diff(&polarizing_jump([0.0, 0.0, 2.0]).unwrap(), &sigma_minus()) < 1e-15);
        assert!(polarizing_jump([0.0; 3]).is_err());
    }

    #[test]
    fn z_current_is_continuity_current() {
        let (l, j, delta) = (3, 0.8, 0.4);
        let h = xxz_hamiltonian(l, j, delta).unwrap();
        // d sz_2/dt = i[H, sz_2] = j_1 - j_2
        let dz = commutator(h.matrix(), &site_op(l, 2, &sigma_z()).unwrap()) * C64::new(0.0, 1.0);
        let j1 = spin_current_operators(l, j, delta, 1).unwrap();
        let j2 = spin_current_operators(l, j, delta, 2).unwrap();
        assert!(max_abs(&(&dz - &(&j1[2] - &j2[2]))) < 1e-13);
    }

    #[test]
    fn aligned_boundaries_carry_no_current() {
        let rep = xxz_ness(&cfg([0.0, 0.0, 1.0], [0.0, 0.0, 1.0])).unwrap();
        for comp in &rep.currents {
            for v in comp {
                assert!(v.abs() <= 1e-9);
            }
        }
        for m in &rep.magnetization {
            assert!((m[2] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn twisted_boundaries_drive_all_components() {
        let rep = xxz_ness(&cfg([0.0, 0.0, 1.0], [1.0, 0.0, 0.0])).unwrap();
        for comp in &rep.currents {
            assert!(comp.iter().all(|v| v.abs() > 1e-6), "{:?}", rep.currents);
        }
        assert!(rep.flatness[2] <= 1e-9);
        assert!(rep.steady.residual < 1e-10);
    }

    #[test]
    fn size_limits() {
        assert!(xxz_hamiltonian(1, 1.0, 1.0).is_err());
        assert!(xxz_hamiltonian(9, 1.0, 1.0).is_err());
        assert!(spin_current_operators(3, 1.0, 1.0, 3).is_err());
    }
}
