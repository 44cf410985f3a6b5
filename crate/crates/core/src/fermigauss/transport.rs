use ndarray::Array2;
use rayon::prelude::*;

use super::{bond_currents, lyapunov_steady, LyapunovModel};
use crate::error::{Error, Result};
use crate::ops::{diag_real, r, zeros, Hermitian, C64};

/// Nearest-neighbour hopping matrix with amplitude `j` on an open chain.
pub fn chain_hopping(l: usize, j: f64) -> Hermitian {
    let mut t = zeros(l);
    for k in 0..l.saturating_sub(1) {
        t[(k, k + 1)] = r(j);
        t[(k + 1, k)] = r(j);
    }
    Hermitian::new(t).expect("real symmetric")
}

/// Open chain of `l` sites whose end sites each exchange particles with one
/// ancilla mode of occupation `n_left` or `n_right`.
pub fn boundary_driven_chain(l: usize, j: f64, g: f64, n_left: f64, n_right: f64) -> Result<LyapunovModel> {
    if l < 1 {
        return Err(Error::InvalidArgument("chain needs at least one site".into()));
    }
    let mut theta = Array2::<C64>::zeros((l, 2));
    theta[(0, 0)] = r(1.0);
    theta[(l - 1, 1)] = r(1.0);
    LyapunovModel::new(chain_hopping(l, j), theta, g, diag_real(&[n_left, n_right]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallisticPoint {
    pub length: usize,
    /// Current on the first bond.
    pub current: f64,
    /// `max_k j_k - min_k j_k` over the bonds of this chain.
    pub bond_spread: f64,
    pub unique: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallisticReport {
    pub points: Vec<BallisticPoint>,
    /// `(max j - min j) / max |j|` across lengths, or the absolute spread when
    /// every current vanishes.
    pub spread: f64,
}

/// Steady current versus chain length. Lengths are solved concurrently.
pub fn ballistic_scaling_experiment(
    g: f64,
    j: f64,
    n_left: f64,
    n_right: f64,
    lengths: &[usize],
) -> Result<BallisticReport> {
    if lengths.iter().any(|&l| l < 2) {
        return Err(Error::InvalidArgument("chain lengths must be at least 2".into()));
    }
    let points = lengths
        .par_iter()
        .map(|&l| {
            let m = boundary_driven_chain(l, j, g, n_left, n_right)?;
            let s = lyapunov_steady(&m)?;
            let currents = bond_currents(&s.correlation, j)?;
            let hi = currents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = currents.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(BallisticPoint { length: l, current: currents[0], bond_spread: hi - lo, unique: s.unique })
        })
        .collect::<Result<Vec<_>>>()?;
    let hi = points.iter().map(|p| p.current).fold(f64::NEG_INFINITY, f64::max);
    let lo = points.iter().map(|p| p.current).fold(f64::INFINITY, f64::min);
    let scale = points.iter().map(|p| p.current.abs()).fold(0.0, f64::max);
    let spread = if points.is_empty() {
        0.0
    } else if scale > 1e-12 {
        (hi - lo) / scale
    } else {
        hi - lo
    };
    Ok(BallisticReport { points, spread })
}
