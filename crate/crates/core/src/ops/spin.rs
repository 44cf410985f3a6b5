//! Spin-1/2 and fermion operator factories.
//!
//! Local basis: index 0 is the empty (spin-up, `sigma_z = +1`) state and index
//! 1 the occupied one, so `sigma_minus = |0><1|` removes a particle. Sites are
//! numbered from 1; site 1 is the leftmost (most significant) tensor factor.

use ndarray::array;

use super::{c, identity, r, tensor_all, CMatrix, ONE, ZERO};
use crate::error::{Error, Result};

pub fn sigma_x() -> CMatrix {
    array![[ZERO, ONE], [ONE, ZERO]]
}

pub fn sigma_y() -> CMatrix {
    array![[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]]
}

pub fn sigma_z() -> CMatrix {
    array![[ONE, ZERO], [ZERO, r(-1.0)]]
}

/// `|0><1|`
pub fn sigma_minus() -> CMatrix {
    array![[ZERO, ONE], [ZERO, ZERO]]
}

/// `|1><0|`
pub fn sigma_plus() -> CMatrix {
    array![[ZERO, ZERO], [ONE, ZERO]]
}

/// Occupation `sigma_plus * sigma_minus = |1><1|`.
pub fn number_op() -> CMatrix {
    array![[ZERO, ZERO], [ZERO, ONE]]
}

fn check_site(sites: usize, j: usize) -> Result<()> {
    if j == 0 || j > sites {
        return Err(Error::InvalidArgument(format!("site {j} outside 1..={sites}")));
    }
    Ok(())
}

/// `op` acting on site `j` of a chain of `sites` identical local spaces.
pub fn site_op(sites: usize, j: usize, op: &CMatrix) -> Result<CMatrix> {
    check_site(sites, j)?;
    let d = op.nrows();
    let left = identity(d.pow((j - 1) as u32));
    let right = identity(d.pow((sites - j) as u32));
    tensor_all([&left, op, &right])
}

/// `a` on site `i` times `b` on site `j` (`i != j`).
pub fn two_site_op(sites: usize, i: usize, a: &CMatrix, j: usize, b: &CMatrix) -> Result<CMatrix> {
    if i == j {
        return Err(Error::InvalidArgument("two_site_op needs distinct sites".into()));
    }
    Ok(site_op(sites, i, a)?.dot(&site_op(sites, j, b)?))
}

/// Jordan–Wigner annihilation operator `c_j = (prod_{l<j} sigma_z_l) sigma_minus_j`.
pub fn jordan_wigner_lowering(sites: usize, j: usize) -> Result<CMatrix> {
    check_site(sites, j)?;
    let z = sigma_z();
    let m = sigma_minus();
    let id = identity(2);
    let factors: Vec<&CMatrix> = (1..=sites)
        .map(|l| {
            if l < j {
                &z
            } else if l == j {
                &m
            } else {
                &id
            }
        })
        .collect();
    tensor_all(factors)
}

/// All annihilation operators `c_1 .. c_L`.
pub fn jordan_wigner_set(sites: usize) -> Result<Vec<CMatrix>> {
    (1..=sites).map(|j| jordan_wigner_lowering(sites, j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{anticommutator, dagger, max_abs, max_abs_diff, zeros};

    #[test]
    fn single_mode_is_sigma_minus() {
        assert_eq!(jordan_wigner_lowering(1, 1).unwrap(), array![[ZERO, ONE], [ZERO, ZERO]]);
    }

    #[test]
    fn two_modes_anticommute() {
        let c1 = jordan_wigner_lowering(2, 1).unwrap();
        let c2 = jordan_wigner_lowering(2, 2).unwrap();
        assert_eq!(max_abs(&anticommutator(&c1, &c2)), 0.0);
    }

    #[test]
    fn three_modes_selected_relations() {
        let c1 = jordan_wigner_lowering(3, 1).unwrap();
        let c3 = jordan_wigner_lowering(3, 3).unwrap();
        assert_eq!(max_abs(&anticommutator(&dagger(&c1), &c3)), 0.0);
        assert_eq!(anticommutator(&dagger(&c3), &c3), identity(8));
    }

    #[test]
    fn fermi_dirac_algebra_exhaustive() {
        for sites in 1..=6 {
            let cs = jordan_wigner_set(sites).unwrap();
            let n = 1 << sites;
            let cds: Vec<_> = cs.iter().map(dagger).collect();
            for i in 0..sites {
                for j in 0..sites {
                    let expect = if i == j { identity(n) } else { zeros(n) };
                    assert_eq!(max_abs_diff(&anticommutator(&cds[i], &cs[j]), &expect), 0.0);
                    assert_eq!(max_abs(&anticommutator(&cs[i], &cs[j])), 0.0);
                }
            }
        }
    }

    #[test]
    fn out_of_range_site() {
        assert!(jordan_wigner_lowering(3, 0).is_err());
        assert!(jordan_wigner_lowering(3, 4).is_err());
    }

    #[test]
    fn pauli_algebra() {
        let xy = sigma_x().dot(&sigma_y());
        assert!(max_abs_diff(&xy, &(sigma_z() * c(0.0, 1.0))) < 1e-15);
        assert_eq!(sigma_plus().dot(&sigma_minus()), number_op());
    }
}
