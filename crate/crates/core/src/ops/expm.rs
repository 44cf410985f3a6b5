//! Matrix exponential.
//!
//! Normal matrices go through Hermitian eigendecompositions: a normal `A`
//! splits into commuting Hermitian and anti-Hermitian parts, each of which is
//! exponentiated in its own eigenbasis. Everything else uses scaling and
//! squaring with the degree 3..13 Padé approximants of Higham (2005).

use super::{
    dagger, eigh, ensure_finite, ensure_square, hermiticity_defect, identity, is_normal, max_abs, norm1, r,
    solve_matrix, CMatrix, C64,
};
use crate::error::Result;

const THETA: [(usize, f64); 4] =
    [(3, 1.495585217958292e-2), (5, 2.53939833006323e-1), (7, 9.504178996162932e-1), (9, 2.097847961257068e0)];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `exp(t M)`.
pub fn expm(m: &CMatrix, t: f64) -> Result<CMatrix> {
    let n = ensure_square(&m.view(), "matrix exponential input")?;
    ensure_finite(m, "matrix exponential input")?;
    if !t.is_finite() {
        return Err(crate::Error::Numeric(format!("non-finite time {t}")));
    }
    let a = m * r(t);
    let scale = max_abs(&a);
    if scale == 0.0 {
        return Ok(identity(n));
    }
    let out = if hermiticity_defect(&a) <= 1e-14 * scale {
        eigh(&a)?.map(|x| r(x.exp()))
    } else if hermiticity_defect(&(&a * C64::i())) <= 1e-14 * scale {
        // a = -i K with K Hermitian
        let k = &a * C64::i();
        eigh(&k)?.map(|x| C64::new(0.0, -x).exp())
    } else if is_normal(&a, 1e-13) {
        let ad = dagger(&a);
        let herm = (&a + &ad) * r(0.5);
        let k = (&a - &ad) * C64::new(0.0, 0.5);
        let eh = eigh(&herm)?.map(|x| r(x.exp()));
        let ek = eigh(&k)?.map(|x| C64::new(0.0, -x).exp());
        eh.dot(&ek)
    } else {
        expm_pade(&a)?
    };
    ensure_finite(&out, "matrix exponential result")?;
    Ok(out)
}

/// `exp(A)` by scaling and squaring with Padé approximants, for any square `A`.
pub fn expm_pade(a: &CMatrix) -> Result<CMatrix> {
    let n = ensure_square(&a.view(), "matrix exponential input")?;
    ensure_finite(a, "matrix exponential input")?;
    let eye = identity(n);
    let norm = norm1(a);

    for (degree, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match degree {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(a, &eye, coeffs);
            return solve_matrix(&(&v - &u), &(&v + &u));
        }
    }

    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let scaled = a * r(0.5f64.powi(s));
    let (u, v) = pade13(&scaled, &eye);
    let mut x = solve_matrix(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        x = x.dot(&x);
    }
    Ok(x)
}

fn pade_low(a: &CMatrix, eye: &CMatrix, b: &[f64]) -> (CMatrix, CMatrix) {
    let a2 = a.dot(a);
    let mut power = eye.clone();
    let mut odd = eye * r(b[1]);
    let mut even = eye * r(b[0]);
    for k in 1..b.len() / 2 {
        power = power.dot(&a2);
        odd = odd + &power * r(b[2 * k + 1]);
        even = even + &power * r(b[2 * k]);
    }
    (a.dot(&odd), even)
}

fn pade13(a: &CMatrix, eye: &CMatrix) -> (CMatrix, CMatrix) {
    let b = &B13;
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let inner_u = a6.dot(&(&a6 * r(b[13]) + &a4 * r(b[11]) + &a2 * r(b[9])))
        + &a6 * r(b[7])
        + &a4 * r(b[5])
        + &a2 * r(b[3])
        + eye * r(b[1]);
    let u = a.dot(&inner_u);
    let v = a6.dot(&(&a6 * r(b[12]) + &a4 * r(b[10]) + &a2 * r(b[8])))
        + &a6 * r(b[6])
        + &a4 * r(b[4])
        + &a2 * r(b[2])
        + eye * r(b[0]);
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{c, diag_real, max_abs_diff, sigma_x, zeros};
    use crate::random::{random_complex_matrix, rng};
    use proptest::prelude::*;

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(expm(&zeros(3), 2.0).unwrap(), identity(3));
    }

    #[test]
    fn involutory_rotation() {
        // exp(-i theta sigma_x) = cos(theta) I - i sin(theta) sigma_x
        let theta = 0.3;
        let m = sigma_x() * c(0.0, -1.0);
        let u = expm(&m, theta).unwrap();
        assert!((u[(0, 0)].re - 0.955_336_489_125_606).abs() < 1e-14);
        assert!((u[(0, 1)] - c(0.0, -theta.sin())).norm() < 1e-14);
    }

    #[test]
    fn diagonal_case() {
        let e = expm(&diag_real(&[-1.0, -2.0]), 1.0).unwrap();
        assert!(max_abs_diff(&e, &diag_real(&[(-1.0f64).exp(), (-2.0f64).exp()])) < 1e-15);
    }

    #[test]
    fn nilpotent_matches_series() {
        // [[0,1],[0,0]] -> I + N
        let mut n = zeros(2);
        n[(0, 1)] = r(1.0);
        let e = expm(&n, 3.0).unwrap();
        assert!((e[(0, 1)] - r(3.0)).norm() < 1e-13);
        assert!((e[(0, 0)] - r(1.0)).norm() < 1e-13);
    }

    #[test]
    fn pade_agrees_with_eigen_path_on_normal_input() {
        let mut g = rng(11);
        let h = crate::random::random_hermitian(&mut g, 5, 2.0);
        let a = &h * c(0.0, -1.0) + identity(5) * r(-0.3);
        let via_eigen = expm(&a, 1.7).unwrap();
        let via_pade = expm_pade(&(&a * r(1.7))).unwrap();
        assert!(max_abs_diff(&via_eigen, &via_pade) < 1e-11);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn inverse_identity(seed in 0u64..10_000, n in 1usize..7, t in 0.05f64..3.0) {
            let mut g = rng(seed);
            let m = random_complex_matrix(&mut g, n, 1.0);
            let p = expm(&m, t).unwrap();
            let q = expm(&m, -t).unwrap();
            prop_assert!(max_abs_diff(&p.dot(&q), &identity(n)) <= 1e-9);
        }
    }
}
