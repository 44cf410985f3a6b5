use super::{build_superoperator, LindbladModel};
use crate::error::{Error, Result};
use crate::ops::{expm, hermitian_part, max_abs, r, unvectorize, vectorize, CMatrix, DensityMatrix};

/// System dimensions up to this use the dense superoperator exponential;
/// larger systems use a matrix-free scaled Taylor expansion of `exp(tL)`.
const DENSE_EXP_MAX_DIM: usize = 16;

/// Time-stepping method for [`propagate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// `exp(t L)` applied to `vec(rho)`, accurate to round-off.
    #[default]
    ExactExp,
    /// Embedded Dormand–Prince 5(4) with the default [`RkOptions`].
    AdaptiveRk,
}

#[derive(Debug, Clone, Copy)]
pub struct RkOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 2_000_000 }
    }
}

type Stepper<'a> = Box<dyn FnMut(&CMatrix, f64) -> Result<CMatrix> + 'a>;

/// `rho(t) = exp(t L) rho0`.
pub fn propagate(m: &LindbladModel, rho0: &DensityMatrix, t: f64, method: Method) -> Result<DensityMatrix> {
    Ok(propagate_series(m, rho0, &[t], method)?.remove(0))
}

/// States at each of the ascending, non-negative `times`.
pub fn propagate_series(
    m: &LindbladModel,
    rho0: &DensityMatrix,
    times: &[f64],
    method: Method,
) -> Result<Vec<DensityMatrix>> {
    if rho0.dim() != m.dim() {
        return Err(Error::Dimension(format!("state dim {} vs model dim {}", rho0.dim(), m.dim())));
    }
    let mut prev = 0.0;
    for &t in times {
        if !(t >= prev) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("times must be finite, non-negative and ascending (got {t})")));
        }
        prev = t;
    }
    let mut stepper: Stepper<'_> = match method {
        Method::ExactExp if m.dim() <= DENSE_EXP_MAX_DIM => {
            let s = build_superoperator(m)?;
            let n = m.dim();
            let mut cache: Option<(f64, CMatrix)> = None;
            Box::new(move |x: &CMatrix, dt: f64| {
                let reuse = matches!(&cache, Some((h, _)) if *h == dt);
                if !reuse {
                    cache = Some((dt, expm(s.matrix(), dt)?));
                }
                let (_, e) = cache.as_ref().expect("cache filled above");
                unvectorize(&e.dot(&vectorize(x)), n)
            })
        }
        Method::ExactExp => Box::new(|x: &CMatrix, dt: f64| Ok(taylor_exp_action(m, x, dt))),
        Method::AdaptiveRk => {
            let opts = RkOptions::default();
            Box::new(move |x: &CMatrix, dt: f64| rk45(m, x, dt, &opts))
        }
    };

    let mut out = Vec::with_capacity(times.len());
    let mut current = rho0.matrix().clone();
    let mut now = 0.0;
    for &t in times {
        let dt = t - now;
        if dt > 0.0 {
            current = stepper(&current, dt)?;
        }
        now = t;
        out.push(DensityMatrix::from_evolved(current.clone()));
    }
    Ok(out)
}

/// `exp(t L) x` by `s` substeps of a truncated Taylor series with `||t L|| / s <= 1`.
fn taylor_exp_action(m: &LindbladModel, x: &CMatrix, t: f64) -> CMatrix {
    let norm = m.norm_estimate() * t;
    let substeps = norm.ceil().max(1.0) as usize;
    let h = t / substeps as f64;
    let mut y = x.clone();
    for _ in 0..substeps {
        let mut term = y.clone();
        let mut sum = y.clone();
        for k in 1..=60 {
            term = m.apply(&term) * r(h / k as f64);
            sum += &term;
            if max_abs(&term) <= 1e-17 * max_abs(&sum) {
                break;
            }
        }
        y = sum;
    }
    y
}

// Dormand–Prince 5(4) tableau; the generator is autonomous so stage times are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn rk45(m: &LindbladModel, x0: &CMatrix, t: f64, opts: &RkOptions) -> Result<CMatrix> {
    let f = |y: &CMatrix| m.apply(y);
    let mut y = x0.clone();
    let mut now = 0.0;
    let mut h = (0.1 / m.norm_estimate().max(1e-12)).min(t);
    let mut k1 = f(&y);
    let mut steps = 0;
    while now < t {
        if steps >= opts.max_steps {
            return Err(Error::Integration(format!("step budget {} exhausted at t={now}", opts.max_steps)));
        }
        steps += 1;
        let last = now + h >= t;
        if last {
            h = t - now;
        }
        let k2 = f(&(&y + &(&k1 * r(h * A21))));
        let k3 = f(&(&y + &(&k1 * r(h * A31) + &k2 * r(h * A32))));
        let k4 = f(&(&y + &(&k1 * r(h * A41) + &k2 * r(h * A42) + &k3 * r(h * A43))));
        let k5 = f(&(&y + &(&k1 * r(h * A51) + &k2 * r(h * A52) + &k3 * r(h * A53) + &k4 * r(h * A54))));
        let k6 =
            f(&(&y + &(&k1 * r(h * A61) + &k2 * r(h * A62) + &k3 * r(h * A63) + &k4 * r(h * A64) + &k5 * r(h * A65))));
        let y_new = &y + &(&k1 * r(h * B1) + &k3 * r(h * B3) + &k4 * r(h * B4) + &k5 * r(h * B5) + &k6 * r(h * B6));
        let k7 = f(&y_new);
        let err =
            &k1 * r(h * E1) + &k3 * r(h * E3) + &k4 * r(h * E4) + &k5 * r(h * E5) + &k6 * r(h * E6) + &k7 * r(h * E7);
        let scale = opts.atol + opts.rtol * max_abs(&y).max(max_abs(&y_new));
        let ratio = max_abs(&err) / scale;
        if ratio <= 1.0 {
            now = if last { t } else { now + h };
            // Hermiticity is restored every accepted step
            y = hermitian_part(&y_new);
            k1 = f(&y);
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * t.max(1.0) && now < t {
            return Err(Error::Integration(format!("step size underflow ({h:.3e}) at t={now}")));
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{eigh, max_abs_diff, sigma_minus, sigma_z, Hermitian};
    use crate::random::{random_density_matrix, random_hermitian, random_lindblad, rng};

    fn amplitude_damping(gamma: f64) -> LindbladModel {
        let h = Hermitian::new(sigma_z() * r(0.5)).unwrap();
        LindbladModel::new(h, vec![sigma_minus() * r(gamma.sqrt())]).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let m = amplitude_damping(1.0);
        let rho = DensityMatrix::basis(2, 1);
        for method in [Method::ExactExp, Method::AdaptiveRk] {
            assert_eq!(propagate(&m, &rho, 0.0, method).unwrap(), rho);
        }
    }

    #[test]
    fn amplitude_damping_population() {
        let gamma = 2.0;
        let m = amplitude_damping(gamma);
        for method in [Method::ExactExp, Method::AdaptiveRk] {
            let rho = propagate(&m, &DensityMatrix::basis(2, 1), 1.0 / gamma, method).unwrap();
            assert!((rho[(1, 1)].re - 0.367_879_441_171_442_3).abs() < 1e-8, "{method:?}");
        }
    }

    #[test]
    fn unitary_evolution_is_isospectral() {
        let mut g = rng(9);
        let h = Hermitian::from_hermitian_part(&random_hermitian(&mut g, 4, 1.0));
        let m = LindbladModel::unitary(h);
        let rho = random_density_matrix(&mut g, 4);
        let before = eigh(&rho).unwrap().values;
        for t in [0.3, 2.0, 11.0] {
            let after = eigh(&propagate(&m, &rho, t, Method::ExactExp).unwrap()).unwrap().values;
            for (a, b) in before.iter().zip(after.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn methods_agree_and_semigroup_holds() {
        let mut g = rng(10);
        for n in [2, 3, 5, 8] {
            let m = random_lindblad(&mut g, n, 2);
            let rho = random_density_matrix(&mut g, n);
            let exact = propagate(&m, &rho, 1.3, Method::ExactExp).unwrap();
            let rk = propagate(&m, &rho, 1.3, Method::AdaptiveRk).unwrap();
            assert!(max_abs_diff(&exact, &rk) < 1e-7, "n={n}");
            let half = propagate(&m, &rho, 0.5, Method::ExactExp).unwrap();
            let two_step = propagate(&m, &half, 0.8, Method::ExactExp).unwrap();
            assert!(max_abs_diff(&exact, &two_step) < 1e-9);
        }
    }

    #[test]
    fn taylor_path_matches_dense_exponential() {
        let mut g = rng(12);
        let m = random_lindblad(&mut g, 6, 2);
        let rho = random_density_matrix(&mut g, 6);
        let s = build_superoperator(&m).unwrap();
        let dense = unvectorize(&expm(s.matrix(), 0.9).unwrap().dot(&vectorize(&rho)), 6).unwrap();
        let taylor = taylor_exp_action(&m, &rho, 0.9);
        assert!(max_abs_diff(&dense, &taylor) < 1e-12);
    }

    #[test]
    fn rejects_descending_times() {
        let m = amplitude_damping(1.0);
        let rho = DensityMatrix::basis(2, 1);
        assert!(propagate_series(&m, &rho, &[1.0, 0.5], Method::ExactExp).is_err());
        assert!(propagate(&m, &rho, -1.0, Method::ExactExp).is_err());
    }
}
