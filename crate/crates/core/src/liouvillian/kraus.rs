use super::LindbladModel;
use crate::error::{Error, Result};
use crate::ops::{dagger, identity, max_abs_diff, r, zeros, CMatrix, DensityMatrix, C64};

/// Largest accepted `max |sum K^dagger K - I|`.
pub const KRAUS_COMPLETENESS_TOL: f64 = 1e-8;

/// Completely positive trace-preserving map `rho -> sum_a K_a rho K_a^dagger`.
#[derive(Debug, Clone)]
pub struct KrausMap {
    generators: Vec<CMatrix>,
    dim: usize,
}

impl KrausMap {
    pub fn new(generators: Vec<CMatrix>) -> Result<Self> {
        let map = Self::unchecked(generators)?;
        let deviation = map.completeness_defect();
        if deviation > KRAUS_COMPLETENESS_TOL {
            return Err(Error::KrausCompleteness { deviation });
        }
        Ok(map)
    }

    fn unchecked(generators: Vec<CMatrix>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::InvalidArgument("a Kraus map needs at least one generator".into()))?;
        let dim = first.nrows();
        for (k, g) in generators.iter().enumerate() {
            if g.dim() != (dim, dim) {
                return Err(Error::Dimension(format!("Kraus generator {k} has shape {:?}", g.dim())));
            }
        }
        Ok(Self { generators, dim })
    }

    /// First-order step `K_0 = I - dt (iH + 1/2 sum L^dagger L)`, `K_j = sqrt(dt) L_j`.
    /// Completeness holds only to `O(dt^2)`, so it is not enforced.
    pub fn first_order(m: &LindbladModel, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let k0 = identity(m.dim()) - m.effective_hamiltonian() * C64::new(0.0, dt);
        let mut generators = vec![k0];
        generators.extend(m.jumps().iter().map(|l| l * r(dt.sqrt())));
        Self::unchecked(generators)
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `max |sum K^dagger K - I|`.
    pub fn completeness_defect(&self) -> f64 {
        let mut sum = zeros(self.dim);
        for k in &self.generators {
            sum = sum + dagger(k).dot(k);
        }
        max_abs_diff(&sum, &identity(self.dim))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_evolved(self.apply_matrix(rho)?))
    }

    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check(x)?;
        let mut out = zeros(self.dim);
        for k in &self.generators {
            out = out + k.dot(x).dot(&dagger(k));
        }
        Ok(out)
    }

    /// Heisenberg-picture map `X -> sum_a K_a^dagger X K_a`.
    pub fn dual(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check(x)?;
        let mut out = zeros(self.dim);
        for k in &self.generators {
            out = out + dagger(k).dot(x).dot(k);
        }
        Ok(out)
    }

    /// `n`-fold application.
    pub fn apply_n(&self, rho: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
        let mut x = rho.matrix().clone();
        for _ in 0..n {
            x = self.apply_matrix(&x)?;
        }
        Ok(DensityMatrix::from_evolved(x))
    }

    fn check(&self, x: &CMatrix) -> Result<()> {
        if x.dim() != (self.dim, self.dim) {
            return Err(Error::Dimension(format!("operator shape {:?}, map dim {}", x.dim(), self.dim)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::{propagate, Method};
    use crate::ops::{diag_real, expm, ket_bra, sigma_minus, sigma_x, trace_distance, Hermitian};
    use crate::random::{random_density_matrix, random_lindblad, rng};

    #[test]
    fn unitary_channel() {
        let u = expm(&(sigma_x() * C64::new(0.0, -0.4)), 1.0).unwrap();
        let map = KrausMap::new(vec![u.clone()]).unwrap();
        let rho = random_density_matrix(&mut rng(1), 2);
        let expect = u.dot(rho.matrix()).dot(&dagger(&u));
        assert!(max_abs_diff(&map.apply(&rho).unwrap(), &expect) < 1e-14);
    }

    #[test]
    fn amplitude_damping_pair() {
        let p: f64 = 0.25;
        let k0 = diag_real(&[1.0, (1.0 - p).sqrt()]);
        let k1 = ket_bra(2, 0, 1) * r(p.sqrt());
        let map = KrausMap::new(vec![k0, k1]).unwrap();
        let out = map.apply(&DensityMatrix::basis(2, 1)).unwrap();
        assert!(max_abs_diff(&out, &diag_real(&[0.25, 0.75])) < 1e-15);
        assert!(max_abs_diff(&map.dual(&identity(2)).unwrap(), &identity(2)) < 1e-15);
    }

    #[test]
    fn incomplete_set_is_rejected() {
        let err = KrausMap::new(vec![diag_real(&[1.0, 0.9])]).unwrap_err();
        assert!(matches!(err, Error::KrausCompleteness { .. }));
        assert!(KrausMap::new(vec![identity(2), zeros(3)]).is_err());
        assert!(KrausMap::new(vec![]).is_err());
    }

    #[test]
    fn duality_relation() {
        let mut g = rng(4);
        let map = KrausMap::new(vec![diag_real(&[1.0, 0.6]), ket_bra(2, 0, 1) * r(0.8)]).unwrap();
        for _ in 0..5 {
            let rho = random_density_matrix(&mut g, 2);
            let x = crate::random::random_complex_matrix(&mut g, 2, 1.0);
            let lhs = crate::ops::trace(&dagger(&x).dot(&map.apply_matrix(&rho).unwrap()));
            let rhs = crate::ops::trace(&dagger(&map.dual(&x).unwrap()).dot(rho.matrix()));
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn first_order_map_converges_linearly() {
        let mut g = rng(5);
        let m = random_lindblad(&mut g, 3, 2);
        let rho = random_density_matrix(&mut g, 3);
        let t = 1.0;
        let exact = propagate(&m, &rho, t, Method::ExactExp).unwrap();
        let mut errors = Vec::new();
        for steps in [200, 400, 800] {
            let map = KrausMap::first_order(&m, t / steps as f64).unwrap();
            let approx = map.apply_n(&rho, steps).unwrap();
            errors.push(trace_distance(&approx, &exact).unwrap());
        }
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
        }
    }

    #[test]
    fn first_order_map_shape() {
        let m = LindbladModel::new(Hermitian::zeros(2), vec![sigma_minus()]).unwrap();
        let map = KrausMap::first_order(&m, 0.01).unwrap();
        assert_eq!(map.generators().len(), 2);
        assert!(map.completeness_defect() < 1e-3);
        assert!(KrausMap::first_order(&m, 0.0).is_err());
    }
}
