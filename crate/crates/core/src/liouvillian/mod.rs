//! GKSL generator in diagonal form.
//!
//! ```text
//! L(rho) = -i [H, rho] + sum_j ( L_j rho L_j^dagger - 1/2 {L_j^dagger L_j, rho} )
//! ```

mod commutant;
mod kraus;
mod propagate;
mod steady;
mod superop;
mod trajectory;

pub use commutant::{commutant_uniqueness_test, Commutant};
pub use kraus::KrausMap;
pub use propagate::{propagate, propagate_series, Method, RkOptions};
pub use steady::{liouvillian_spectrum, steady_state, steady_state_with, SteadyOptions, SteadyState};
pub use superop::{build_superoperator, build_superoperator_with_limit, Superoperator, MAX_SUPEROP_SYSTEM_DIM};
pub use trajectory::{run_trajectories, JumpStats, TrajectoryEnsembleResult, TrajectoryOptions};

use crate::error::{Error, Result};
use crate::ops::{dagger, ensure_finite, identity, norm1, r, CMatrix, DensityMatrix, Hermitian, C64};

/// Hamiltonian plus jump operators.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: Hermitian,
    jumps: Vec<CMatrix>,
    /// `sum_j L_j^dagger L_j`
    decay: CMatrix,
}

impl LindbladModel {
    pub fn new(hamiltonian: Hermitian, jumps: Vec<CMatrix>) -> Result<Self> {
        let n = hamiltonian.dim();
        for (k, l) in jumps.iter().enumerate() {
            if l.dim() != (n, n) {
                return Err(Error::Dimension(format!("jump {k} has shape {:?}, Hamiltonian is {n}x{n}", l.dim())));
            }
            ensure_finite(l, "jump operator")?;
        }
        let mut decay = crate::ops::zeros(n);
        for l in &jumps {
            decay = decay + dagger(l).dot(l);
        }
        Ok(Self { hamiltonian, jumps, decay })
    }

    /// Closed system.
    pub fn unitary(hamiltonian: Hermitian) -> Self {
        let n = hamiltonian.dim();
        Self { hamiltonian, jumps: Vec::new(), decay: crate::ops::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Hermitian {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[CMatrix] {
        &self.jumps
    }

    /// `sum_j L_j^dagger L_j`.
    pub fn decay_operator(&self) -> &CMatrix {
        &self.decay
    }

    fn check_dim(&self, m: &CMatrix, what: &str) -> Result<()> {
        let n = self.dim();
        if m.dim() != (n, n) {
            return Err(Error::Dimension(format!("{what} has shape {:?}, model is {n}x{n}", m.dim())));
        }
        Ok(())
    }

    /// `L(rho)`.
    pub fn apply_generator(&self, rho: &DensityMatrix) -> Result<CMatrix> {
        self.check_dim(rho, "state")?;
        Ok(self.apply(rho))
    }

    /// Generator applied to an arbitrary operator, no dimension check.
    pub(crate) fn apply(&self, x: &CMatrix) -> CMatrix {
        let heff = self.effective_hamiltonian();
        let hx = heff.dot(x);
        // -i (Heff x - x Heff^dagger) = -i Heff x + (-i Heff x^dagger)^dagger
        let mut out = &hx * C64::new(0.0, -1.0);
        let xh = x.dot(&dagger(&heff));
        out = out + &xh * C64::new(0.0, 1.0);
        for l in &self.jumps {
            out = out + l.dot(x).dot(&dagger(l));
        }
        out
    }

    /// Heisenberg-picture generator
    /// `L*(X) = i [H, X] + sum_j (L_j^dagger X L_j - 1/2 {L_j^dagger L_j, X})`.
    pub fn dual_generator(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check_dim(x, "observable")?;
        let h = self.hamiltonian.matrix();
        let mut out = (h.dot(x) - x.dot(h)) * C64::new(0.0, 1.0);
        out = out - (self.decay.dot(x) + x.dot(&self.decay)) * r(0.5);
        for l in &self.jumps {
            out = out + dagger(l).dot(x).dot(l);
        }
        Ok(out)
    }

    /// `H_eff = H - (i/2) sum_j L_j^dagger L_j`.
    pub fn effective_hamiltonian(&self) -> CMatrix {
        self.hamiltonian.matrix() - &(&self.decay * C64::new(0.0, 0.5))
    }

    /// Gauge transformation `L_j -> L_j + a_j`,
    /// `H -> H + (1/2i) sum_j (a_j^* L_j - a_j L_j^dagger) + b`, which leaves the
    /// generator unchanged.
    pub fn gauge_transform(&self, a: &[C64], b: f64) -> Result<Self> {
        if a.len() != self.jumps.len() {
            return Err(Error::InvalidArgument(format!(
                "{} gauge shifts for {} jump operators",
                a.len(),
                self.jumps.len()
            )));
        }
        let n = self.dim();
        let eye = identity(n);
        let mut shift = &eye * r(b);
        let mut jumps = Vec::with_capacity(self.jumps.len());
        for (l, &aj) in self.jumps.iter().zip(a) {
            let term = (l * aj.conj() - dagger(l) * aj) * C64::new(0.0, -0.5);
            shift = shift + term;
            jumps.push(l + &(&eye * aj));
        }
        let h = Hermitian::from_hermitian_part(&(self.hamiltonian.matrix() + &shift));
        Self::new(h, jumps)
    }

    /// Upper bound on the induced 1-norm of the generator acting on operators.
    pub fn norm_estimate(&self) -> f64 {
        let h = norm1(self.hamiltonian.matrix());
        let d: f64 = self.jumps.iter().map(|l| norm1(l) * norm1(&dagger(l))).sum();
        2.0 * h + 2.0 * d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{c, diag_real, eig, ket_bra, max_abs, max_abs_diff, sigma_minus, sigma_z, trace, zeros};
    use crate::random::{random_complex_matrix, random_density_matrix, random_lindblad, rng};
    use ndarray::array;

    fn amplitude_damping(gamma: f64, omega: f64) -> LindbladModel {
        let h = Hermitian::new(sigma_z() * r(omega / 2.0)).unwrap();
        LindbladModel::new(h, vec![sigma_minus() * r(gamma.sqrt())]).unwrap()
    }

    #[test]
    fn zero_generator() {
        let m = LindbladModel::unitary(Hermitian::zeros(3));
        let rho = DensityMatrix::maximally_mixed(3);
        assert_eq!(max_abs(&m.apply_generator(&rho).unwrap()), 0.0);
    }

    #[test]
    fn amplitude_damping_on_excited_state() {
        let m = amplitude_damping(1.0, 0.0);
        let out = m.apply_generator(&DensityMatrix::basis(2, 1)).unwrap();
        assert!(max_abs_diff(&out, &diag_real(&[1.0, -1.0])) < 1e-15);
    }

    #[test]
    fn dephasing_halves_coherence_at_rate_two_kappa() {
        let kappa = 0.3;
        let m = LindbladModel::new(Hermitian::zeros(2), vec![sigma_z() * r(f64::sqrt(kappa))]).unwrap();
        let coh = c(0.2, 0.1);
        let rho = DensityMatrix::new(array![[r(0.6), coh], [coh.conj(), r(0.4)]]).unwrap();
        let out = m.apply_generator(&rho).unwrap();
        assert!((out[(0, 1)] - coh * (-2.0 * kappa)).norm() < 1e-15);
        assert!(out[(0, 0)].norm() < 1e-15 && out[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let m = amplitude_damping(1.0, 1.0);
        assert!(m.apply_generator(&DensityMatrix::maximally_mixed(3)).is_err());
        assert!(LindbladModel::new(Hermitian::zeros(2), vec![zeros(3)]).is_err());
    }

    #[test]
    fn generator_output_is_traceless_and_hermitian() {
        let mut g = rng(5);
        for n in 2..6 {
            let m = random_lindblad(&mut g, n, 2);
            let rho = random_density_matrix(&mut g, n);
            let out = m.apply_generator(&rho).unwrap();
            assert!(trace(&out).norm() < 1e-10);
            assert!(crate::ops::hermiticity_defect(&out) < 1e-10);
        }
    }

    #[test]
    fn dual_identity_and_duality() {
        let mut g = rng(6);
        for n in 2..5 {
            let m = random_lindblad(&mut g, n, 3);
            assert!(max_abs(&m.dual_generator(&identity(n)).unwrap()) < 1e-12);
            for _ in 0..5 {
                let x = random_complex_matrix(&mut g, n, 1.0);
                let rho = random_density_matrix(&mut g, n);
                let lhs = trace(&dagger(&x).dot(&m.apply_generator(&rho).unwrap()));
                let rhs = trace(&dagger(&m.dual_generator(&x).unwrap()).dot(rho.matrix()));
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn dual_of_sigma_z_under_amplitude_damping() {
        // L*(sigma_z) = gamma (sigma_+ sigma_z sigma_- - {n, sigma_z}/2) = -2 gamma |1><1| + ... evaluated directly
        let gamma = 0.7;
        let m = amplitude_damping(gamma, 1.3);
        let out = m.dual_generator(&sigma_z()).unwrap();
        // sigma_+ sigma_z sigma_- = |1><1| * (+1); {n, sigma_z}/2 = -|1><1|
        assert!(max_abs_diff(&out, &(ket_bra(2, 1, 1) * r(2.0 * gamma))) < 1e-15);
    }

    #[test]
    fn dual_closed_system_is_heisenberg() {
        let mut g = rng(7);
        let h = Hermitian::from_hermitian_part(&crate::random::random_hermitian(&mut g, 3, 1.0));
        let m = LindbladModel::unitary(h.clone());
        let x = random_complex_matrix(&mut g, 3, 1.0);
        let expect = (h.dot(&x) - x.dot(h.matrix())) * C64::new(0.0, 1.0);
        assert!(max_abs_diff(&m.dual_generator(&x).unwrap(), &expect) < 1e-14);
    }

    #[test]
    fn effective_hamiltonian_amplitude_damping() {
        let (gamma, omega) = (0.4, 1.1);
        let heff = amplitude_damping(gamma, omega).effective_hamiltonian();
        // H = (omega/2) sigma_z = diag(+omega/2, -omega/2)
        assert!((heff[(0, 0)] - r(omega / 2.0)).norm() < 1e-15);
        assert!((heff[(1, 1)] - c(-omega / 2.0, -gamma / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn effective_spectrum_in_lower_half_plane() {
        let mut g = rng(8);
        for k in 0..20 {
            let m = random_lindblad(&mut g, 2 + k % 4, 1 + k % 3);
            let ev = eig(&m.effective_hamiltonian()).unwrap();
            assert!(ev.values.iter().all(|z| z.im <= 1e-10));
        }
        let closed = LindbladModel::unitary(Hermitian::new(sigma_z()).unwrap());
        let ev = eig(&closed.effective_hamiltonian()).unwrap();
        assert!(ev.values.iter().all(|z| z.im.abs() < 1e-15));
    }

    #[test]
    fn gauge_identity_and_hermitian_cancellation() {
        let m = amplitude_damping(1.0, 1.0);
        let same = m.gauge_transform(&[C64::new(0.0, 0.0)], 0.0).unwrap();
        assert_eq!(same.hamiltonian(), m.hamiltonian());
        assert_eq!(same.jumps(), m.jumps());

        let herm = LindbladModel::new(Hermitian::zeros(2), vec![sigma_z()]).unwrap();
        let shifted = herm.gauge_transform(&[r(0.4)], 0.25).unwrap();
        assert!(max_abs_diff(shifted.hamiltonian(), &(identity(2) * r(0.25))) < 1e-15);
        assert!(m.gauge_transform(&[], 0.0).is_err());
    }
}
