use opensys_core::liouvillian::{propagate, Method};
use opensys_core::ops::{dagger, hermitian_part, r, DensityMatrix, Hermitian};
use opensys_core::random::{random_hermitian, rng};
use opensys_core::weakcoupling::{
    bohr_decompose, build_secular_lindblad, evolve_pauli, extract_pauli_model, BathFamily, BathSpectralFunction,
    CouplingSet,
};

#[test]
fn diagonal_lindblad_evolution_equals_rate_equation() {
    for (seed, n) in [(1u64, 2usize), (2, 3), (3, 4)] {
        let mut g = rng(seed);
        let h = Hermitian::new(hermitian_part(&random_hermitian(&mut g, n, 1.0))).unwrap();
        let x = Hermitian::new(hermitian_part(&random_hermitian(&mut g, n, 1.0))).unwrap();
        let spec = bohr_decompose(&h, &CouplingSet::unlabeled(vec![x]).unwrap(), 1e-8).unwrap();
        let bath = BathSpectralFunction::from_family(&BathFamily::Thermal { kappa: 0.3, beta: 1.2 }, &spec).unwrap();
        let lind = build_secular_lindblad(&spec, &bath).unwrap();
        let pauli = extract_pauli_model(&spec, &bath, &h).unwrap();

        let v = spec.eigenvectors();
        let p0: Vec<f64> = (0..n).map(|k| if k == n - 1 { 1.0 } else { 0.0 }).collect();
        let d = ndarray::Array2::from_diag(&ndarray::Array1::from_iter(p0.iter().map(|&p| r(p))));
        let rho0 = DensityMatrix::new(v.dot(&d).dot(&dagger(v))).unwrap();
        for t in [0.5, 2.0, 7.0] {
            let rho = propagate(&lind, &rho0, t, Method::ExactExp).unwrap();
            let in_eigenbasis = dagger(v).dot(rho.matrix()).dot(v);
            let p = evolve_pauli(&pauli, &p0, t).unwrap();
            for k in 0..n {
                assert!((in_eigenbasis[(k, k)].re - p[k]).abs() <= 1e-8, "seed {seed} t {t}");
            }
        }
    }
}
