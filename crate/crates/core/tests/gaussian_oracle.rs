use opensys_core::fermigauss::{
    boundary_driven_chain, correlations_from_state, evolve_correlations_series, fock_density, many_body_lindblad,
    CorrelationMatrix,
};
use opensys_core::liouvillian::{propagate_series, Method};
use opensys_core::ops::max_abs_diff;

fn compare(l: usize, occupied: &[bool]) -> f64 {
    let m = boundary_driven_chain(l, 1.0, 0.8, 0.9, 0.2).unwrap();
    let lind = many_body_lindblad(&m).unwrap();
    let times: Vec<f64> = (1..=10).map(|k| 0.35 * k as f64).collect();
    let exact = propagate_series(&lind, &fock_density(occupied), &times, Method::ExactExp).unwrap();
    let gauss = evolve_correlations_series(&m, &CorrelationMatrix::fock(occupied), &times).unwrap();
    let mut worst: f64 = 0.0;
    for (rho, c) in exact.iter().zip(&gauss) {
        let c_exact = correlations_from_state(rho, l).unwrap();
        worst = worst.max(max_abs_diff(&c_exact, c));
        let (lo, hi) = c.spectrum_bounds().unwrap();
        assert!(lo >= -1e-10 && hi <= 1.0 + 1e-10);
    }
    worst
}

#[test]
fn two_site_chain_matches_many_body() {
    assert!(compare(2, &[false, true]) <= 1e-7);
}

#[test]
fn three_site_chain_matches_many_body() {
    assert!(compare(3, &[true, false, true]) <= 1e-7);
    assert!(compare(3, &[false, false, false]) <= 1e-7);
}
