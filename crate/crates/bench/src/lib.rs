//! Benchmark fixtures shared by the criterion benches.

use opensys_core::fermigauss::{boundary_driven_chain, LyapunovModel};
use opensys_core::random::{random_lindblad, rng};
use opensys_core::LindbladModel;

/// Seeded random Lindblad model of dimension `n` with two jump operators.
pub fn random_model(n: usize) -> LindbladModel {
    random_lindblad(&mut rng(n as u64), n, 2)
}

/// Boundary-driven chain of `l` sites with a density bias.
pub fn driven_chain(l: usize) -> LyapunovModel {
    boundary_driven_chain(l, 1.0, 1.0, 1.0, 0.0).expect("valid chain")
}
