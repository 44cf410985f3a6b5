//! One function per experiment kind, each returning tables plus a JSON summary.

use ndarray::Array2;
use opensys_core::collision::{continuum_limit_check, exchange_qubit};
use opensys_core::fermigauss::{
    ballistic_scaling_experiment, bond_currents, boundary_driven_chain, lyapunov_steady, rainbow_experiment,
    AncillaState, RainbowConfig, RainbowMode,
};
use opensys_core::lattloss::{
    build_loss_lindblad, decay_exponent_fit, first_fourier_mode, mean_density, momentum_occupation, occupation_state,
    Boundary, LossModel,
};
use opensys_core::liouvillian::{
    commutant_uniqueness_test, liouvillian_spectrum, propagate_series, steady_state, Method,
};
use opensys_core::ops::{dagger, diag_real, hermitian_part, sigma_x, Hermitian};
use opensys_core::random::{random_hermitian, random_lindblad, rng};
use opensys_core::spinchain::{xxz_ness, XxzConfig};
use opensys_core::weakcoupling::{
    bohr_decompose, build_secular_lindblad, default_freq_tol, evolve_pauli, extract_pauli_model, BathFamily,
    BathSpectralFunction, CouplingSet,
};
use opensys_core::{DensityMatrix, LindbladModel};
use serde_json::json;

use crate::config::{
    AncillaKind, BoundaryKind, CollisionModel, ExperimentConfig, LossInitial, LossModelConfig, Model, PauliModel,
    QubitInitial, RainbowModel, RainbowSolve, RelaxModel, SpectrumModel, TransportModel, XxzModel,
};
use crate::output::{Artifacts, Table};
use crate::RunError;

/// Eigenvalues with modulus at or below this count as zero in spectrum summaries.
pub const SPECTRAL_ZERO_TOL: f64 = 1e-9;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    match &cfg.model {
        Model::Relax(m) => relax(m, cfg),
        Model::Spectrum(m) => spectrum(m, cfg),
        Model::Pauli(m) => pauli(m, cfg),
        Model::CollisionConverge(m) => collision(m),
        Model::Transport(m) => transport(m, cfg),
        Model::Rainbow(m) => rainbow(m, cfg),
        Model::Loss(m) => loss(m),
        Model::XxzNess(m) => xxz(m, cfg),
    }
}

fn linspace(t_final: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| t_final * k as f64 / (points - 1) as f64).collect()
}

/// Secular Lindblad model of a qubit `diag(0, omega0)` coupled through `sigma_x`
/// to a thermal bath with emission rate `gamma_down`.
pub fn thermal_qubit(omega0: f64, beta: f64, gamma_down: f64) -> Result<LindbladModel, RunError> {
    let h = Hermitian::new(diag_real(&[0.0, omega0]))?;
    let x = CouplingSet::unlabeled(vec![Hermitian::new(sigma_x())?])?;
    let spec = bohr_decompose(&h, &x, default_freq_tol(&h)?)?;
    let bath = BathSpectralFunction::from_family(&BathFamily::Thermal { kappa: gamma_down, beta }, &spec)?;
    Ok(build_secular_lindblad(&spec, &bath)?)
}

fn relax(m: &RelaxModel, cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let model = thermal_qubit(m.omega0, m.beta, m.gamma_down)?;
    let rho0 = match m.initial {
        QubitInitial::Excited => DensityMatrix::basis(2, 1),
        QubitInitial::Ground => DensityMatrix::basis(2, 0),
        QubitInitial::Mixed => DensityMatrix::maximally_mixed(2),
    };
    let t_final = m.t_final.unwrap_or(50.0 / m.gamma_down);
    let times = linspace(t_final, m.points);
    let states = propagate_series(&model, &rho0, &times, Method::ExactExp)?;
    let mut table = Table::new(&["t", "p0", "p1", "coherence_abs"]);
    for (t, rho) in times.iter().zip(&states) {
        let p = rho.populations();
        table.push(vec![(*t).into(), p[0].into(), p[1].into(), rho.matrix()[(0, 1)].norm().into()]);
    }
    let last = states.last().expect("at least two points").populations();
    let expected = (-m.beta * m.omega0).exp();
    let ratio = last[1] / last[0];
    let deviation = (ratio - expected).abs();
    Ok(Artifacts {
        main: table,
        extra: vec![],
        summary: json!({
            "t_final": t_final,
            "boltzmann_ratio": expected,
            "final_ratio": ratio,
            "ratio_deviation": deviation,
            "within_tolerance": deviation <= cfg.tolerances.boltzmann,
        }),
    })
}

fn spectrum(m: &SpectrumModel, cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let model = random_lindblad(&mut rng(cfg.seed), m.dim, m.jumps);
    let mut eigs = liouvillian_spectrum(&model)?;
    eigs.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let mut table = Table::new(&["index", "re", "im"]);
    for (k, z) in eigs.iter().enumerate() {
        table.push(vec![k.into(), z.re.into(), z.im.into()]);
    }
    let zeros = eigs.iter().filter(|z| z.norm() <= SPECTRAL_ZERO_TOL).count();
    let steady = steady_state(&model)?;
    let commutant = commutant_uniqueness_test(&model, SPECTRAL_ZERO_TOL)?;
    Ok(Artifacts {
        main: table,
        extra: vec![],
        summary: json!({
            "zero_eigenvalues": zeros,
            "unique": steady.unique,
            "gap": steady.gap,
            "commutant_irreducible": commutant.is_irreducible(),
            "steady_residual": steady.residual,
        }),
    })
}

fn pauli(m: &PauliModel, cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let mut g = rng(cfg.seed);
    let n = m.dim;
    let h = Hermitian::new(hermitian_part(&random_hermitian(&mut g, n, 1.0)))?;
    let x = Hermitian::new(hermitian_part(&random_hermitian(&mut g, n, 1.0)))?;
    let spec = bohr_decompose(&h, &CouplingSet::unlabeled(vec![x])?, default_freq_tol(&h)?)?;
    let bath = BathSpectralFunction::from_family(&BathFamily::Thermal { kappa: m.kappa, beta: m.beta }, &spec)?;
    let lind = build_secular_lindblad(&spec, &bath)?;
    let rates = extract_pauli_model(&spec, &bath, &h)?;

    let v = spec.eigenvectors();
    let p0: Vec<f64> = (0..n).map(|k| if k == n - 1 { 1.0 } else { 0.0 }).collect();
    let d = Array2::from_diag(&ndarray::Array1::from_iter(p0.iter().map(|&p| opensys_core::ops::r(p))));
    let rho0 = DensityMatrix::new(v.dot(&d).dot(&dagger(v)))?;
    let times = linspace(m.t_final, m.points);
    let states = propagate_series(&lind, &rho0, &times, Method::ExactExp)?;
    let mut table = Table::new(&["t", "level", "pauli", "lindblad"]);
    let mut worst = 0.0_f64;
    for (t, rho) in times.iter().zip(&states) {
        let p = evolve_pauli(&rates, &p0, *t)?;
        let in_basis = dagger(v).dot(rho.matrix()).dot(v);
        for k in 0..n {
            let pl = in_basis[(k, k)].re;
            worst = worst.max((pl - p[k]).abs());
            table.push(vec![(*t).into(), k.into(), p[k].into(), pl.into()]);
        }
    }
    Ok(Artifacts {
        main: table,
        extra: vec![],
        summary: json!({
            "energies": rates.energies,
            "max_deviation": worst,
            "column_sum_defect": rates.column_sum_defect(),
        }),
    })
}

fn collision(m: &CollisionModel) -> Result<Artifacts, RunError> {
    let (base, reference) = exchange_qubit(m.g, m.tau_ref, m.omega)?;
    let unitary = LindbladModel::unitary(base.system_hamiltonian().clone());
    let rho0 = DensityMatrix::basis(2, 1);
    let to_lindblad = continuum_limit_check(&base, &reference, &rho0, &m.taus, m.t_final, m.rescale)?;
    let to_unitary = continuum_limit_check(&base, &unitary, &rho0, &m.taus, m.t_final, m.rescale)?;
    let mut table = Table::new(&["tau", "collisions", "trace_distance", "unitary_distance"]);
    for (a, b) in to_lindblad.points.iter().zip(&to_unitary.points) {
        table.push(vec![a.tau.into(), a.collisions.into(), a.trace_distance.into(), b.trace_distance.into()]);
    }
    Ok(Artifacts {
        main: table,
        extra: vec![],
        summary: json!({
            "rescaled": m.rescale,
            "reference_rate": m.g * m.g * m.tau_ref,
            "fitted_order": to_lindblad.fitted_order,
            "unitary_fitted_order": to_unitary.fitted_order,
        }),
    })
}

fn transport(m: &TransportModel, cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let model = boundary_driven_chain(m.sites, m.j, m.g, m.n_left, m.n_right)?;
    let steady = lyapunov_steady(&model)?;
    let currents = bond_currents(&steady.correlation, m.j)?;
    let mut bonds = Table::new(&["bond", "current"]);
    for (k, jk) in currents.iter().enumerate() {
        bonds.push(vec![(k + 1).into(), (*jk).into()]);
    }
    let mut occupations = Table::new(&["site", "occupation"]);
    for (k, n) in steady.correlation.occupations().iter().enumerate() {
        occupations.push(vec![(k + 1).into(), (*n).into()]);
    }
    let mut extra = vec![("occupation".to_string(), occupations)];
    let hi = currents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = currents.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_abs = currents.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let mut summary = json!({
        "unique": steady.unique,
        "null_dim": steady.null_dim,
        "residual": steady.residual,
        "current": currents[0],
        "bond_spread": hi - lo,
        "max_abs_current": max_abs,
        "all_zero": max_abs <= cfg.tolerances.zero,
    });
    if !m.lengths.is_empty() {
        let rep = ballistic_scaling_experiment(m.g, m.j, m.n_left, m.n_right, &m.lengths)?;
        let mut sweep = Table::new(&["length", "current", "bond_spread"]);
        for p in &rep.points {
            sweep.push(vec![p.length.into(), p.current.into(), p.bond_spread.into()]);
        }
        extra.push(("lengths".to_string(), sweep));
        summary["length_spread"] = json!(rep.spread);
    }
    Ok(Artifacts { main: bonds, extra, summary })
}

fn rainbow(m: &RainbowModel, cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let rc = RainbowConfig {
        length: m.sites,
        j: m.j,
        g: m.g,
        bell_phase: m.bell_phase,
        ancilla: match m.ancilla {
            AncillaKind::Bell => AncillaState::Bell { phase: m.bell_phase },
            AncillaKind::Product => AncillaState::Product,
        },
        mode: match m.solve {
            RainbowSolve::Continuum => RainbowMode::Continuum,
            RainbowSolve::Collisions => RainbowMode::Collisions {
                tau: m.tau,
                max_collisions: m.max_collisions,
                tol: cfg.tolerances.convergence,
            },
        },
        threshold: cfg.tolerances.fidelity,
    };
    let rep = rainbow_experiment(&rc)?;
    let mut table = Table::new(&["pair", "p10", "p01", "p11", "coherence_re", "coherence_im", "fidelity"]);
    for p in &rep.pairs {
        table.push(vec![
            p.site.into(),
            p.p10.into(),
            p.p01.into(),
            p.p11.into(),
            p.coherence.re.into(),
            p.coherence.im.into(),
            p.fidelity.into(),
        ]);
    }
    Ok(Artifacts {
        main: table,
        extra: vec![],
        summary: json!({
            "min_fidelity": rep.min_fidelity,
            "all_above_threshold": rep.all_above_threshold,
            "max_cross_correlation": rep.max_cross_correlation,
            "collisions": rep.collisions,
        }),
    })
}

pub fn loss_model(m: &LossModelConfig) -> Result<LossModel, RunError> {
    let boundary = match m.boundary {
        BoundaryKind::Open => Boundary::Open,
        BoundaryKind::Periodic => Boundary::Periodic,
    };
    let model = LossModel::new(m.sites, m.j, m.k, m.gamma, boundary)?;
    Ok(if m.trap != 0.0 { model.with_trap(m.trap) } else { model })
}

fn loss(m: &LossModelConfig) -> Result<Artifacts, RunError> {
    let model = loss_model(m)?;
    let lind = build_loss_lindblad(&model)?;
    let occupied: Vec<bool> = (0..m.sites)
        .map(|i| match m.initial {
            LossInitial::Full => true,
            LossInitial::Alternating => i % 2 == 0,
        })
        .collect();
    let rho0 = occupation_state(&occupied);
    let times = linspace(m.t_max, m.points);
    let states = propagate_series(&lind, &rho0, &times, Method::ExactExp)?;
    let mut density = Table::new(&["t", "density"]);
    let mut momentum = Table::new(&["t", "k", "nk"]);
    let mut series = Vec::with_capacity(times.len());
    for (t, rho) in times.iter().zip(&states) {
        let n = mean_density(rho, m.sites)?;
        density.push(vec![(*t).into(), n.into()]);
        series.push((*t, n));
        for (k, nk) in momentum_occupation(rho, m.sites)? {
            momentum.push(vec![(*t).into(), k.into(), nk.into()]);
        }
    }
    let mode = first_fourier_mode(&momentum_occupation(&rho0, m.sites)?);
    let decreasing = series.windows(2).all(|w| w[1].1 < w[0].1);
    let mut summary = json!({
        "initial_density": series[0].1,
        "final_density": series[series.len() - 1].1,
        "strictly_decreasing": decreasing,
        "initial_first_fourier_mode": { "re": mode.re, "im": mode.im, "abs": mode.norm() },
    });
    if m.k == 1 {
        let dev = series.iter().map(|&(t, n)| (n - series[0].1 * (-m.gamma * t).exp()).abs()).fold(0.0, f64::max);
        summary["exponential_deviation"] = json!(dev);
    }
    if let Some([a, b]) = m.fit_window {
        let fit = decay_exponent_fit(&series, (a, b))?;
        summary["fit"] = json!({
            "alpha": fit.alpha,
            "stderr": fit.stderr,
            "points": fit.points,
            "loglog_curvature": fit.loglog_curvature,
            "semilog_curvature": fit.semilog_curvature,
            "non_power_law": fit.non_power_law,
            "non_exponential": fit.non_exponential,
        });
    }
    Ok(Artifacts { main: density, extra: vec![("momentum".to_string(), momentum)], summary })
}

pub fn xxz_config(m: &XxzModel) -> XxzConfig {
    XxzConfig {
        sites: m.sites,
        j: m.j,
        delta: m.delta,
        left_target: m.left_target,
        right_target: m.right_target,
        gamma_left: m.gamma_left,
        gamma_right: m.gamma_right,
    }
}

fn xxz(m: &XxzModel, cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let rep = xxz_ness(&xxz_config(m))?;
    let mut table = Table::new(&["bond", "jx", "jy", "jz"]);
    for k in 0..m.sites - 1 {
        table.push(vec![
            (k + 1).into(),
            rep.currents[0][k].into(),
            rep.currents[1][k].into(),
            rep.currents[2][k].into(),
        ]);
    }
    let mut mag = Table::new(&["site", "sx", "sy", "sz"]);
    for (s, v) in rep.magnetization.iter().enumerate() {
        mag.push(vec![(s + 1).into(), v[0].into(), v[1].into(), v[2].into()]);
    }
    let min_abs = rep.currents.clone().map(|c| c.iter().fold(f64::INFINITY, |a, x| a.min(x.abs())));
    Ok(Artifacts {
        main: table,
        extra: vec![("magnetization".to_string(), mag)],
        summary: json!({
            "flatness": { "x": rep.flatness[0], "y": rep.flatness[1], "z": rep.flatness[2] },
            "min_abs_current": { "x": min_abs[0], "y": min_abs[1], "z": min_abs[2] },
            "all_zero": rep.currents.iter().flatten().all(|v| v.abs() <= cfg.tolerances.zero),
            "steady_residual": rep.steady.residual,
            "gap": rep.steady.gap,
        }),
    })
}
