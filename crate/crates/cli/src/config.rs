//! Experiment configuration files (TOML).
//!
//! A config names one experiment, an output prefix, a seed, optional tolerance
//! overrides and a `[model]` table whose keys depend on the experiment. Unknown
//! keys are rejected at every level.

use std::path::Path;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Relax,
    Spectrum,
    Pauli,
    CollisionConverge,
    Transport,
    Rainbow,
    Loss,
    XxzNess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed deviation of the final relaxed populations from the Boltzmann ratio.
    #[serde(default = "d_boltzmann")]
    pub boltzmann: f64,
    /// Magnitude below which a current counts as zero.
    #[serde(default = "d_zero")]
    pub zero: f64,
    /// Pair fidelity threshold for the rainbow experiment.
    #[serde(default = "d_fidelity")]
    pub fidelity: f64,
    /// Per-unit-time change that ends collision iteration.
    #[serde(default = "d_convergence")]
    pub convergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { boltzmann: d_boltzmann(), zero: d_zero(), fidelity: d_fidelity(), convergence: d_convergence() }
    }
}

fn d_boltzmann() -> f64 {
    1e-6
}
fn d_zero() -> f64 {
    1e-9
}
fn d_fidelity() -> f64 {
    0.99
}
fn d_convergence() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum QubitInitial {
    Excited,
    Ground,
    Mixed,
}

/// Two-level system `H = diag(0, omega0)` coupled through `sigma_x` to a thermal bath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RelaxModel {
    #[serde(default = "one")]
    pub omega0: f64,
    #[serde(default = "one")]
    pub beta: f64,
    /// Emission rate.
    #[serde(default = "one")]
    pub gamma_down: f64,
    /// Defaults to `50 / gamma_down`.
    #[serde(default)]
    pub t_final: Option<f64>,
    #[serde(default = "d_points")]
    pub points: usize,
    #[serde(default = "d_excited")]
    pub initial: QubitInitial,
}

/// Random Lindblad model drawn from the config seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SpectrumModel {
    #[serde(default = "three")]
    pub dim: usize,
    #[serde(default = "two")]
    pub jumps: usize,
}

/// Random non-degenerate Hamiltonian and coupling with a thermal bath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PauliModel {
    #[serde(default = "three")]
    pub dim: usize,
    #[serde(default = "d_kappa")]
    pub kappa: f64,
    #[serde(default = "d_beta")]
    pub beta: f64,
    #[serde(default = "d_pauli_t")]
    pub t_final: f64,
    #[serde(default = "d_short_points")]
    pub points: usize,
}

/// Exchange-coupled qubit collisions against their Lindblad limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CollisionModel {
    #[serde(default = "d_g_collision")]
    pub g: f64,
    #[serde(default = "one")]
    pub omega: f64,
    /// Collision time at which the reference rate `g^2 tau_ref` is defined.
    #[serde(default = "d_tau_ref")]
    pub tau_ref: f64,
    #[serde(default = "one")]
    pub t_final: f64,
    #[serde(default = "d_taus")]
    pub taus: Vec<f64>,
    /// Scale the interaction as `1/sqrt(tau)`.
    #[serde(default = "yes")]
    pub rescale: bool,
}

/// Boundary-driven tight-binding chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TransportModel {
    #[serde(default = "d_sites8")]
    pub sites: usize,
    #[serde(default = "one")]
    pub j: f64,
    #[serde(default = "one")]
    pub g: f64,
    #[serde(default = "one")]
    pub n_left: f64,
    #[serde(default)]
    pub n_right: f64,
    /// Extra chain lengths for a current-versus-length sweep.
    #[serde(default)]
    pub lengths: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum AncillaKind {
    Bell,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum RainbowSolve {
    Continuum,
    Collisions,
}

/// Two chains fed by a pair of ancilla modes at site 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RainbowModel {
    #[serde(default = "d_sites4")]
    pub sites: usize,
    #[serde(default = "one")]
    pub j: f64,
    #[serde(default = "one")]
    pub g: f64,
    #[serde(default)]
    pub bell_phase: f64,
    #[serde(default = "d_bell")]
    pub ancilla: AncillaKind,
    #[serde(default = "d_continuum")]
    pub solve: RainbowSolve,
    #[serde(default = "d_tau_rainbow")]
    pub tau: f64,
    #[serde(default = "d_max_collisions")]
    pub max_collisions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum LossInitial {
    Full,
    Alternating,
}

/// Hard-core bosons with K-body losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct LossModelConfig {
    #[serde(default = "d_sites6")]
    pub sites: usize,
    #[serde(default = "one")]
    pub j: f64,
    #[serde(default = "two")]
    pub k: usize,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "d_open")]
    pub boundary: BoundaryKind,
    /// Trap curvature `v`.
    #[serde(default)]
    pub trap: f64,
    #[serde(default = "d_full")]
    pub initial: LossInitial,
    #[serde(default = "d_loss_t")]
    pub t_max: f64,
    #[serde(default = "d_short_points")]
    pub points: usize,
    /// `[t_min, t_max]` for the decay-exponent fit.
    #[serde(default)]
    pub fit_window: Option<[f64; 2]>,
}

/// XXZ chain with polarizing boundary channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct XxzModel {
    #[serde(default = "d_sites4")]
    pub sites: usize,
    #[serde(default = "one")]
    pub j: f64,
    #[serde(default = "d_delta")]
    pub delta: f64,
    #[serde(default = "d_plus_z")]
    pub left_target: [f64; 3],
    #[serde(default = "d_plus_x")]
    pub right_target: [f64; 3],
    #[serde(default = "one")]
    pub gamma_left: f64,
    #[serde(default = "one")]
    pub gamma_right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, JsonSchema)]
#[serde(tag = "experiment", content = "model", rename_all = "snake_case")]
pub enum Model {
    Relax(RelaxModel),
    Spectrum(SpectrumModel),
    Pauli(PauliModel),
    CollisionConverge(CollisionModel),
    Transport(TransportModel),
    Rainbow(RainbowModel),
    Loss(LossModelConfig),
    XxzNess(XxzModel),
}

impl Model {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Model::Relax(_) => ExperimentKind::Relax,
            Model::Spectrum(_) => ExperimentKind::Spectrum,
            Model::Pauli(_) => ExperimentKind::Pauli,
            Model::CollisionConverge(_) => ExperimentKind::CollisionConverge,
            Model::Transport(_) => ExperimentKind::Transport,
            Model::Rainbow(_) => ExperimentKind::Rainbow,
            Model::Loss(_) => ExperimentKind::Loss,
            Model::XxzNess(_) => ExperimentKind::XxzNess,
        }
    }
}

/// Fully resolved configuration, defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub model: Model,
    pub output: String,
    pub seed: u64,
    pub tolerances: Tolerances,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: ExperimentKind,
    output: String,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    model: toml::Table,
}

/// Shape of a config file, for `schema --print`.
#[derive(JsonSchema)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
pub struct ConfigFile {
    experiment: ExperimentKind,
    /// Output path prefix; `{prefix}.csv` and `{prefix}.meta.json` are written.
    output: String,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    tolerances: Option<Tolerances>,
    /// Keys depend on `experiment`.
    #[serde(default)]
    model: Option<ModelTable>,
}

#[derive(JsonSchema)]
#[serde(untagged)]
#[allow(dead_code)]
enum ModelTable {
    Relax(RelaxModel),
    Spectrum(SpectrumModel),
    Pauli(PauliModel),
    CollisionConverge(CollisionModel),
    Transport(TransportModel),
    Rainbow(RainbowModel),
    Loss(LossModelConfig),
    XxzNess(XxzModel),
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        let table = toml::Value::Table(raw.model);
        let model = match raw.experiment {
            ExperimentKind::Relax => Model::Relax(parse_model(table)?),
            ExperimentKind::Spectrum => Model::Spectrum(parse_model(table)?),
            ExperimentKind::Pauli => Model::Pauli(parse_model(table)?),
            ExperimentKind::CollisionConverge => Model::CollisionConverge(parse_model(table)?),
            ExperimentKind::Transport => Model::Transport(parse_model(table)?),
            ExperimentKind::Rainbow => Model::Rainbow(parse_model(table)?),
            ExperimentKind::Loss => Model::Loss(parse_model(table)?),
            ExperimentKind::XxzNess => Model::XxzNess(parse_model(table)?),
        };
        let cfg = Self { model, output: raw.output, seed: raw.seed, tolerances: raw.tolerances };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.output.trim().is_empty() {
            return Err(RunError::Config("output prefix is empty".into()));
        }
        let t = &self.tolerances;
        positive("tolerances.boltzmann", t.boltzmann)?;
        positive("tolerances.zero", t.zero)?;
        positive("tolerances.convergence", t.convergence)?;
        finite("tolerances.fidelity", t.fidelity)?;
        match &self.model {
            Model::Relax(m) => {
                positive("omega0", m.omega0)?;
                non_negative("beta", m.beta)?;
                positive("gamma_down", m.gamma_down)?;
                if let Some(t) = m.t_final {
                    non_negative("t_final", t)?;
                }
                at_least("points", m.points, 2)?;
            }
            Model::Spectrum(m) => {
                range("dim", m.dim, 2, 8)?;
                range("jumps", m.jumps, 0, 8)?;
            }
            Model::Pauli(m) => {
                range("dim", m.dim, 2, 6)?;
                non_negative("kappa", m.kappa)?;
                non_negative("beta", m.beta)?;
                non_negative("t_final", m.t_final)?;
                at_least("points", m.points, 2)?;
            }
            Model::CollisionConverge(m) => {
                finite("g", m.g)?;
                finite("omega", m.omega)?;
                positive("tau_ref", m.tau_ref)?;
                positive("t_final", m.t_final)?;
                if m.taus.is_empty() {
                    return Err(RunError::Config("taus must not be empty".into()));
                }
                for &tau in &m.taus {
                    positive("taus", tau)?;
                }
            }
            Model::Transport(m) => {
                range("sites", m.sites, 2, 64)?;
                finite("j", m.j)?;
                non_negative("g", m.g)?;
                unit("n_left", m.n_left)?;
                unit("n_right", m.n_right)?;
                for &l in &m.lengths {
                    range("lengths", l, 2, 64)?;
                }
            }
            Model::Rainbow(m) => {
                range("sites", m.sites, 1, 32)?;
                finite("j", m.j)?;
                positive("g", m.g)?;
                finite("bell_phase", m.bell_phase)?;
                positive("tau", m.tau)?;
                at_least("max_collisions", m.max_collisions, 1)?;
            }
            Model::Loss(m) => {
                range("sites", m.sites, 1, 12)?;
                range("k", m.k, 1, m.sites)?;
                finite("j", m.j)?;
                non_negative("gamma", m.gamma)?;
                finite("trap", m.trap)?;
                non_negative("t_max", m.t_max)?;
                at_least("points", m.points, 2)?;
                if let Some([a, b]) = m.fit_window {
                    if !(a > 0.0 && b > a) {
                        return Err(RunError::Config(format!("fit_window [{a}, {b}] must satisfy 0 < t_min < t_max")));
                    }
                }
            }
            Model::XxzNess(m) => {
                range("sites", m.sites, 2, 8)?;
                finite("j", m.j)?;
                finite("delta", m.delta)?;
                non_negative("gamma_left", m.gamma_left)?;
                non_negative("gamma_right", m.gamma_right)?;
                for (name, v) in [("left_target", m.left_target), ("right_target", m.right_target)] {
                    if v.iter().any(|x| !x.is_finite()) || v.iter().all(|&x| x == 0.0) {
                        return Err(RunError::Config(format!("{name} must be a finite non-zero vector")));
                    }
                }
            }
        }
        Ok(())
    }
}

fn parse_model<T: for<'de> Deserialize<'de>>(table: toml::Value) -> Result<T, RunError> {
    T::deserialize(table).map_err(|e| RunError::Config(format!("[model] {e}")))
}

fn finite(name: &str, v: f64) -> Result<(), RunError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(RunError::Config(format!("{name} must be finite, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<(), RunError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(RunError::Config(format!("{name} must be non-negative, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<(), RunError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(RunError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn unit(name: &str, v: f64) -> Result<(), RunError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(RunError::Config(format!("{name} must lie in [0, 1], got {v}")))
    }
}

fn at_least(name: &str, v: usize, lo: usize) -> Result<(), RunError> {
    if v >= lo {
        Ok(())
    } else {
        Err(RunError::Config(format!("{name} must be at least {lo}, got {v}")))
    }
}

fn range(name: &str, v: usize, lo: usize, hi: usize) -> Result<(), RunError> {
    if (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(RunError::Config(format!("{name} must lie in {lo}..={hi}, got {v}")))
    }
}

fn one() -> f64 {
    1.0
}
fn two() -> usize {
    2
}
fn three() -> usize {
    3
}
fn yes() -> bool {
    true
}
fn d_points() -> usize {
    101
}
fn d_short_points() -> usize {
    21
}
fn d_excited() -> QubitInitial {
    QubitInitial::Excited
}
fn d_kappa() -> f64 {
    0.3
}
fn d_beta() -> f64 {
    1.2
}
fn d_pauli_t() -> f64 {
    5.0
}
fn d_g_collision() -> f64 {
    5f64.sqrt()
}
fn d_tau_ref() -> f64 {
    0.2
}
fn d_taus() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}
fn d_sites4() -> usize {
    4
}
fn d_sites6() -> usize {
    6
}
fn d_sites8() -> usize {
    8
}
fn d_bell() -> AncillaKind {
    AncillaKind::Bell
}
fn d_continuum() -> RainbowSolve {
    RainbowSolve::Continuum
}
fn d_tau_rainbow() -> f64 {
    0.1
}
fn d_max_collisions() -> usize {
    200_000
}
fn d_open() -> BoundaryKind {
    BoundaryKind::Open
}
fn d_full() -> LossInitial {
    LossInitial::Full
}
fn d_loss_t() -> f64 {
    10.0
}
fn d_delta() -> f64 {
    0.5
}
fn d_plus_z() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}
fn d_plus_x() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_toml("experiment = \"transport\"\noutput = \"out/t\"\n").unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.tolerances, Tolerances::default());
        match cfg.model {
            Model::Transport(m) => assert_eq!((m.sites, m.n_left, m.n_right), (8, 1.0, 0.0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "experiment = \"relax\"\noutput = \"x\"\ncolour = 1\n",
            "experiment = \"relax\"\noutput = \"x\"\n[model]\nomega = 1.0\n",
            "experiment = \"relax\"\noutput = \"x\"\n[tolerances]\nloose = 1.0\n",
            "experiment = \"nonsense\"\noutput = \"x\"\n",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(RunError::Config(_))), "{text}");
        }
    }

    #[test]
    fn negative_rates_are_rejected() {
        let text = "experiment = \"loss\"\noutput = \"x\"\n[model]\ngamma = -0.5\n";
        assert!(matches!(ExperimentConfig::from_toml(text), Err(RunError::Config(_))));
        let text = "experiment = \"transport\"\noutput = \"x\"\n[model]\nn_left = 1.5\n";
        assert!(matches!(ExperimentConfig::from_toml(text), Err(RunError::Config(_))));
    }

    #[test]
    fn resolved_config_serializes_with_tag() {
        let cfg = ExperimentConfig::from_toml("experiment = \"xxz_ness\"\noutput = \"x\"\nseed = 4\n").unwrap();
        let v = serde_json::to_value(&cfg).unwrap();
        assert_eq!(v["experiment"], "xxz_ness");
        assert_eq!(v["model"]["delta"], 0.5);
        assert_eq!(v["seed"], 4);
    }
}
