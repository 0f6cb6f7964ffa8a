//! The run configuration document.

use crate::error::{HarnessError, Result};
use fdwave_core::{
    center_lattice, random_initial_state, BoxDomain, GronwallParams, MonitorConfig, Nonlinearity, Physics, Schedule, SpectralField,
    State,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub dim: usize,
    pub length: f64,
    pub modes: usize,
    pub pad_factor: usize,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            length: 20.0,
            modes: 256,
            pad_factor: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub gamma: f64,
    pub lambda0: f64,
    pub nonlinearity: Nonlinearity,
    pub source: SourceConfig,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            lambda0: 1.0,
            nonlinearity: Nonlinearity::default(),
            source: SourceConfig::Zero,
        }
    }
}

/// The time-independent forcing `g`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    #[default]
    Zero,
    /// Random coefficients `|k|^-decay` times normals, rescaled to `||g|| = amplitude`.
    Random {
        amplitude: f64,
        #[serde(default = "default_source_decay")]
        decay: f64,
        #[serde(default = "default_source_seed")]
        seed: u64,
    },
    /// Sum of single sine modes.
    Modes { modes: Vec<ModeTerm> },
}

fn default_source_decay() -> f64 {
    2.0
}

fn default_source_seed() -> u64 {
    7
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeTerm {
    pub k: Vec<usize>,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub seed: u64,
    pub r_u: f64,
    pub r_v: f64,
    /// Unweighted `||xi_0||^2` before `amplitude` is applied.
    pub target_energy: f64,
    pub amplitude: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            r_u: 1.5,
            r_v: 1.0,
            target_energy: 1.0,
            amplitude: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Time between ledger rows.
    pub sample_every: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 10.0,
            sample_every: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsConfig {
    /// The first entry is the ledger weight.
    pub epsilons: Vec<f64>,
    pub center_spacing: f64,
    pub delta: Option<f64>,
    pub lyapunov_n: Option<f64>,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![0.1],
            center_spacing: 2.0,
            delta: None,
            lyapunov_n: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Write coefficient dumps of the initial and final states.
    pub snapshots: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Epsilon,
    Gamma,
    Dt,
    #[serde(alias = "N")]
    N,
    Seed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Simulate {},
    Dissipative {
        #[serde(default = "default_amplitudes")]
        amplitudes: Vec<f64>,
        /// Trailing fraction of the run used for the plateau.
        #[serde(default = "default_tail")]
        tail_fraction: f64,
        #[serde(default = "default_decay_threshold")]
        decay_threshold: f64,
        #[serde(default = "default_plateau_tolerance")]
        plateau_tolerance: f64,
        /// `kappa` of the discretized differential inequality; `None` uses `delta`.
        #[serde(default)]
        kappa: Option<f64>,
        /// Right-hand constant; `None` uses the energy constant.
        #[serde(default)]
        constant: Option<f64>,
        #[serde(default = "default_inequality_fraction")]
        inequality_fraction: f64,
    },
    Regularity {
        #[serde(default = "one")]
        window: f64,
        #[serde(default = "one")]
        start: f64,
        #[serde(default = "default_growth")]
        growth_factor: f64,
    },
    Twin {
        #[serde(default = "default_perturbation")]
        perturbation: f64,
        #[serde(default = "default_compare_at")]
        compare_at: f64,
        /// Constant `C` of the `A_T` factor.
        #[serde(default = "one")]
        c_at: f64,
        #[serde(default = "default_twin_tolerance")]
        tolerance: f64,
    },
    Smoothing {
        #[serde(default = "default_levels")]
        levels: u32,
        #[serde(default = "default_max_over_median")]
        max_over_median: f64,
    },
    Sweep {
        axis: SweepAxis,
        values: Vec<f64>,
        /// Experiment repeated for the `gamma` and `seed` axes.
        #[serde(default)]
        inner: Option<Box<Experiment>>,
    },
    FracopsVerify {
        #[serde(default = "default_thetas")]
        thetas: Vec<f64>,
        #[serde(default = "default_nodes")]
        nodes: usize,
        #[serde(default = "default_fracops_modes")]
        modes: usize,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
        #[serde(default = "default_trials")]
        trials: usize,
    },
    CommutatorStudy {
        #[serde(default = "default_theta")]
        theta: f64,
        #[serde(default = "default_epsilons")]
        epsilons: Vec<f64>,
        #[serde(default = "default_ensemble")]
        ensemble: usize,
        #[serde(default = "default_field_decay")]
        field_decay: f64,
        #[serde(default = "default_slope_s0")]
        min_slope_s0: f64,
        #[serde(default = "default_slope_s_half")]
        min_slope_s_half: f64,
        #[serde(default = "default_bump_spread")]
        max_bump_spread: f64,
    },
    Gronwall {
        #[serde(default = "default_k_max")]
        k_max: usize,
        #[serde(default = "default_gronwall_sets")]
        sets: Vec<GronwallParams>,
        #[serde(default = "default_gronwall_reference")]
        reference: GronwallParams,
    },
}

fn one() -> f64 {
    1.0
}
fn default_amplitudes() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}
fn default_tail() -> f64 {
    0.2
}
fn default_decay_threshold() -> f64 {
    1e-6
}
fn default_plateau_tolerance() -> f64 {
    0.1
}
fn default_inequality_fraction() -> f64 {
    0.99
}
fn default_growth() -> f64 {
    10.0
}
fn default_perturbation() -> f64 {
    1e-6
}
fn default_compare_at() -> f64 {
    5.0
}
fn default_twin_tolerance() -> f64 {
    0.25
}
fn default_levels() -> u32 {
    8
}
fn default_max_over_median() -> f64 {
    3.0
}
fn default_thetas() -> Vec<f64> {
    vec![0.1, 0.25, 0.5, 0.75]
}
fn default_nodes() -> usize {
    400
}
fn default_fracops_modes() -> usize {
    64
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_trials() -> usize {
    20
}
fn default_theta() -> f64 {
    0.25
}
fn default_epsilons() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}
fn default_ensemble() -> usize {
    10
}
fn default_field_decay() -> f64 {
    1.5
}
fn default_slope_s0() -> f64 {
    0.4
}
fn default_slope_s_half() -> f64 {
    0.65
}
fn default_bump_spread() -> f64 {
    3.0
}
fn default_k_max() -> usize {
    30
}

pub fn default_gronwall_sets() -> Vec<GronwallParams> {
    let mut sets = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        for (h, y0) in [(0.0, 1.0), (0.0, 7.0), (1.0, 0.0), (1.0, 7.0)] {
            sets.push(GronwallParams::new(1.0, h, p, y0).expect("static parameters"));
        }
    }
    sets
}

pub fn default_gronwall_reference() -> GronwallParams {
    GronwallParams {
        l: Some(5.0),
        ..GronwallParams::new(1.0, 0.0, 2.0, 1.0).expect("static parameters")
    }
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Simulate {} => "simulate",
            Experiment::Dissipative { .. } => "dissipative",
            Experiment::Regularity { .. } => "regularity",
            Experiment::Twin { .. } => "twin",
            Experiment::Smoothing { .. } => "smoothing",
            Experiment::Sweep { .. } => "sweep",
            Experiment::FracopsVerify { .. } => "fracops-verify",
            Experiment::CommutatorStudy { .. } => "commutator-study",
            Experiment::Gronwall { .. } => "gronwall",
        }
    }

    /// Default parameters for a subcommand name.
    pub fn default_for(name: &str) -> Option<Self> {
        let json = format!("{{\"kind\": \"{name}\"}}");
        match name {
            "sweep" => None,
            _ => serde_json::from_str(&json).ok(),
        }
    }
}

impl RunConfig {
    /// Defaults everywhere except the experiment.
    pub fn with_experiment(experiment: Experiment) -> Self {
        Self {
            domain: DomainConfig::default(),
            physics: PhysicsConfig::default(),
            initial: InitialConfig::default(),
            time: TimeConfig::default(),
            weights: WeightsConfig::default(),
            output: OutputConfig::default(),
            experiment,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| HarnessError::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config is always serializable");
        Sha256::digest(compact.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let domain = self.domain()?;
        self.physics(&domain)?;
        let t = &self.time;
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            return Err(HarnessError::config(format!("time.dt must be positive, got {}", t.dt)));
        }
        if !(t.t_end >= 0.0 && t.t_end.is_finite()) {
            return Err(HarnessError::config(format!("time.t_end must be >= 0, got {}", t.t_end)));
        }
        if !(t.sample_every >= t.dt && t.sample_every.is_finite()) {
            return Err(HarnessError::config(format!(
                "time.sample_every must be >= dt, got {}",
                t.sample_every
            )));
        }
        let w = &self.weights;
        if w.epsilons.is_empty() || w.epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(HarnessError::config("weights.epsilons must be a non-empty list of positive numbers"));
        }
        self.centers(&domain)?;
        let init = &self.initial;
        if !(init.target_energy >= 0.0 && init.amplitude.is_finite() && init.r_u.is_finite() && init.r_v.is_finite()) {
            return Err(HarnessError::config("initial block has non-finite or negative entries"));
        }
        self.validate_experiment(&self.experiment)
    }

    fn validate_experiment(&self, e: &Experiment) -> Result<()> {
        let bad = |msg: &str| Err(HarnessError::config(format!("{}: {msg}", e.name())));
        match e {
            Experiment::Dissipative { amplitudes, tail_fraction, .. } => {
                if amplitudes.is_empty() {
                    return bad("amplitudes must be non-empty");
                }
                if !(*tail_fraction > 0.0 && *tail_fraction < 1.0) {
                    return bad("tail_fraction must lie in (0, 1)");
                }
            }
            Experiment::Regularity { window, start, .. } => {
                if !(*window > 0.0 && *start >= 0.0 && *start + *window <= self.time.t_end) {
                    return bad("need window > 0, start >= 0 and at least one window before time.t_end");
                }
                if self.time.t_end < 5.0 {
                    return bad("needs time.t_end >= 5");
                }
            }
            Experiment::Twin { perturbation, compare_at, .. } => {
                if !(*perturbation > 0.0) {
                    return bad("perturbation must be positive");
                }
                if *compare_at > self.time.t_end {
                    return bad("compare_at lies beyond time.t_end");
                }
            }
            Experiment::Smoothing { levels, .. } => {
                if *levels == 0 || *levels > 20 {
                    return bad("levels must lie in 1..=20");
                }
            }
            Experiment::Sweep { values, inner, axis } => {
                if values.is_empty() {
                    return bad("values must be non-empty");
                }
                if let Some(inner) = inner {
                    if matches!(**inner, Experiment::Sweep { .. }) {
                        return bad("nested sweeps are not supported");
                    }
                    self.validate_experiment(inner)?;
                } else if matches!(axis, SweepAxis::Gamma | SweepAxis::Seed) {
                    return bad("the gamma and seed axes need an inner experiment");
                }
            }
            Experiment::FracopsVerify { thetas, nodes, .. } => {
                if thetas.is_empty() || *nodes < 2 {
                    return bad("need thetas and at least 2 nodes");
                }
            }
            Experiment::CommutatorStudy { epsilons, ensemble, .. } => {
                if epsilons.len() < 2 || *ensemble == 0 {
                    return bad("need at least two epsilons and a non-empty ensemble");
                }
            }
            Experiment::Gronwall { sets, reference, k_max } => {
                for s in sets.iter().chain(std::iter::once(reference)) {
                    s.validate()?;
                }
                if *k_max == 0 {
                    return bad("k_max must be >= 1");
                }
            }
            Experiment::Simulate {} => {}
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Arc<BoxDomain<f64>>> {
        let d = &self.domain;
        Ok(BoxDomain::new(d.dim, d.length, d.modes, d.pad_factor)?)
    }

    pub fn source(&self, domain: &Arc<BoxDomain<f64>>) -> Result<SpectralField<f64>> {
        match &self.physics.source {
            SourceConfig::Zero => Ok(SpectralField::zeros(domain)),
            SourceConfig::Random { amplitude, decay, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let g = SpectralField::random(domain, *decay, &mut rng);
                let norm = g.l2_norm();
                if norm == 0.0 {
                    return Ok(g);
                }
                Ok(g.scaled(amplitude / norm))
            }
            SourceConfig::Modes { modes } => {
                let mut g = SpectralField::zeros(domain);
                for m in modes {
                    g = &g + &SpectralField::single_mode(domain, &m.k, m.amplitude)?;
                }
                Ok(g)
            }
        }
    }

    pub fn physics(&self, domain: &Arc<BoxDomain<f64>>) -> Result<Physics<f64>> {
        let p = &self.physics;
        Ok(Physics::new(p.gamma, p.lambda0, p.nonlinearity, self.source(domain)?)?)
    }

    /// Initial state from the seed, scaled by `amplitude`.
    pub fn initial_state(&self, domain: &Arc<BoxDomain<f64>>) -> Result<State<f64>> {
        let i = &self.initial;
        let mut rng = ChaCha8Rng::seed_from_u64(i.seed);
        let s = random_initial_state(domain, i.r_u, i.r_v, i.target_energy, self.physics.lambda0, &mut rng)?;
        Ok(s.scaled(i.amplitude))
    }

    pub fn centers(&self, domain: &BoxDomain<f64>) -> Result<Vec<Vec<f64>>> {
        Ok(center_lattice(domain, self.weights.center_spacing)?)
    }

    pub fn epsilon(&self) -> f64 {
        self.weights.epsilons[0]
    }

    pub fn monitor_config(&self, domain: &BoxDomain<f64>) -> Result<MonitorConfig> {
        Ok(MonitorConfig {
            epsilon: self.epsilon(),
            centers: self.centers(domain)?,
            delta: self.weights.delta,
            lyapunov_n: self.weights.lyapunov_n,
        })
    }

    pub fn schedule(&self) -> Result<Schedule> {
        Ok(Schedule::from_times(self.time.dt, self.time.t_end, self.time.sample_every)?)
    }
}
