//! Metrology strategies evaluated over a grid of encoding times.
//!
//! * `standard`: entangled or |+⟩ probe, no controls.
//! * `ancilla`: system qubit entangled with a noiseless ancilla, no controls.
//! * `theoretical_optimal`: u_z = −ω₀ in every slice (transverse dephasing).
//! * `control_enhanced`: per-T multi-start Nelder–Mead over the K×L amplitudes,
//!   maximizing the spectral QFI.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channels::{
    ancilla_extend, scenario_model, ControlSet, EncodingModel, NoiseSpec, Scenario,
};
use crate::error::{Error, Result};
use crate::linalg::{c, CVector};
use crate::liouville::DensityMatrix;
use crate::metrology::{default_derivative_step, qfi_of_schedule, sensitivity};
use crate::optimizer::{multi_start_with, Bounds, OptimizerOptions};
use crate::parallel;
use crate::propagation::{ControlSchedule, Propagator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Standard,
    Ancilla,
    TheoreticalOptimal,
    ControlEnhanced,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Standard,
        SchemeKind::Ancilla,
        SchemeKind::TheoreticalOptimal,
        SchemeKind::ControlEnhanced,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Standard => "standard",
            SchemeKind::Ancilla => "ancilla",
            SchemeKind::TheoreticalOptimal => "theoretical_optimal",
            SchemeKind::ControlEnhanced => "control_enhanced",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.map(SchemeKind::name).join(", ")
    }

    /// Probe used when none is configured.
    pub fn default_probe(self, scenario: Scenario) -> Probe {
        match self {
            SchemeKind::Ancilla => Probe::BellWithAncilla,
            SchemeKind::TheoreticalOptimal => Probe::Plus,
            SchemeKind::Standard | SchemeKind::ControlEnhanced => {
                if scenario.n_qubits() == 1 {
                    Probe::Plus
                } else {
                    Probe::Ghz
                }
            }
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown scheme '{s}' (valid: {})",
                    SchemeKind::valid_names()
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Probe {
    /// |+⟩ on every qubit.
    Plus,
    /// (|0…0⟩ + |1…1⟩)/√2.
    Ghz,
    /// (|00⟩ + |11⟩)/√2 on system ⊗ ancilla.
    BellWithAncilla,
    /// Haar-random pure state drawn from the seed.
    RandomSeeded,
}

impl Probe {
    pub const ALL: [Probe; 4] = [
        Probe::Plus,
        Probe::Ghz,
        Probe::BellWithAncilla,
        Probe::RandomSeeded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Probe::Plus => "plus",
            Probe::Ghz => "ghz",
            Probe::BellWithAncilla => "bell_with_ancilla",
            Probe::RandomSeeded => "random_seeded",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.map(Probe::name).join(", ")
    }

    /// State vector on `n_qubits` qubits (ancilla included).
    pub fn vector(self, n_qubits: usize, seed: u64) -> Result<CVector> {
        let d = 1usize << n_qubits;
        match self {
            Probe::Plus => Ok(CVector::from_element(d, c((d as f64).sqrt().recip()))),
            Probe::Ghz | Probe::BellWithAncilla => {
                if self == Probe::BellWithAncilla && n_qubits != 2 {
                    return Err(Error::InvalidArgument(
                        "bell_with_ancilla needs a system qubit plus one ancilla".into(),
                    ));
                }
                let mut v = CVector::zeros(d);
                v[0] = c(std::f64::consts::FRAC_1_SQRT_2);
                v[d - 1] += c(std::f64::consts::FRAC_1_SQRT_2);
                Ok(v)
            }
            Probe::RandomSeeded => Ok(haar_random_state(d, seed)),
        }
    }

    pub fn state(self, n_qubits: usize, seed: u64) -> Result<DensityMatrix> {
        DensityMatrix::pure(&self.vector(n_qubits, seed)?)
    }
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Probe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown probe '{s}' (valid: {})",
                    Probe::valid_names()
                ))
            })
    }
}

/// Normalized complex Gaussian vector, which is Haar-distributed.
pub fn haar_random_state(dim: usize, seed: u64) -> CVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = CVector::from_fn(dim, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        num_complex::Complex64::new(re, im)
    });
    let norm = v.norm();
    v / c(norm)
}

/// Seed of sub-task `index` under `master` (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    pub scenario: Scenario,
    pub noise: NoiseSpec,
    /// rad/s
    pub omega0: f64,
    /// Encoding times in s, strictly increasing.
    pub time_grid: Vec<f64>,
    /// K
    pub slices: usize,
    pub probe: Probe,
    /// Box half-width for every amplitude, rad/s.
    pub u_max: f64,
    pub optimizer: OptimizerOptions,
    /// Start each T from the previous T's best schedule as well.
    pub warm_start: bool,
    /// γ_c in the sensitivity.
    pub gamma_c: f64,
    /// Master seed; per-T optimizer seeds and random probes derive from it.
    pub seed: u64,
}

impl SchemeConfig {
    pub const DEFAULT_SLICES: usize = 20;
    pub const DEFAULT_RESTARTS: usize = 8;
    pub const DEFAULT_GRID_POINTS: usize = 30;

    /// Defaults for `scheme` on `scenario` at ω₀ = 2π rad/s.
    pub fn new(scheme: SchemeKind, scenario: Scenario) -> Self {
        let omega0 = 2.0 * std::f64::consts::PI;
        let noise = scenario.default_noise();
        let u_max = 20.0 * omega0;
        Self {
            scheme,
            scenario,
            noise,
            omega0,
            time_grid: default_time_grid(scenario, &noise, Self::DEFAULT_GRID_POINTS),
            slices: Self::DEFAULT_SLICES,
            probe: scheme.default_probe(scenario),
            u_max,
            optimizer: OptimizerOptions {
                restarts: Self::DEFAULT_RESTARTS,
                ..OptimizerOptions::for_amplitude_bound(u_max)
            },
            warm_start: false,
            gamma_c: 1.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.time_grid.is_empty() {
            return Err(Error::InvalidArgument("empty time grid".into()));
        }
        if self.time_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidArgument(
                "time grid entries must be positive".into(),
            ));
        }
        if self.time_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "time grid must be strictly increasing".into(),
            ));
        }
        if self.slices == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        if !(self.u_max > 0.0) || !self.u_max.is_finite() {
            return Err(Error::InvalidArgument(format!("u_max = {}", self.u_max)));
        }
        if !(self.gamma_c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma_c = {}",
                self.gamma_c
            )));
        }
        self.optimizer.validate()
    }
}

/// `points` log-spaced times over [0.1/γ, 5/γ] (parallel dephasing) or
/// [0.1/γ, 4/γ] (other channels), with γ the channel's reference rate.
pub fn default_time_grid(scenario: Scenario, noise: &NoiseSpec, points: usize) -> Vec<f64> {
    let gamma = noise.reference_rate();
    let upper = match scenario {
        Scenario::ParallelDephasing1q | Scenario::ParallelDephasing2q => 5.0,
        Scenario::TransverseDephasing | Scenario::AmplitudeDamping => 4.0,
    };
    log_grid(0.1 / gamma, upper / gamma, points)
}

/// `points` log-spaced values from `start` to `stop` inclusive.
pub fn log_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (start.ln(), stop.ln());
            (0..points)
                .map(|i| {
                    if i == 0 {
                        start
                    } else if i + 1 == points {
                        stop
                    } else {
                        (a + (b - a) * i as f64 / (points - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points)
            .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetrologyResult {
    pub scheme: SchemeKind,
    /// Encoding time, s.
    pub t: f64,
    /// s²
    pub qfi: f64,
    pub sensitivity: f64,
    pub schedule: ControlSchedule,
    /// Objective calls spent (0 for schemes without optimization).
    pub evaluations: usize,
    pub seed: u64,
    pub converged: bool,
}

/// Encoding model and probe a scheme evolves.
pub fn scheme_setup(config: &SchemeConfig) -> Result<(EncodingModel, DensityMatrix)> {
    let base = scenario_model(config.scenario, &config.noise, config.omega0)?;
    let model = match config.scheme {
        SchemeKind::Ancilla => {
            if config.scenario.n_qubits() != 1 {
                return Err(Error::Unsupported(format!(
                    "ancilla scheme on the {}-qubit scenario '{}'",
                    config.scenario.n_qubits(),
                    config.scenario
                )));
            }
            ancilla_extend(&base)?
        }
        _ => base,
    };
    let probe = config.probe.state(model.n_qubits(), config.seed)?;
    Ok((model, probe))
}

fn require(config: &SchemeConfig, scheme: SchemeKind) -> Result<()> {
    if config.scheme != scheme {
        return Err(Error::InvalidArgument(format!(
            "config is for scheme '{}', not '{}'",
            config.scheme, scheme
        )));
    }
    config.validate()
}

fn fixed_schedule_results(
    config: &SchemeConfig,
    model: &EncodingModel,
    rho0: &DensityMatrix,
    per_slice: &[f64],
) -> Result<Vec<MetrologyResult>> {
    let propagator = Propagator::new(model)?;
    let delta = default_derivative_step(config.omega0);
    let results = parallel::map_slice(&config.time_grid, |&t| -> Result<MetrologyResult> {
        let schedule = ControlSchedule::constant(config.slices, per_slice, t)?;
        let qfi = qfi_of_schedule(&propagator, &schedule, rho0, delta)
            .map_err(|e| e.at_time(t))?
            .value;
        Ok(MetrologyResult {
            scheme: config.scheme,
            t,
            qfi,
            sensitivity: sensitivity(qfi, t, config.gamma_c)?,
            schedule,
            evaluations: 0,
            seed: config.seed,
            converged: true,
        })
    });
    results.into_iter().collect()
}

pub fn run_standard(config: &SchemeConfig) -> Result<Vec<MetrologyResult>> {
    require(config, SchemeKind::Standard)?;
    let (model, rho0) = scheme_setup(config)?;
    fixed_schedule_results(config, &model, &rho0, &vec![0.0; model.n_controls()])
}

pub fn run_ancilla_assisted(config: &SchemeConfig) -> Result<Vec<MetrologyResult>> {
    require(config, SchemeKind::Ancilla)?;
    let (model, rho0) = scheme_setup(config)?;
    fixed_schedule_results(config, &model, &rho0, &vec![0.0; model.n_controls()])
}

pub fn run_theoretical_optimal(config: &SchemeConfig) -> Result<Vec<MetrologyResult>> {
    require(config, SchemeKind::TheoreticalOptimal)?;
    if config.scenario.controls() != ControlSet::Longitudinal {
        return Err(Error::Unsupported(format!(
            "theoretical_optimal control is defined for transverse-dephasing only, not '{}'",
            config.scenario
        )));
    }
    let (model, rho0) = scheme_setup(config)?;
    fixed_schedule_results(
        config,
        &model,
        &rho0,
        &vec![-config.omega0; model.n_controls()],
    )
}

pub fn run_control_enhanced(config: &SchemeConfig) -> Result<Vec<MetrologyResult>> {
    require(config, SchemeKind::ControlEnhanced)?;
    let (model, rho0) = scheme_setup(config)?;
    let propagator = Propagator::new(&model)?;
    let delta = default_derivative_step(config.omega0);
    let n_vars = config.slices * model.n_controls();
    let bounds = Bounds::symmetric(n_vars, config.u_max);

    let optimize_at = |index: usize, t: f64, warm: Option<&[f64]>| -> Result<MetrologyResult> {
        let seed = derive_seed(config.seed, index as u64);
        let options = OptimizerOptions {
            seed,
            ..config.optimizer.clone()
        };
        let failure: OnceLock<Error> = OnceLock::new();
        let objective = |x: &[f64]| -> f64 {
            let value = ControlSchedule::new(config.slices, model.n_controls(), x.to_vec(), t)
                .and_then(|s| qfi_of_schedule(&propagator, &s, &rho0, delta));
            match value {
                Ok(q) => -q.value,
                Err(e) => {
                    let _ = failure.set(e);
                    f64::INFINITY
                }
            }
        };
        let extra: Vec<Vec<f64>> = warm.map(|w| vec![w.to_vec()]).unwrap_or_default();
        let found = multi_start_with(objective, &bounds, &extra, &options);
        if let Some(e) = failure.into_inner() {
            return Err(e.at_time(t));
        }
        let found = found.map_err(|e| e.at_time(t))?;
        if !found.best.converged {
            log::warn!(
                "control search at T = {t} s stopped on its evaluation budget (best QFI {:.6e})",
                -found.best.f
            );
        }
        let qfi = -found.best.f;
        Ok(MetrologyResult {
            scheme: SchemeKind::ControlEnhanced,
            t,
            qfi,
            sensitivity: sensitivity(qfi, t, config.gamma_c)?,
            schedule: ControlSchedule::new(config.slices, model.n_controls(), found.best.x, t)?
                .with_bound(config.u_max)?,
            evaluations: found.total_evals,
            seed,
            converged: found.best.converged,
        })
    };

    if config.warm_start {
        let mut out: Vec<MetrologyResult> = Vec::with_capacity(config.time_grid.len());
        for (i, &t) in config.time_grid.iter().enumerate() {
            let warm = out.last().map(|r| r.schedule.amplitudes().to_vec());
            out.push(optimize_at(i, t, warm.as_deref())?);
        }
        Ok(out)
    } else {
        parallel::map_indexed(config.time_grid.len(), |i| {
            optimize_at(i, config.time_grid[i], None)
        })
        .into_iter()
        .collect()
    }
}

/// Run whichever scheme `config` names.
pub fn run(config: &SchemeConfig) -> Result<Vec<MetrologyResult>> {
    match config.scheme {
        SchemeKind::Standard => run_standard(config),
        SchemeKind::Ancilla => run_ancilla_assisted(config),
        SchemeKind::TheoreticalOptimal => run_theoretical_optimal(config),
        SchemeKind::ControlEnhanced => run_control_enhanced(config),
    }
}
