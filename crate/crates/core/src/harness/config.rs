//! Run configuration files.
//!
//! Configs are TOML documents with one table per concern. Every field except
//! `experiment.scenario` is optional; [`RunConfig::to_toml`] writes the fully
//! resolved form, which parses back to an identical config.
//!
//! ```toml
//! [experiment]
//! scenario = "parallel-dephasing-1q"
//! schemes = ["standard", "control_enhanced"]
//! omega0 = 6.283185307179586
//! seed = 7
//!
//! [noise]
//! gamma = 10.0
//!
//! [time_grid]
//! start = 0.01
//! stop = 0.5
//! points = 30
//! spacing = "log"
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channels::{ControlSet, NoiseSpec, Scenario};
use crate::optimizer::OptimizerOptions;
use crate::schemes::{default_time_grid, linear_grid, log_grid, Probe, SchemeConfig, SchemeKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl ConfigError {
    fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl From<toml::de::Error> for ConfigError {
    fn from(e: toml::de::Error) -> Self {
        Self(e.to_string().trim_end().to_owned())
    }
}

type CResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Linear,
}

impl Spacing {
    pub fn name(self) -> &'static str {
        match self {
            Spacing::Log => "log",
            Spacing::Linear => "linear",
        }
    }
}

impl FromStr for Spacing {
    type Err = ConfigError;

    fn from_str(s: &str) -> CResult<Self> {
        match s {
            "log" => Ok(Spacing::Log),
            "linear" => Ok(Spacing::Linear),
            _ => Err(ConfigError::new(format!(
                "unknown time-grid spacing '{s}' (valid: log, linear)"
            ))),
        }
    }
}

impl fmt::Display for Spacing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl TimeGrid {
    pub fn values(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Log => log_grid(self.start, self.stop, self.points),
            Spacing::Linear => linear_grid(self.start, self.stop, self.points),
        }
    }

    fn validate(&self) -> CResult<()> {
        if !(self.start > 0.0) || !self.stop.is_finite() {
            return Err(ConfigError::new(
                "time_grid.start must be > 0 and stop finite",
            ));
        }
        if self.points == 0 {
            return Err(ConfigError::new("time_grid.points must be ≥ 1"));
        }
        if self.points > 1 && !(self.stop > self.start) {
            return Err(ConfigError::new(
                "time_grid.stop must exceed time_grid.start",
            ));
        }
        Ok(())
    }
}

// On-disk layout.

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunFile {
    experiment: ExperimentSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    time_grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    control: Option<ControlSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probes: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    optimizer: Option<OptimizerSection>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schemes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_plus: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spacing: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControlSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    warm_start: Option<bool>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizerSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_evals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reflection: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expansion: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    contraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shrink: Option<f64>,
}

impl OptimizerSection {
    /// Fill unset fields from `base`; `max_evals` falls back to 200·n.
    fn resolve(self, base: OptimizerOptions, n_vars: usize) -> CResult<OptimizerOptions> {
        let opts = OptimizerOptions {
            restarts: self.restarts.unwrap_or(base.restarts),
            max_evals: Some(self.max_evals.unwrap_or_else(|| base.eval_budget(n_vars))),
            x_tol: self.x_tol.unwrap_or(base.x_tol),
            f_tol: self.f_tol.unwrap_or(base.f_tol),
            initial_step: self.initial_step.unwrap_or(base.initial_step),
            reflection: self.reflection.unwrap_or(base.reflection),
            expansion: self.expansion.unwrap_or(base.expansion),
            contraction: self.contraction.unwrap_or(base.contraction),
            shrink: self.shrink.unwrap_or(base.shrink),
            seed: base.seed,
        };
        opts.validate()
            .map_err(|e| ConfigError::new(format!("[optimizer] {e}")))?;
        Ok(opts)
    }

    fn from_options(o: &OptimizerOptions) -> Self {
        Self {
            restarts: Some(o.restarts),
            max_evals: o.max_evals,
            x_tol: Some(o.x_tol),
            f_tol: Some(o.f_tol),
            initial_step: Some(o.initial_step),
            reflection: Some(o.reflection),
            expansion: Some(o.expansion),
            contraction: Some(o.contraction),
            shrink: Some(o.shrink),
        }
    }
}

fn parse_name<T: FromStr<Err = crate::Error>>(s: &str) -> CResult<T> {
    s.parse::<T>().map_err(|e| ConfigError::new(e.to_string()))
}

/// Integers in TOML are signed 64-bit.
fn check_seed(seed: u64) -> CResult<()> {
    if seed > i64::MAX as u64 {
        return Err(ConfigError::new(format!(
            "seed {seed} exceeds {}",
            i64::MAX
        )));
    }
    Ok(())
}

fn controls_per_model(scenario: Scenario) -> usize {
    let per_qubit = match scenario.controls() {
        ControlSet::Transverse => 2,
        ControlSet::Longitudinal => 1,
    };
    per_qubit * scenario.n_qubits()
}

fn resolve_noise(scenario: Scenario, section: Option<NoiseSection>) -> CResult<NoiseSpec> {
    let s = section.unwrap_or_default();
    let default = scenario.default_noise();
    let reject = |present: bool, key: &str| -> CResult<()> {
        if present {
            Err(ConfigError::new(format!(
                "noise.{key} does not apply to scenario '{scenario}'"
            )))
        } else {
            Ok(())
        }
    };
    let spec = match default {
        NoiseSpec::ParallelDephasing { gamma } | NoiseSpec::TransverseDephasing { gamma } => {
            reject(s.gamma1.is_some(), "gamma1")?;
            reject(s.gamma2.is_some(), "gamma2")?;
            reject(s.gamma_minus.is_some(), "gamma_minus")?;
            reject(s.gamma_plus.is_some(), "gamma_plus")?;
            let gamma = s.gamma.unwrap_or(gamma);
            if matches!(default, NoiseSpec::ParallelDephasing { .. }) {
                NoiseSpec::ParallelDephasing { gamma }
            } else {
                NoiseSpec::TransverseDephasing { gamma }
            }
        }
        NoiseSpec::UncorrelatedDephasing { gamma1, gamma2 } => {
            reject(s.gamma_minus.is_some(), "gamma_minus")?;
            reject(s.gamma_plus.is_some(), "gamma_plus")?;
            // a bare `gamma` sets both qubits
            let both = s.gamma;
            NoiseSpec::UncorrelatedDephasing {
                gamma1: s.gamma1.or(both).unwrap_or(gamma1),
                gamma2: s.gamma2.or(both).unwrap_or(gamma2),
            }
        }
        NoiseSpec::AmplitudeDamping {
            gamma_minus,
            gamma_plus,
        } => {
            reject(s.gamma1.is_some(), "gamma1")?;
            reject(s.gamma2.is_some(), "gamma2")?;
            reject(s.gamma.is_some(), "gamma (use gamma_minus / gamma_plus)")?;
            NoiseSpec::AmplitudeDamping {
                gamma_minus: s.gamma_minus.unwrap_or(gamma_minus),
                gamma_plus: s.gamma_plus.unwrap_or(gamma_plus),
            }
        }
    };
    spec.channel()
        .map_err(|e| ConfigError::new(format!("[noise] {e}")))?;
    Ok(spec)
}

fn noise_section(spec: &NoiseSpec) -> NoiseSection {
    match *spec {
        NoiseSpec::ParallelDephasing { gamma } | NoiseSpec::TransverseDephasing { gamma } => {
            NoiseSection {
                gamma: Some(gamma),
                ..Default::default()
            }
        }
        NoiseSpec::UncorrelatedDephasing { gamma1, gamma2 } => NoiseSection {
            gamma1: Some(gamma1),
            gamma2: Some(gamma2),
            ..Default::default()
        },
        NoiseSpec::AmplitudeDamping {
            gamma_minus,
            gamma_plus,
        } => NoiseSection {
            gamma_minus: Some(gamma_minus),
            gamma_plus: Some(gamma_plus),
            ..Default::default()
        },
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub schemes: Vec<SchemeKind>,
    /// rad/s
    pub omega0: f64,
    pub noise: NoiseSpec,
    pub grid: TimeGrid,
    /// K
    pub slices: usize,
    /// rad/s
    pub u_max: f64,
    pub warm_start: bool,
    pub probes: BTreeMap<SchemeKind, Probe>,
    pub gamma_c: f64,
    /// Per-run seeds are derived from `seed`; the `seed` field here is unused.
    pub optimizer: OptimizerOptions,
    pub seed: u64,
}

impl RunConfig {
    pub const DEFAULT_SCHEMES: [SchemeKind; 2] =
        [SchemeKind::Standard, SchemeKind::ControlEnhanced];

    /// All defaults for `scenario`.
    pub fn for_scenario(scenario: Scenario) -> Self {
        Self::parse(&format!(
            "[experiment]\nscenario = \"{}\"\n",
            scenario.name()
        ))
        .expect("default config resolves")
    }

    pub fn parse(text: &str) -> CResult<Self> {
        let file: RunFile = toml::from_str(text)?;
        let scenario: Scenario = parse_name(&file.experiment.scenario)?;

        let schemes = match &file.experiment.schemes {
            None => Self::DEFAULT_SCHEMES.to_vec(),
            Some(names) => names
                .iter()
                .map(|n| parse_name(n))
                .collect::<CResult<Vec<_>>>()?,
        };
        if schemes.is_empty() {
            return Err(ConfigError::new("experiment.schemes is empty"));
        }
        for (i, s) in schemes.iter().enumerate() {
            if schemes[..i].contains(s) {
                return Err(ConfigError::new(format!("scheme '{s}' listed twice")));
            }
            if *s == SchemeKind::Ancilla && scenario.n_qubits() != 1 {
                return Err(ConfigError::new(format!(
                    "scheme 'ancilla' needs a 1-qubit scenario, '{scenario}' has {}",
                    scenario.n_qubits()
                )));
            }
            if *s == SchemeKind::TheoreticalOptimal && scenario != Scenario::TransverseDephasing {
                return Err(ConfigError::new(format!(
                    "scheme 'theoretical_optimal' applies to transverse-dephasing only, not '{scenario}'"
                )));
            }
        }

        let omega0 = file.experiment.omega0.unwrap_or(2.0 * PI);
        if !omega0.is_finite() {
            return Err(ConfigError::new("experiment.omega0 must be finite"));
        }
        let gamma_c = file.experiment.gamma_c.unwrap_or(1.0);
        if !(gamma_c > 0.0) {
            return Err(ConfigError::new("experiment.gamma_c must be > 0"));
        }
        let seed = file.experiment.seed.unwrap_or(0);
        check_seed(seed)?;

        let noise = resolve_noise(scenario, file.noise)?;

        let g = file.time_grid.unwrap_or_default();
        let default_grid = default_time_grid(scenario, &noise, SchemeConfig::DEFAULT_GRID_POINTS);
        let grid = TimeGrid {
            start: g.start.unwrap_or(default_grid[0]),
            stop: g.stop.unwrap_or(default_grid[default_grid.len() - 1]),
            points: g.points.unwrap_or(SchemeConfig::DEFAULT_GRID_POINTS),
            spacing: g
                .spacing
                .as_deref()
                .map(str::parse)
                .transpose()?
                .unwrap_or(Spacing::Log),
        };
        grid.validate()?;

        let ctl = file.control.unwrap_or_default();
        let slices = ctl.slices.unwrap_or(SchemeConfig::DEFAULT_SLICES);
        if slices == 0 {
            return Err(ConfigError::new("control.slices must be ≥ 1"));
        }
        let u_max = ctl.u_max.unwrap_or(20.0 * omega0.abs());
        if !(u_max > 0.0) || !u_max.is_finite() {
            return Err(ConfigError::new("control.u_max must be positive"));
        }

        let mut probes = BTreeMap::new();
        let given = file.probes.unwrap_or_default();
        for key in given.keys() {
            let kind: SchemeKind = parse_name(key)?;
            if !schemes.contains(&kind) {
                return Err(ConfigError::new(format!(
                    "probes.{key} given but scheme '{key}' is not run"
                )));
            }
        }
        for &s in &schemes {
            let probe = match given.get(s.name()) {
                Some(name) => parse_name(name)?,
                None => s.default_probe(scenario),
            };
            probes.insert(s, probe);
        }

        let base = OptimizerOptions {
            restarts: SchemeConfig::DEFAULT_RESTARTS,
            ..OptimizerOptions::for_amplitude_bound(u_max)
        };
        let optimizer = file
            .optimizer
            .unwrap_or_default()
            .resolve(base, slices * controls_per_model(scenario))?;

        Ok(Self {
            scenario,
            schemes,
            omega0,
            noise,
            grid,
            slices,
            u_max,
            warm_start: ctl.warm_start.unwrap_or(false),
            probes,
            gamma_c,
            optimizer,
            seed,
        })
    }

    /// Resolved config as TOML; parses back to `self`.
    pub fn to_toml(&self) -> CResult<String> {
        check_seed(self.seed)?;
        let file = RunFile {
            experiment: ExperimentSection {
                scenario: self.scenario.name().to_owned(),
                schemes: Some(self.schemes.iter().map(|s| s.name().to_owned()).collect()),
                omega0: Some(self.omega0),
                gamma_c: Some(self.gamma_c),
                seed: Some(self.seed),
            },
            noise: Some(noise_section(&self.noise)),
            time_grid: Some(GridSection {
                start: Some(self.grid.start),
                stop: Some(self.grid.stop),
                points: Some(self.grid.points),
                spacing: Some(self.grid.spacing.name().to_owned()),
            }),
            control: Some(ControlSection {
                slices: Some(self.slices),
                u_max: Some(self.u_max),
                warm_start: Some(self.warm_start),
            }),
            probes: Some(
                self.probes
                    .iter()
                    .map(|(s, p)| (s.name().to_owned(), p.name().to_owned()))
                    .collect(),
            ),
            optimizer: Some(OptimizerSection::from_options(&self.optimizer)),
        };
        toml::to_string(&file).map_err(|e| ConfigError::new(e.to_string()))
    }

    pub fn time_grid(&self) -> Vec<f64> {
        self.grid.values()
    }

    pub fn scheme_config(&self, scheme: SchemeKind) -> SchemeConfig {
        SchemeConfig {
            scheme,
            scenario: self.scenario,
            noise: self.noise,
            omega0: self.omega0,
            time_grid: self.time_grid(),
            slices: self.slices,
            probe: self
                .probes
                .get(&scheme)
                .copied()
                .unwrap_or(scheme.default_probe(self.scenario)),
            u_max: self.u_max,
            optimizer: self.optimizer.clone(),
            warm_start: self.warm_start,
            gamma_c: self.gamma_c,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NmrFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nmr: Option<NmrSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    optimizer: Option<OptimizerSection>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NmrSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    linewidth_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta_omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_over_t2_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probe: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

/// Parallel-dephasing protocol calibrated from a measured linewidth.
#[derive(Debug, Clone, PartialEq)]
pub struct NmrConfig {
    /// Γ, Hz
    pub linewidth_hz: f64,
    /// rad/s
    pub omega0: f64,
    pub slices: usize,
    /// Frequency shift of the fidelity estimator, rad/s.
    pub delta_omega: f64,
    /// Encoding times run from T₂·max/points to T₂·max in `points` steps.
    pub t_over_t2_max: f64,
    pub points: usize,
    pub u_max: f64,
    /// Probe of the control-enhanced run.
    pub probe: Probe,
    pub gamma_c: f64,
    pub optimizer: OptimizerOptions,
    pub seed: u64,
}

impl Default for NmrConfig {
    fn default() -> Self {
        Self::parse("").expect("default config resolves")
    }
}

impl NmrConfig {
    pub fn parse(text: &str) -> CResult<Self> {
        let file: NmrFile = toml::from_str(text)?;
        let s = file.nmr.unwrap_or_default();
        let linewidth_hz = s.linewidth_hz.unwrap_or(2.13);
        if !(linewidth_hz > 0.0) || !linewidth_hz.is_finite() {
            return Err(ConfigError::new("nmr.linewidth_hz must be positive"));
        }
        let omega0 = s.omega0.unwrap_or(120.0 * PI);
        let slices = s.slices.unwrap_or(5);
        let delta_omega = s.delta_omega.unwrap_or(2.0 * PI);
        let t_over_t2_max = s.t_over_t2_max.unwrap_or(2.5);
        let points = s.points.unwrap_or(10);
        let u_max = s.u_max.unwrap_or(20.0 * omega0.abs());
        let gamma_c = s.gamma_c.unwrap_or(1.0);
        let seed = s.seed.unwrap_or(0);
        check_seed(seed)?;
        if !omega0.is_finite() || slices == 0 || points == 0 {
            return Err(ConfigError::new(
                "nmr: omega0 must be finite, slices and points ≥ 1",
            ));
        }
        if !(delta_omega > 0.0) || !(t_over_t2_max > 0.0) || !(u_max > 0.0) || !(gamma_c > 0.0) {
            return Err(ConfigError::new(
                "nmr: delta_omega, t_over_t2_max, u_max and gamma_c must be positive",
            ));
        }
        let probe = match s.probe {
            Some(name) => parse_name(&name)?,
            None => Probe::RandomSeeded,
        };
        if probe == Probe::BellWithAncilla {
            return Err(ConfigError::new("nmr: bell_with_ancilla needs an ancilla"));
        }
        let base = OptimizerOptions {
            restarts: SchemeConfig::DEFAULT_RESTARTS,
            ..OptimizerOptions::for_amplitude_bound(u_max)
        };
        let n_vars = slices * controls_per_model(Scenario::ParallelDephasing1q);
        let optimizer = file.optimizer.unwrap_or_default().resolve(base, n_vars)?;
        Ok(Self {
            linewidth_hz,
            omega0,
            slices,
            delta_omega,
            t_over_t2_max,
            points,
            u_max,
            probe,
            gamma_c,
            optimizer,
            seed,
        })
    }

    pub fn to_toml(&self) -> CResult<String> {
        check_seed(self.seed)?;
        let file = NmrFile {
            nmr: Some(NmrSection {
                linewidth_hz: Some(self.linewidth_hz),
                omega0: Some(self.omega0),
                slices: Some(self.slices),
                delta_omega: Some(self.delta_omega),
                t_over_t2_max: Some(self.t_over_t2_max),
                points: Some(self.points),
                u_max: Some(self.u_max),
                probe: Some(self.probe.name().to_owned()),
                gamma_c: Some(self.gamma_c),
                seed: Some(self.seed),
            }),
            optimizer: Some(OptimizerSection::from_options(&self.optimizer)),
        };
        toml::to_string(&file).map_err(|e| ConfigError::new(e.to_string()))
    }
}
