//! Experiment orchestration behind the `qmetro` command line.

pub mod config;
pub mod output;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

pub use config::{ConfigError, NmrConfig, RunConfig, Spacing, TimeGrid};
pub use output::{NmrRow, ResultRow};

use crate::channels::{NoiseSpec, Scenario};
use crate::error::Error;
use crate::linalg::CVector;
use crate::metrology::qfi_fidelity;
use crate::propagation::Propagator;
use crate::schemes::{self, linear_grid, MetrologyResult, Probe, SchemeConfig, SchemeKind};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl HarnessError {
    pub const EXIT_CONFIG: i32 = 2;
    pub const EXIT_NUMERICAL: i32 = 3;
    pub const EXIT_IO: i32 = 1;

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => Self::EXIT_CONFIG,
            HarnessError::Core(Error::Numerical { .. } | Error::Optimizer(_)) => {
                Self::EXIT_NUMERICAL
            }
            HarnessError::Core(_) => Self::EXIT_CONFIG,
            HarnessError::Io { .. } => Self::EXIT_IO,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.to_owned(),
            source,
        }
    }
}

pub type HResult<T> = std::result::Result<T, HarnessError>;

/// Read a config, or the config block embedded in a result file.
pub fn read_config_text(path: &Path) -> HResult<String> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(output::embedded_config(&text))
}

/// Every configured scheme over the time grid, grouped by scheme in config
/// order and by increasing T within a scheme.
pub fn run_experiment(config: &RunConfig) -> HResult<Vec<MetrologyResult>> {
    let mut all = Vec::new();
    for &scheme in &config.schemes {
        let sc = config.scheme_config(scheme);
        log::info!(
            "{}: {} on {} time points (K = {})",
            config.scenario,
            scheme,
            sc.time_grid.len(),
            sc.slices
        );
        all.extend(schemes::run(&sc)?);
    }
    Ok(all)
}

/// Run `config` and write the CSV to `out` (stdout when `None`), plus plot
/// data files next to it when `plot_data` is set.
pub fn run_to_file(
    config: &RunConfig,
    out: Option<&Path>,
    plot_data: bool,
) -> HResult<Vec<MetrologyResult>> {
    let echo = config.to_toml()?;
    let results = run_experiment(config)?;
    match out {
        Some(path) => {
            let mut buf = Vec::new();
            output::write_results(&mut buf, &echo, &results)
                .map_err(|e| HarnessError::io(path, e))?;
            fs::write(path, buf).map_err(|e| HarnessError::io(path, e))?;
            if plot_data {
                output::write_plot_data(path, &results).map_err(|e| HarnessError::io(path, e))?;
            }
        }
        None => {
            if plot_data {
                return Err(ConfigError("plot data needs an output path".into()).into());
            }
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            output::write_results(&mut lock, &echo, &results)
                .and_then(|_| lock.flush())
                .map_err(|e| HarnessError::io(Path::new("<stdout>"), e))?;
        }
    }
    Ok(results)
}

/// T₂ = 1/(πΓ) for a Lorentzian linewidth Γ in Hz.
pub fn t2_from_linewidth(linewidth_hz: f64) -> crate::Result<f64> {
    if !(linewidth_hz > 0.0) || !linewidth_hz.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "linewidth must be positive, got {linewidth_hz}"
        )));
    }
    Ok(1.0 / (std::f64::consts::PI * linewidth_hz))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmrOutput {
    pub t2: f64,
    /// Probe of the control-enhanced run.
    pub probe: CVector,
    /// Standard rows, then control-enhanced rows.
    pub rows: Vec<NmrRow>,
}

impl NmrOutput {
    /// Free-form comment lines recorded in the result file.
    pub fn comments(&self) -> Vec<String> {
        let amps: Vec<String> = self
            .probe
            .iter()
            .map(|z| format!("{}{:+}i", output::fmt_float(z.re), output::fmt_float(z.im)))
            .collect();
        vec![
            format!("t2_s = {}", output::fmt_float(self.t2)),
            format!("control_enhanced probe amplitudes = [{}]", amps.join(", ")),
        ]
    }
}

fn nmr_scheme_config(
    cfg: &NmrConfig,
    scheme: SchemeKind,
    grid: Vec<f64>,
    gamma: f64,
) -> SchemeConfig {
    let base = SchemeConfig::new(scheme, Scenario::ParallelDephasing1q);
    SchemeConfig {
        noise: NoiseSpec::ParallelDephasing { gamma },
        omega0: cfg.omega0,
        time_grid: grid,
        slices: cfg.slices,
        probe: match scheme {
            SchemeKind::ControlEnhanced => cfg.probe,
            _ => base.probe,
        },
        u_max: cfg.u_max,
        optimizer: cfg.optimizer.clone(),
        gamma_c: cfg.gamma_c,
        seed: cfg.seed,
        ..base
    }
}

/// Standard and control-enhanced schemes under parallel dephasing with
/// γ = 1/T₂, reporting both the spectral and the fidelity QFI.
pub fn run_nmr_protocol(cfg: &NmrConfig) -> HResult<NmrOutput> {
    let t2 = t2_from_linewidth(cfg.linewidth_hz)?;
    let gamma = 1.0 / t2;
    let t_max = cfg.t_over_t2_max * t2;
    let grid = linear_grid(t_max / cfg.points as f64, t_max, cfg.points);
    let mut rows = Vec::new();
    let mut probe = None;
    for scheme in [SchemeKind::Standard, SchemeKind::ControlEnhanced] {
        let sc = nmr_scheme_config(cfg, scheme, grid.clone(), gamma);
        let (model, rho0) = schemes::scheme_setup(&sc)?;
        if scheme == SchemeKind::ControlEnhanced {
            probe = Some(sc.probe.vector(model.n_qubits(), sc.seed)?);
        }
        let propagator = Propagator::new(&model)?;
        for r in schemes::run(&sc)? {
            let exact = propagator
                .evolve(&r.schedule, &rho0)
                .map_err(|e| e.at_time(r.t))?;
            let shifted = propagator
                .evolve_at(cfg.omega0 + cfg.delta_omega, &r.schedule, &rho0)
                .map_err(|e| e.at_time(r.t))?;
            let fid =
                qfi_fidelity(&exact, &shifted, cfg.delta_omega).map_err(|e| e.at_time(r.t))?;
            rows.push(NmrRow {
                scheme,
                t: r.t,
                t_over_t2: r.t / t2,
                qfi_theo: r.qfi,
                qfi_fidelity: fid.value,
                sensitivity: r.sensitivity,
                evaluations: r.evaluations,
                seed: r.seed,
                converged: r.converged,
                t2,
            });
        }
    }
    Ok(NmrOutput {
        t2,
        probe: probe.unwrap_or_else(|| Probe::Plus.vector(1, 0).expect("|+⟩ is valid")),
        rows,
    })
}

pub fn nmr_to_file(cfg: &NmrConfig, out: Option<&Path>) -> HResult<NmrOutput> {
    let echo = cfg.to_toml()?;
    let result = run_nmr_protocol(cfg)?;
    let comments = result.comments();
    match out {
        Some(path) => {
            let mut buf = Vec::new();
            output::write_nmr(&mut buf, &echo, &comments, &result.rows)
                .map_err(|e| HarnessError::io(path, e))?;
            fs::write(path, buf).map_err(|e| HarnessError::io(path, e))?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            output::write_nmr(&mut lock, &echo, &comments, &result.rows)
                .and_then(|_| lock.flush())
                .map_err(|e| HarnessError::io(Path::new("<stdout>"), e))?;
        }
    }
    Ok(result)
}
