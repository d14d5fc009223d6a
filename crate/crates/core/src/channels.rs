//! Noise channels, encoding Hamiltonians and the scenario presets.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{
    c, hermiticity_error, identity, kron, on_qubit, sigma_minus, sigma_plus, sigma_x, sigma_y,
    sigma_z, CMatrix,
};
use crate::liouville::NoiseChannel;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn check_rate(channel: &'static str, rate: f64) -> Result<()> {
    if rate >= 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeRate { channel, rate })
    }
}

/// L = σz/√2 at rate γ: dρ/dt ⊃ γ/2 (σz ρ σz − ρ). Coherences decay as e^{−γt}.
pub fn parallel_dephasing(gamma: f64) -> Result<NoiseChannel> {
    check_rate("parallel dephasing", gamma)?;
    NoiseChannel::new(vec![sigma_z() * c(FRAC_1_SQRT_2)], vec![gamma])
}

/// Independent σz/√2 dephasing on each of two qubits.
pub fn two_qubit_uncorrelated_dephasing(gamma1: f64, gamma2: f64) -> Result<NoiseChannel> {
    check_rate("two-qubit dephasing", gamma1)?;
    check_rate("two-qubit dephasing", gamma2)?;
    let l = sigma_z() * c(FRAC_1_SQRT_2);
    NoiseChannel::new(
        vec![on_qubit(&l, 0, 2), on_qubit(&l, 1, 2)],
        vec![gamma1, gamma2],
    )
}

/// L = σx/√2 at rate γ: dephasing perpendicular to the encoding axis.
pub fn transverse_dephasing(gamma: f64) -> Result<NoiseChannel> {
    check_rate("transverse dephasing", gamma)?;
    NoiseChannel::new(vec![sigma_x() * c(FRAC_1_SQRT_2)], vec![gamma])
}

/// Generalized amplitude damping: σ₋ = |0⟩⟨1| at γ₋ and σ₊ = |1⟩⟨0| at γ₊.
pub fn amplitude_damping(gamma_minus: f64, gamma_plus: f64) -> Result<NoiseChannel> {
    check_rate("amplitude damping", gamma_minus)?;
    check_rate("amplitude damping", gamma_plus)?;
    NoiseChannel::new(
        vec![sigma_minus(), sigma_plus()],
        vec![gamma_minus, gamma_plus],
    )
}

/// Σ_n ω₀ σz⁽ⁿ⁾ / 2 on an `n_qubits` register.
pub fn frequency_encoding(omega0: f64, n_qubits: usize) -> Result<CMatrix> {
    Ok(encoding_generator(n_qubits)? * c(omega0))
}

/// ∂H₀/∂ω₀ = Σ_n σz⁽ⁿ⁾ / 2.
fn encoding_generator(n_qubits: usize) -> Result<CMatrix> {
    if !(1..=2).contains(&n_qubits) {
        return Err(Error::Unsupported(format!(
            "{n_qubits}-qubit encoding (1 or 2 supported)"
        )));
    }
    let half_z = sigma_z() * c(0.5);
    let d = 1 << n_qubits;
    Ok((0..n_qubits).fold(CMatrix::zeros(d, d), |acc, q| {
        acc + on_qubit(&half_z, q, n_qubits)
    }))
}

/// Which control generators a scenario exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlSet {
    /// σx/2, σy/2 on every qubit, ordered (x₁, y₁, x₂, y₂, …).
    Transverse,
    /// σz/2 on every qubit.
    Longitudinal,
}

impl ControlSet {
    pub fn hamiltonians(self, n_qubits: usize) -> Vec<CMatrix> {
        let half = c(0.5);
        let locals: Vec<CMatrix> = match self {
            ControlSet::Transverse => vec![sigma_x() * half, sigma_y() * half],
            ControlSet::Longitudinal => vec![sigma_z() * half],
        };
        (0..n_qubits)
            .flat_map(|q| locals.iter().map(move |op| on_qubit(op, q, n_qubits)))
            .collect()
    }
}

/// H(t) = ω₀ G + Σ_l u_l(t) H_l with Markovian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingModel {
    n_qubits: usize,
    omega0: f64,
    /// G = ∂H₀/∂ω₀
    generator: CMatrix,
    control_hams: Vec<CMatrix>,
    channel: NoiseChannel,
    ancilla: bool,
}

impl EncodingModel {
    pub fn new(
        n_qubits: usize,
        omega0: f64,
        control_hams: Vec<CMatrix>,
        channel: NoiseChannel,
    ) -> Result<Self> {
        let generator = encoding_generator(n_qubits)?;
        if !omega0.is_finite() {
            return Err(Error::InvalidArgument(format!("omega0 = {omega0}")));
        }
        let d = generator.nrows();
        for h in &control_hams {
            if h.nrows() != d || h.ncols() != d {
                return Err(Error::DimensionMismatch {
                    context: "control hamiltonian",
                    expected: d,
                    found: h.nrows(),
                });
            }
            let err = hermiticity_error(h);
            if err > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "control hamiltonian not Hermitian (error {err:.2e})"
                )));
            }
        }
        if let Some(dc) = channel.dim() {
            if dc != d {
                return Err(Error::DimensionMismatch {
                    context: "noise channel",
                    expected: d,
                    found: dc,
                });
            }
        }
        Ok(Self {
            n_qubits,
            omega0,
            generator,
            control_hams,
            channel,
            ancilla: false,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    pub fn control_hams(&self) -> &[CMatrix] {
        &self.control_hams
    }

    pub fn n_controls(&self) -> usize {
        self.control_hams.len()
    }

    pub fn channel(&self) -> &NoiseChannel {
        &self.channel
    }

    pub fn has_ancilla(&self) -> bool {
        self.ancilla
    }

    /// Drift Hamiltonian H₀(ω₀).
    pub fn drift(&self) -> CMatrix {
        &self.generator * c(self.omega0)
    }

    /// Same model at a shifted frequency.
    pub fn with_omega0(&self, omega0: f64) -> Self {
        Self {
            omega0,
            ..self.clone()
        }
    }

    /// H[k] = H₀(ω₀) + Σ_l u_l H_l.
    pub fn hamiltonian(&self, amplitudes: &[f64]) -> CMatrix {
        self.control_hams
            .iter()
            .zip(amplitudes)
            .fold(self.drift(), |acc, (h, &u)| acc + h * c(u))
    }
}

/// Append a noiseless, drift-free ancilla as the second tensor factor.
pub fn ancilla_extend(model: &EncodingModel) -> Result<EncodingModel> {
    if model.ancilla {
        return Err(Error::Unsupported(
            "model already carries an ancilla".into(),
        ));
    }
    if model.n_qubits != 1 {
        return Err(Error::Unsupported(format!(
            "ancilla extension of a {}-qubit model",
            model.n_qubits
        )));
    }
    let eye = identity(2);
    let ext = |op: &CMatrix| kron(op, &eye);
    Ok(EncodingModel {
        n_qubits: 2,
        omega0: model.omega0,
        generator: ext(&model.generator),
        control_hams: model.control_hams.iter().map(ext).collect(),
        channel: model.channel.map_ops(ext),
        ancilla: true,
    })
}

/// Named scenario presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    ParallelDephasing1q,
    ParallelDephasing2q,
    TransverseDephasing,
    AmplitudeDamping,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::ParallelDephasing1q,
        Scenario::ParallelDephasing2q,
        Scenario::TransverseDephasing,
        Scenario::AmplitudeDamping,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ParallelDephasing1q => "parallel-dephasing-1q",
            Scenario::ParallelDephasing2q => "parallel-dephasing-2q",
            Scenario::TransverseDephasing => "transverse-dephasing",
            Scenario::AmplitudeDamping => "amplitude-damping",
        }
    }

    pub fn n_qubits(self) -> usize {
        match self {
            Scenario::ParallelDephasing2q => 2,
            _ => 1,
        }
    }

    pub fn controls(self) -> ControlSet {
        match self {
            Scenario::TransverseDephasing => ControlSet::Longitudinal,
            _ => ControlSet::Transverse,
        }
    }

    /// Rates used for the published simulations of each scenario.
    pub fn default_noise(self) -> NoiseSpec {
        match self {
            Scenario::ParallelDephasing1q => NoiseSpec::ParallelDephasing { gamma: 10.0 },
            Scenario::ParallelDephasing2q => NoiseSpec::UncorrelatedDephasing {
                gamma1: 10.0,
                gamma2: 10.0,
            },
            Scenario::TransverseDephasing => NoiseSpec::TransverseDephasing { gamma: 0.1 },
            Scenario::AmplitudeDamping => NoiseSpec::AmplitudeDamping {
                gamma_minus: 0.2,
                gamma_plus: 0.0,
            },
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.map(Scenario::name).join(", ")
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown scenario '{s}' (valid: {})",
                    Scenario::valid_names()
                ))
            })
    }
}

/// Noise parameters of a scenario, in s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    ParallelDephasing { gamma: f64 },
    UncorrelatedDephasing { gamma1: f64, gamma2: f64 },
    TransverseDephasing { gamma: f64 },
    AmplitudeDamping { gamma_minus: f64, gamma_plus: f64 },
}

impl NoiseSpec {
    pub fn channel(&self) -> Result<NoiseChannel> {
        match *self {
            NoiseSpec::ParallelDephasing { gamma } => parallel_dephasing(gamma),
            NoiseSpec::UncorrelatedDephasing { gamma1, gamma2 } => {
                two_qubit_uncorrelated_dephasing(gamma1, gamma2)
            }
            NoiseSpec::TransverseDephasing { gamma } => transverse_dephasing(gamma),
            NoiseSpec::AmplitudeDamping {
                gamma_minus,
                gamma_plus,
            } => amplitude_damping(gamma_minus, gamma_plus),
        }
    }

    /// Characteristic decay rate used to scale default time grids.
    pub fn reference_rate(&self) -> f64 {
        match *self {
            NoiseSpec::ParallelDephasing { gamma } | NoiseSpec::TransverseDephasing { gamma } => {
                gamma
            }
            NoiseSpec::UncorrelatedDephasing { gamma1, gamma2 } => gamma1.max(gamma2),
            NoiseSpec::AmplitudeDamping {
                gamma_minus,
                gamma_plus,
            } => gamma_minus + gamma_plus,
        }
    }
}

/// Build the encoding model of a scenario.
pub fn scenario_model(scenario: Scenario, noise: &NoiseSpec, omega0: f64) -> Result<EncodingModel> {
    let expected_qubits = match noise {
        NoiseSpec::UncorrelatedDephasing { .. } => 2,
        _ => 1,
    };
    let matches = matches!(
        (scenario, noise),
        (
            Scenario::ParallelDephasing1q,
            NoiseSpec::ParallelDephasing { .. }
        ) | (
            Scenario::ParallelDephasing2q,
            NoiseSpec::UncorrelatedDephasing { .. }
        ) | (
            Scenario::TransverseDephasing,
            NoiseSpec::TransverseDephasing { .. }
        ) | (
            Scenario::AmplitudeDamping,
            NoiseSpec::AmplitudeDamping { .. }
        )
    );
    if !matches || expected_qubits != scenario.n_qubits() {
        return Err(Error::InvalidArgument(format!(
            "noise parameters {noise:?} do not belong to scenario {scenario}"
        )));
    }
    let n = scenario.n_qubits();
    EncodingModel::new(
        n,
        omega0,
        scenario.controls().hamiltonians(n),
        noise.channel()?,
    )
}
