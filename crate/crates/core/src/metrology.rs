//! Quantum Fisher information, fidelity and sensitivity.
//!
//! Two QFI estimators are provided. The spectral one sums
//! 2|⟨p|∂ρ|q⟩|²/(λ_p + λ_q) over eigenpairs of ρ with λ_p + λ_q above a
//! cutoff, where ∂ρ is a central finite difference in ω₀. The fidelity one
//! uses 8(1 − F(ρ_ω, ρ_{ω+δ}))/δ² with F the root Uhlmann fidelity.

use crate::channels::EncodingModel;
use crate::error::{Error, Result};
use crate::linalg::{self, c, hermitian_eigen, hermiticity_error, psd_sqrt, CMatrix};
use crate::liouville::DensityMatrix;
use crate::propagation::{ControlSchedule, Propagator};

/// λ_p + λ_q threshold in the spectral sum.
pub const SPECTRAL_CUTOFF: f64 = 1e-12;

/// Largest trace or Hermiticity drift tolerated in a finite-difference ∂ρ.
pub const DERIVATIVE_DRIFT_TOL: f64 = 1e-9;

/// Phase δω₀·T targeted by [`default_fidelity_step`].
pub const FIDELITY_PHASE_STEP: f64 = 1e-2;

/// Central-difference step for ∂ρ/∂ω₀.
pub fn default_derivative_step(omega0: f64) -> f64 {
    1e-4 * omega0.abs().max(1.0)
}

/// Frequency shift for the fidelity estimator at encoding time `t`.
///
/// Chosen so the accumulated phase difference δω₀·T stays at
/// [`FIDELITY_PHASE_STEP`]: large enough that 1 − F clears the eigen-solver
/// noise floor, small enough that the O(δ²) bias is far below a percent.
pub fn default_fidelity_step(omega0: f64, t: f64) -> f64 {
    (FIDELITY_PHASE_STEP / t).min(omega0.abs().max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfiMethod {
    Eigendecomposition,
    Fidelity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiEstimate {
    /// F_Q in s².
    pub value: f64,
    pub method: QfiMethod,
    /// Frequency step behind the estimate, when one was used.
    pub delta_omega: Option<f64>,
    pub spectral_cutoff: f64,
}

fn check_step(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {delta}"
        )))
    }
}

/// (ρ_{ω₀+δ} − ρ_{ω₀−δ}) / 2δ using a precomputed propagator.
pub fn drho_domega_with(
    propagator: &Propagator,
    schedule: &ControlSchedule,
    rho0: &DensityMatrix,
    delta: f64,
) -> Result<CMatrix> {
    check_step(delta)?;
    let omega0 = propagator.model().omega0();
    let up = propagator.evolve_at(omega0 + delta, schedule, rho0)?;
    let down = propagator.evolve_at(omega0 - delta, schedule, rho0)?;
    let d = (up.matrix() - down.matrix()) * c(0.5 / delta);
    let trace_drift = linalg::trace(&d).norm();
    let herm_drift = hermiticity_error(&d);
    if trace_drift > DERIVATIVE_DRIFT_TOL || herm_drift > DERIVATIVE_DRIFT_TOL {
        return Err(Error::numerical(format!(
            "finite-difference derivative lost precision (δ = {delta:e}, |Tr ∂ρ| = {trace_drift:.2e}, \
             hermiticity drift = {herm_drift:.2e})"
        )));
    }
    Ok(d)
}

/// ∂ρ(T)/∂ω₀ by central differences.
pub fn drho_domega(
    model: &EncodingModel,
    schedule: &ControlSchedule,
    rho0: &DensityMatrix,
    delta: f64,
) -> Result<CMatrix> {
    drho_domega_with(&Propagator::new(model)?, schedule, rho0, delta)
}

/// Spectral QFI: Σ_{λp+λq > cutoff} 2|⟨p|∂ρ|q⟩|² / (λp + λq).
pub fn qfi_eigen(rho: &DensityMatrix, drho: &CMatrix, cutoff: f64) -> QfiEstimate {
    let (lambda, vecs) = hermitian_eigen(rho.matrix());
    let projected = vecs.adjoint() * drho * &vecs;
    let n = lambda.len();
    let mut value = 0.0;
    for p in 0..n {
        for q in 0..n {
            let s = lambda[p] + lambda[q];
            if s > cutoff {
                value += 2.0 * projected[(p, q)].norm_sqr() / s;
            }
        }
    }
    QfiEstimate {
        value,
        method: QfiMethod::Eigendecomposition,
        delta_omega: None,
        spectral_cutoff: cutoff,
    }
}

/// Spectral QFI of the final state of `schedule`, with ∂ρ from central
/// differences of step `delta`.
pub fn qfi_of_schedule(
    propagator: &Propagator,
    schedule: &ControlSchedule,
    rho0: &DensityMatrix,
    delta: f64,
) -> Result<QfiEstimate> {
    let rho = propagator.evolve(schedule, rho0)?;
    let drho = drho_domega_with(propagator, schedule, rho0, delta)?;
    Ok(QfiEstimate {
        delta_omega: Some(delta),
        ..qfi_eigen(&rho, &drho, SPECTRAL_CUTOFF)
    })
}

/// Root fidelity Tr√(√ρ σ √ρ), clamped to [0, 1].
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            context: "fidelity operands",
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let (root, clamped) = psd_sqrt(rho.matrix());
    if clamped > 0.0 {
        log::debug!("fidelity: clamped eigenvalue {clamped:.2e} of ρ to zero");
    }
    let inner = &root * sigma.matrix() * &root;
    let (mu, _) = hermitian_eigen(&inner);
    let top = mu.iter().copied().fold(0.0_f64, f64::max);
    // eigenvalues at round-off level would otherwise contribute √ε ≈ 1e-8
    let floor = 4.0 * f64::EPSILON * top;
    let fidelity: f64 = mu.iter().filter(|&&m| m > floor).map(|m| m.sqrt()).sum();
    Ok(fidelity.clamp(0.0, 1.0))
}

/// 8(1 − F(ρ_ω, ρ_{ω+δ})) / δ².
pub fn qfi_fidelity(
    rho_exact: &DensityMatrix,
    rho_perturbed: &DensityMatrix,
    delta: f64,
) -> Result<QfiEstimate> {
    check_step(delta)?;
    let fidelity = uhlmann_fidelity(rho_exact, rho_perturbed)?;
    let value = 8.0 * (1.0 - fidelity) / (delta * delta);
    if value < -1e-6 {
        return Err(Error::numerical(format!(
            "fidelity QFI estimate is negative ({value:e})"
        )));
    }
    Ok(QfiEstimate {
        value: value.max(0.0),
        method: QfiMethod::Fidelity,
        delta_omega: Some(delta),
        spectral_cutoff: 0.0,
    })
}

/// υ = √T / (γ_c √F_Q). A vanishing QFI gives an infinite sensitivity.
pub fn sensitivity(qfi: f64, t: f64, gamma_c: f64) -> Result<f64> {
    if !(t > 0.0) || !(gamma_c > 0.0) || !(qfi >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sensitivity needs F_Q ≥ 0, T > 0, γ_c > 0 (got {qfi}, {t}, {gamma_c})"
        )));
    }
    if qfi == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(t.sqrt() / (gamma_c * qfi.sqrt()))
}
