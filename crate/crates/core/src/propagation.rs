//! Piecewise-constant controlled evolution.
//!
//! The encoding time T is cut into K slices of width Δt = T/K. In slice k the
//! Hamiltonian is H[k] = H₀(ω₀) + Σ_l u_l[k] H_l and the state advances by
//! exp(L̂[k] Δt). Slices are applied in order k = 0..K.

use crate::channels::EncodingModel;
use crate::error::{Error, Result};
use crate::expm::expm;
use crate::linalg::{c, CMatrix, CVector, I};
use crate::liouville::{
    dissipator_superop, hamiltonian_superop, unvectorize_matrix, vectorize_matrix, DensityMatrix,
    SuperopKind, Superoperator, PROPAGATED_TOL,
};

/// K×L grid of control amplitudes (rad/s) over a total time T (s).
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    slices: usize,
    fields: usize,
    /// Row-major: amplitude of field l in slice k at `k * fields + l`.
    amplitudes: Vec<f64>,
    total_time: f64,
    bound: Option<f64>,
}

impl ControlSchedule {
    pub fn new(
        slices: usize,
        fields: usize,
        amplitudes: Vec<f64>,
        total_time: f64,
    ) -> Result<Self> {
        if slices == 0 {
            return Err(Error::InvalidArgument(
                "schedule needs at least one slice".into(),
            ));
        }
        if !(total_time > 0.0) || !total_time.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "total time must be positive, got {total_time}"
            )));
        }
        if amplitudes.len() != slices * fields {
            return Err(Error::DimensionMismatch {
                context: "schedule amplitudes",
                expected: slices * fields,
                found: amplitudes.len(),
            });
        }
        if let Some(bad) = amplitudes.iter().find(|u| !u.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite amplitude {bad}"
            )));
        }
        Ok(Self {
            slices,
            fields,
            amplitudes,
            total_time,
            bound: None,
        })
    }

    pub fn zeros(slices: usize, fields: usize, total_time: f64) -> Result<Self> {
        Self::new(slices, fields, vec![0.0; slices * fields], total_time)
    }

    /// The same amplitudes `per_slice` in every slice.
    pub fn constant(slices: usize, per_slice: &[f64], total_time: f64) -> Result<Self> {
        let amplitudes = per_slice
            .iter()
            .copied()
            .cycle()
            .take(slices * per_slice.len())
            .collect();
        Self::new(slices, per_slice.len(), amplitudes, total_time)
    }

    /// Require |u_l[k]| ≤ `u_max` for every entry.
    pub fn with_bound(mut self, u_max: f64) -> Result<Self> {
        if !(u_max >= 0.0) {
            return Err(Error::InvalidArgument(format!("amplitude bound {u_max}")));
        }
        if let Some(u) = self.amplitudes.iter().find(|u| u.abs() > u_max) {
            return Err(Error::InvalidArgument(format!(
                "amplitude {u} exceeds bound {u_max}"
            )));
        }
        self.bound = Some(u_max);
        Ok(self)
    }

    pub fn slices(&self) -> usize {
        self.slices
    }

    pub fn fields(&self) -> usize {
        self.fields
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.slices as f64
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Amplitudes of all fields in slice `k` (0-based).
    pub fn slice(&self, k: usize) -> &[f64] {
        &self.amplitudes[k * self.fields..(k + 1) * self.fields]
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.iter().all(|&u| u == 0.0)
    }

    /// Split after `k` slices into two schedules with the same Δt.
    pub fn split_at(&self, k: usize) -> Result<(Self, Self)> {
        if k == 0 || k >= self.slices {
            return Err(Error::SliceOutOfRange {
                index: k,
                slices: self.slices,
            });
        }
        let dt = self.dt();
        let (a, b) = self.amplitudes.split_at(k * self.fields);
        Ok((
            Self::new(k, self.fields, a.to_vec(), dt * k as f64)?,
            Self::new(
                self.slices - k,
                self.fields,
                b.to_vec(),
                dt * (self.slices - k) as f64,
            )?,
        ))
    }
}

/// Precomputed Liouville pieces of an encoding model.
///
/// L̂[k] = Γ̂ + ω (−iĜ×) + Σ_l u_l[k] (−iĤ_l×), so a slice generator is a
/// linear combination of fixed matrices.
#[derive(Debug, Clone)]
pub struct Propagator {
    model: EncodingModel,
    dissipator: CMatrix,
    drift: CMatrix,
    controls: Vec<CMatrix>,
}

impl Propagator {
    pub fn new(model: &EncodingModel) -> Result<Self> {
        let minus_i =
            |h: &CMatrix| -> Result<CMatrix> { Ok(hamiltonian_superop(h)?.matrix * (-I)) };
        let d = model.dim();
        let dissipator = if model.channel().is_empty() {
            CMatrix::zeros(d * d, d * d)
        } else {
            dissipator_superop(model.channel()).matrix
        };
        Ok(Self {
            model: model.clone(),
            dissipator,
            drift: minus_i(model.generator())?,
            controls: model
                .control_hams()
                .iter()
                .map(minus_i)
                .collect::<Result<_>>()?,
        })
    }

    pub fn model(&self) -> &EncodingModel {
        &self.model
    }

    fn check_schedule(&self, schedule: &ControlSchedule) -> Result<()> {
        if schedule.fields() != self.controls.len() {
            return Err(Error::DimensionMismatch {
                context: "schedule fields vs control hamiltonians",
                expected: self.controls.len(),
                found: schedule.fields(),
            });
        }
        Ok(())
    }

    fn check_state(&self, rho0: &DensityMatrix) -> Result<()> {
        if rho0.dim() != self.model.dim() {
            return Err(Error::DimensionMismatch {
                context: "initial state",
                expected: self.model.dim(),
                found: rho0.dim(),
            });
        }
        Ok(())
    }

    /// L̂ for one slice at frequency `omega`.
    pub fn slice_generator(&self, omega: f64, amplitudes: &[f64]) -> CMatrix {
        let mut gen = &self.dissipator + &self.drift * c(omega);
        for (h, &u) in self.controls.iter().zip(amplitudes) {
            if u != 0.0 {
                gen += h * c(u);
            }
        }
        gen
    }

    /// exp(L̂[k] Δt) at frequency `omega`.
    pub fn slice_propagator_at(
        &self,
        omega: f64,
        schedule: &ControlSchedule,
        k: usize,
    ) -> Result<Superoperator> {
        self.check_schedule(schedule)?;
        if k >= schedule.slices() {
            return Err(Error::SliceOutOfRange {
                index: k,
                slices: schedule.slices(),
            });
        }
        let gen = self.slice_generator(omega, schedule.slice(k)) * c(schedule.dt());
        Ok(Superoperator::new(expm(&gen), SuperopKind::Propagator))
    }

    /// Raw propagation of a column-stacked state, no physicality checks.
    pub fn propagate_vector(
        &self,
        omega: f64,
        schedule: &ControlSchedule,
        v0: &CVector,
    ) -> CVector {
        let dt = c(schedule.dt());
        (0..schedule.slices()).fold(v0.clone(), |v, k| {
            expm(&(self.slice_generator(omega, schedule.slice(k)) * dt)) * v
        })
    }

    /// Final state at frequency `omega`, validated.
    pub fn evolve_at(
        &self,
        omega: f64,
        schedule: &ControlSchedule,
        rho0: &DensityMatrix,
    ) -> Result<DensityMatrix> {
        self.check_schedule(schedule)?;
        self.check_state(rho0)?;
        let v = self.propagate_vector(omega, schedule, &vectorize_matrix(rho0.matrix()));
        checked_state(unvectorize_matrix(&v))
    }

    pub fn evolve(
        &self,
        schedule: &ControlSchedule,
        rho0: &DensityMatrix,
    ) -> Result<DensityMatrix> {
        self.evolve_at(self.model.omega0(), schedule, rho0)
    }

    /// States after every slice, starting with ρ₀ (length K + 1).
    pub fn trajectory(
        &self,
        schedule: &ControlSchedule,
        rho0: &DensityMatrix,
    ) -> Result<Vec<DensityMatrix>> {
        self.check_schedule(schedule)?;
        self.check_state(rho0)?;
        let dt = c(schedule.dt());
        let omega = self.model.omega0();
        let mut out = Vec::with_capacity(schedule.slices() + 1);
        out.push(rho0.clone());
        let mut v = vectorize_matrix(rho0.matrix());
        for k in 0..schedule.slices() {
            v = expm(&(self.slice_generator(omega, schedule.slice(k)) * dt)) * v;
            out.push(checked_state(unvectorize_matrix(&v))?);
        }
        Ok(out)
    }
}

/// Accept a propagated matrix only if it is still a physical state.
fn checked_state(m: CMatrix) -> Result<DensityMatrix> {
    DensityMatrix::with_tolerance(m, PROPAGATED_TOL, PROPAGATED_TOL, PROPAGATED_TOL).map_err(|e| {
        Error::numerical(match e {
            Error::InvalidState(msg) => format!("propagated state is unphysical: {msg}"),
            other => other.to_string(),
        })
    })
}

/// exp(L̂[k]Δt) for slice `k` (0-based) of `schedule`.
pub fn slice_propagator(
    model: &EncodingModel,
    schedule: &ControlSchedule,
    k: usize,
) -> Result<Superoperator> {
    Propagator::new(model)?.slice_propagator_at(model.omega0(), schedule, k)
}

/// ρ(T) = Π_k exp(L̂[k]Δt) ρ₀.
pub fn evolve(
    model: &EncodingModel,
    schedule: &ControlSchedule,
    rho0: &DensityMatrix,
) -> Result<DensityMatrix> {
    Propagator::new(model)?.evolve(schedule, rho0)
}

pub fn evolve_trajectory(
    model: &EncodingModel,
    schedule: &ControlSchedule,
    rho0: &DensityMatrix,
) -> Result<Vec<DensityMatrix>> {
    Propagator::new(model)?.trajectory(schedule, rho0)
}
