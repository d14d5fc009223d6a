//! Liouville-space representation of states and Lindblad generators.
//!
//! States are column-stacked: ρ_ij sits at index `j·d + i`, i.e. the row index
//! varies fastest. Under that convention the two-sided product UρV maps to
//! (Vᵀ ⊗ U)|ρ⟩⟩ and every superoperator below follows from that one rule.

use crate::error::{Error, Result};
use crate::linalg::{self, c, hermiticity_error, identity, kron, CMatrix, CVector, I};
use num_complex::Complex64;

/// Default tolerances for a freshly constructed state.
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Tolerances accepted for states produced by propagation.
pub const PROPAGATED_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite d×d matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

/// Column-stacked density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedState(pub CVector);

impl DensityMatrix {
    /// Validate with the strict construction tolerances.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, HERMITICITY_TOL, TRACE_TOL, POSITIVITY_TOL)
    }

    pub fn with_tolerance(
        matrix: CMatrix,
        hermiticity_tol: f64,
        trace_tol: f64,
        positivity_tol: f64,
    ) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidState("empty matrix".into()));
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let herm = hermiticity_error(&matrix);
        if herm > hermiticity_tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian: max|ρ − ρ†| = {herm:.3e}"
            )));
        }
        let tr = linalg::trace(&matrix);
        if (tr - c(1.0)).norm() > trace_tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = linalg::min_eigenvalue(&matrix);
        if min_eig < -positivity_tol {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) nonzero state vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState(
                "zero or non-finite state vector".into(),
            ));
        }
        let psi = psi / c(norm);
        Self::new(linalg::projector(&psi))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: identity(dim) * c(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace_error(&self) -> f64 {
        (linalg::trace(&self.matrix) - c(1.0)).norm()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.matrix)
    }

    /// Bloch vector (⟨σx⟩, ⟨σy⟩, ⟨σz⟩) of a qubit state.
    pub fn bloch_vector(&self) -> Option<[f64; 3]> {
        if self.dim() != 2 {
            return None;
        }
        let m = &self.matrix;
        Some([
            2.0 * m[(0, 1)].re,
            -2.0 * m[(0, 1)].im,
            (m[(0, 0)] - m[(1, 1)]).re,
        ])
    }

    /// Trace out the second factor of a (d_a·d_b)-dimensional state.
    pub fn partial_trace_second(&self, dim_a: usize) -> Result<DensityMatrix> {
        let d = self.dim();
        if dim_a == 0 || !d.is_multiple_of(dim_a) {
            return Err(Error::DimensionMismatch {
                context: "partial trace",
                expected: dim_a,
                found: d,
            });
        }
        let dim_b = d / dim_a;
        let mut out = CMatrix::zeros(dim_a, dim_a);
        for i in 0..dim_a {
            for j in 0..dim_a {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim_b {
                    acc += self.matrix[(i * dim_b + k, j * dim_b + k)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix { matrix: out })
    }
}

impl VectorizedState {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Column-stack ρ.
pub fn vectorize(rho: &DensityMatrix) -> VectorizedState {
    VectorizedState(vectorize_matrix(rho.matrix()))
}

pub fn vectorize_matrix(m: &CMatrix) -> CVector {
    // nalgebra stores matrices column-major, which is exactly the stacking order
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize_matrix`]; panics if the length is not a perfect square.
pub fn unvectorize_matrix(v: &CVector) -> CMatrix {
    let d = (v.len() as f64).sqrt().round() as usize;
    assert_eq!(d * d, v.len(), "vector length {} is not a square", v.len());
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Back to a density matrix, checking the state invariants.
pub fn unvectorize(v: &VectorizedState) -> Result<DensityMatrix> {
    DensityMatrix::new(unvectorize_matrix(&v.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperopKind {
    Hamiltonian,
    Dissipator,
    Lindbladian,
    Propagator,
    Sandwich,
}

/// d²×d² matrix acting on column-stacked states.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    pub matrix: CMatrix,
    pub kind: SuperopKind,
}

impl Superoperator {
    pub fn new(matrix: CMatrix, kind: SuperopKind) -> Self {
        Self { matrix, kind }
    }

    /// Hilbert-space dimension d.
    pub fn hilbert_dim(&self) -> usize {
        (self.matrix.nrows() as f64).sqrt().round() as usize
    }

    pub fn apply(&self, v: &VectorizedState) -> VectorizedState {
        VectorizedState(&self.matrix * &v.0)
    }

    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        unvectorize_matrix(&(&self.matrix * vectorize_matrix(m)))
    }

    /// max |(⟨⟨I| S)_k|: zero for trace-annihilating generators.
    pub fn trace_leak(&self) -> f64 {
        let d = self.hilbert_dim();
        let row = vectorize_matrix(&identity(d)).transpose() * &self.matrix;
        row.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }
}

/// Lindblad operators L_v with rates γ_v.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseChannel {
    ops: Vec<CMatrix>,
    rates: Vec<f64>,
}

impl NoiseChannel {
    pub fn new(ops: Vec<CMatrix>, rates: Vec<f64>) -> Result<Self> {
        if ops.len() != rates.len() {
            return Err(Error::DimensionMismatch {
                context: "noise channel operators vs rates",
                expected: ops.len(),
                found: rates.len(),
            });
        }
        if let Some(&rate) = rates.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
            return Err(Error::NegativeRate {
                channel: "lindblad",
                rate,
            });
        }
        if let Some(first) = ops.first() {
            let d = first.nrows();
            for op in &ops {
                if op.nrows() != op.ncols() {
                    return Err(Error::NotSquare {
                        rows: op.nrows(),
                        cols: op.ncols(),
                    });
                }
                if op.nrows() != d {
                    return Err(Error::DimensionMismatch {
                        context: "lindblad operator",
                        expected: d,
                        found: op.nrows(),
                    });
                }
            }
        }
        Ok(Self { ops, rates })
    }

    pub fn empty() -> Self {
        Self {
            ops: Vec::new(),
            rates: Vec::new(),
        }
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Hilbert dimension, if any operator is present.
    pub fn dim(&self) -> Option<usize> {
        self.ops.first().map(|op| op.nrows())
    }

    /// Apply `f` to every Lindblad operator, keeping the rates.
    pub fn map_ops(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self {
            ops: self.ops.iter().map(f).collect(),
            rates: self.rates.clone(),
        }
    }

    /// Σ_v γ_v (L ρ L† − ½{L†L, ρ}) evaluated by dense products.
    pub fn apply_dissipator(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        for (op, &rate) in self.ops.iter().zip(&self.rates) {
            let op_dag = op.adjoint();
            let jump = op * rho * &op_dag;
            let ldl = &op_dag * op;
            out += (jump - linalg::anticommutator(&ldl, rho) * c(0.5)) * c(rate);
        }
        out
    }
}

fn require_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Vᵀ ⊗ U, the Liouville form of ρ ↦ UρV.
pub fn sandwich_superop(u: &CMatrix, v: &CMatrix) -> Result<Superoperator> {
    let du = require_square(u)?;
    let dv = require_square(v)?;
    if du != dv {
        return Err(Error::DimensionMismatch {
            context: "sandwich operands",
            expected: du,
            found: dv,
        });
    }
    Ok(Superoperator::new(
        kron(&v.transpose(), u),
        SuperopKind::Sandwich,
    ))
}

/// Ĥ× = I ⊗ H − H* ⊗ I, so that −iĤ×|ρ⟩⟩ = |−i[H, ρ]⟩⟩.
pub fn hamiltonian_superop(h: &CMatrix) -> Result<Superoperator> {
    let d = require_square(h)?;
    let eye = identity(d);
    let m = kron(&eye, h) - kron(&h.map(|z| z.conj()), &eye);
    Ok(Superoperator::new(m, SuperopKind::Hamiltonian))
}

/// Γ̂ = Σ_v γ_v (L* ⊗ L − ½ I ⊗ L†L − ½ (L†L)ᵀ ⊗ I).
///
/// The rate multiplies the whole bracket once, matching the master equation
/// the channel presets are written for.
pub fn dissipator_superop(channel: &NoiseChannel) -> Superoperator {
    let d = channel.dim().unwrap_or(0);
    let mut m = CMatrix::zeros(d * d, d * d);
    let eye = identity(d);
    for (op, &rate) in channel.ops.iter().zip(&channel.rates) {
        if rate == 0.0 {
            continue;
        }
        let ldl = op.adjoint() * op;
        let term = kron(&op.map(|z| z.conj()), op)
            - kron(&eye, &ldl) * c(0.5)
            - kron(&ldl.transpose(), &eye) * c(0.5);
        m += term * c(rate);
    }
    Superoperator::new(m, SuperopKind::Dissipator)
}

/// L̂ = −iĤ× + Γ̂.
pub fn lindbladian(h: &CMatrix, channel: &NoiseChannel) -> Result<Superoperator> {
    let d = require_square(h)?;
    if let Some(dc) = channel.dim() {
        if dc != d {
            return Err(Error::DimensionMismatch {
                context: "hamiltonian vs noise channel",
                expected: d,
                found: dc,
            });
        }
    }
    let mut m = hamiltonian_superop(h)?.matrix * (-I);
    if !channel.is_empty() {
        m += dissipator_superop(channel).matrix;
    }
    Ok(Superoperator::new(m, SuperopKind::Lindbladian))
}

/// Right-hand side of the master equation evaluated directly, without
/// vectorization: −i[H, ρ] + Σ_v γ_v (L ρ L† − ½{L†L, ρ}).
pub fn lindblad_rhs(h: &CMatrix, channel: &NoiseChannel, rho: &CMatrix) -> CMatrix {
    linalg::commutator(h, rho) * (-I) + channel.apply_dissipator(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, sigma_minus, sigma_x, sigma_z};

    fn plus_state() -> DensityMatrix {
        DensityMatrix::new(CMatrix::from_element(2, 2, c(0.5))).unwrap()
    }

    #[test]
    fn vectorize_stacks_columns() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        let v = vectorize_matrix(&m);
        let got: Vec<f64> = v.iter().map(|z| z.re).collect();
        assert_eq!(got, vec![1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn vectorize_known_states() {
        let mixed = vectorize(&DensityMatrix::maximally_mixed(2));
        let got: Vec<f64> = mixed.0.iter().map(|z| z.re).collect();
        assert_eq!(got, vec![0.5, 0.0, 0.0, 0.5]);
        let plus = vectorize(&plus_state());
        assert!(plus.0.iter().all(|z| *z == c(0.5)));
    }

    #[test]
    fn identity_sandwich_is_identity() {
        let s = sandwich_superop(&identity(2), &identity(2)).unwrap();
        assert_eq!(s.matrix, identity(4));
    }

    #[test]
    fn sandwich_flips_ket() {
        let ground = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let s = sandwich_superop(&sigma_x(), &identity(2)).unwrap();
        let out = s.apply_matrix(&ground);
        // |1⟩⟨0|
        let expected = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)]);
        assert_eq!(out, expected);
    }

    #[test]
    fn sandwich_rejects_mismatched_operands() {
        assert!(matches!(
            sandwich_superop(&identity(2), &identity(4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_hamiltonian_and_empty_channel_give_zero_generator() {
        let l = lindbladian(&CMatrix::zeros(2, 2), &NoiseChannel::empty()).unwrap();
        assert_eq!(l.matrix, CMatrix::zeros(4, 4));
        let muted = NoiseChannel::new(vec![sigma_z()], vec![0.0]).unwrap();
        assert_eq!(dissipator_superop(&muted).matrix, CMatrix::zeros(4, 4));
    }

    #[test]
    fn hamiltonian_superop_rejects_non_square() {
        assert!(matches!(
            hamiltonian_superop(&CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn dephasing_dissipator_on_plus_state() {
        let gamma = 3.0;
        let ch = NoiseChannel::new(
            vec![sigma_z() * c(std::f64::consts::FRAC_1_SQRT_2)],
            vec![gamma],
        )
        .unwrap();
        let out = dissipator_superop(&ch).apply_matrix(plus_state().matrix());
        // γ/2 (σz ρ σz − ρ) = −γ/2 on the off-diagonals, zero on the diagonal
        let expected =
            CMatrix::from_row_slice(2, 2, &[c(0.0), c(-gamma / 2.0), c(-gamma / 2.0), c(0.0)]);
        assert!(max_abs(&(out - expected)) < 1e-14);
    }

    #[test]
    fn amplitude_damping_dissipator_on_excited_state() {
        let gamma = 0.7;
        let ch = NoiseChannel::new(vec![sigma_minus()], vec![gamma]).unwrap();
        let one = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
        let out = dissipator_superop(&ch).apply_matrix(&one);
        let expected = CMatrix::from_row_slice(2, 2, &[c(gamma), c(0.0), c(0.0), c(-gamma)]);
        assert!(max_abs(&(out - expected)) < 1e-15);
    }

    #[test]
    fn lindbladian_annihilates_trace() {
        let h = sigma_z() * c(std::f64::consts::PI);
        let ch = NoiseChannel::new(
            vec![sigma_z() * c(std::f64::consts::FRAC_1_SQRT_2)],
            vec![10.0],
        )
        .unwrap();
        let l = lindbladian(&h, &ch).unwrap();
        assert!(l.trace_leak() < 1e-10);
    }

    #[test]
    fn channel_rejects_negative_rates_and_length_mismatch() {
        assert!(matches!(
            NoiseChannel::new(vec![sigma_z()], vec![-1.0]),
            Err(Error::NegativeRate { .. })
        ));
        assert!(matches!(
            NoiseChannel::new(vec![sigma_z()], vec![]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn density_matrix_validation() {
        let not_unit = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(not_unit).is_err());
        let negative = CMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(DensityMatrix::new(negative).is_err());
        let non_herm = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(DensityMatrix::new(non_herm).is_err());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let plus = plus_state();
        let zero = DensityMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0), c(0.0), c(0.0), c(0.0)],
        ))
        .unwrap();
        let joint = DensityMatrix::new(kron(plus.matrix(), zero.matrix())).unwrap();
        let reduced = joint.partial_trace_second(2).unwrap();
        assert!(max_abs(&(reduced.matrix() - plus.matrix())) < 1e-15);
    }
}
