//! Open-system quantum frequency estimation with time-dependent control.
//!
//! Dynamics are Lindblad master equations in column-stacked Liouville space.
//! Controls are piecewise-constant, the quantum Fisher information of the
//! final state is computed from its spectral decomposition, and the control
//! amplitudes are optimized with a multi-start Nelder–Mead search.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod expm;
pub mod harness;
pub mod linalg;
pub mod liouville;
pub mod metrology;
pub mod optimizer;
pub mod parallel;
pub mod propagation;
pub mod schemes;

pub use error::{Error, Result};
