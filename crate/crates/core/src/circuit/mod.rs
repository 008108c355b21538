//! Truncated Fock-space emulation of the modulated qubit–resonator circuit.
//!
//! Angular frequencies are in rad/ns and times in ns. The joint state is
//! indexed `q·(n_max+1) + n` with `q = 0 ↔ |e⟩` and `q = 1 ↔ |g⟩`.

mod frame;
mod hamiltonian;
mod integrate;
mod optimize;
mod params;
mod state;

pub use frame::{dirac_frame, dirac_frame_rate, frame_correction, FrameAngles};
pub use hamiltonian::{
    effective_hamiltonian, interaction_hamiltonian, qubit_ops, FullHamiltonian, Hamiltonian, StaticHamiltonian,
};
pub use integrate::{integrate, integrate_vector, IntegratorOptions, Trajectory, TruncationWarning};
pub use optimize::{
    effective_pe_trace, full_pe_trace, optimize_phases, PhaseOptimum, PhaseSearchGrid, StaticPropagator,
};
pub use params::{effective_params, CircuitParams, EffectiveParams, ValidityDiagnostics, VALIDITY_WARNING_RATIO};
pub use state::{prepare_initial, QubitResonatorState, QubitRotation, RotationAxis};

use crate::dirac::DiracError;

/// Population at the top Fock level above which a state counts as truncated.
pub const TAIL_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("step-size controller failed at t = {t} ns (step {step:e} ns)")]
    StepFailure { t: f64, step: f64 },
    #[error("population {tail:e} in the top Fock level exceeds {TAIL_LIMIT:e}")]
    TruncationError { tail: f64 },
    #[error(transparent)]
    Dirac(#[from] DiracError),
}
