//! Continuum 1+1D Dirac dynamics in the momentum representation.
//!
//! The Hamiltonian `H_D(p) = c σ_y p + m c² σ_z` is diagonal in momentum, so a
//! spinor wavefunction on a momentum grid evolves exactly by applying the
//! 2×2 propagator at every grid point. Pseudospin components are ordered
//! `(up, down) = (|e⟩, |g⟩)`, i.e. `σ_z|e⟩ = +|e⟩`.

mod dynamics;
mod observables;
mod state;

pub use dynamics::{
    eigensystem, evolve, hamiltonian, mixing_angle, positive_branch_state, propagator,
    Eigensystem,
};
pub use observables::{
    energy_expectation, entanglement_entropy, initial_velocity, mean_position_analytic,
    mean_position_numeric, reduced_pseudospin, MeanPositionTerms, PositionEstimate,
    PseudospinDensity,
};
pub use state::{spinor, DiracParams, MomentumGrid, Spinor, SpinorMomentumState};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiracError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("momentum grid too narrow: Gaussian mass {outside:e} lies outside [{p_min}, {p_max}]")]
    GridTooNarrow { outside: f64, p_min: f64, p_max: f64 },
    #[error("state is not a pseudospin product state (deviation {deviation:e})")]
    NotProductState { deviation: f64 },
    #[error("amplitude {amplitude:e} at the momentum-grid edge; enlarge the grid")]
    EdgeLeakage { amplitude: f64 },
    #[error("invalid pseudospin density matrix: {0}")]
    InvalidDensity(String),
}
