use super::frame::{dirac_frame, dirac_frame_rate};
use super::hamiltonian::{effective_hamiltonian, FullHamiltonian};
use super::integrate::{integrate, IntegratorOptions};
use super::params::{CircuitParams, EffectiveParams};
use super::state::QubitResonatorState;
use super::CircuitError;
use crate::linalg::{hermitian_eigen, CMatrix, CVector};
use crate::units::mhz;
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `exp(−iHt)` for a fixed Hermitian `H`, by one diagonalisation.
#[derive(Debug, Clone)]
pub struct StaticPropagator {
    energies: Vec<f64>,
    vectors: CMatrix,
}

impl StaticPropagator {
    pub fn new(h: &CMatrix) -> Self {
        let (energies, vectors) = hermitian_eigen(h);
        Self { energies, vectors }
    }

    pub fn evolve(&self, psi: &CVector, t: f64) -> CVector {
        let mut coeffs = self.vectors.adjoint() * psi;
        for (c, e) in coeffs.iter_mut().zip(&self.energies) {
            *c *= C64::from_polar(1.0, -e * t);
        }
        &self.vectors * coeffs
    }

    pub fn evolve_state(&self, state: &QubitResonatorState, t: f64) -> QubitResonatorState {
        QubitResonatorState::from_vector(state.n_max(), self.evolve(state.amplitudes(), t))
            .expect("propagator dimension matches the state")
    }
}

/// `P_e(t)` under the effective Hamiltonian.
pub fn effective_pe_trace(
    ep: &EffectiveParams,
    theta: f64,
    eps_drive: f64,
    state0: &QubitResonatorState,
    times: &[f64],
) -> Vec<f64> {
    let u = StaticPropagator::new(&effective_hamiltonian(ep, theta, eps_drive, state0.n_max()));
    times.iter().map(|&t| u.evolve_state(state0, t).population_e()).collect()
}

/// `P_e(t)` of the full circuit model, read out in the Dirac frame rotating at `frame_rate`.
pub fn full_pe_trace(
    p: &CircuitParams,
    state0: &QubitResonatorState,
    times: &[f64],
    frame_rate: f64,
    opts: &IntegratorOptions,
) -> Result<Vec<f64>, CircuitError> {
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let traj = integrate(state0, &FullHamiltonian::new(*p, state0.n_max()), (0.0, t_end), times, opts)?;
    Ok(traj.times.iter().zip(&traj.states).map(|(&t, s)| dirac_frame(s, frame_rate, p.theta, t).population_e()).collect())
}

/// Candidate values for the exhaustive search over `(φ₁, φ₂, δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSearchGrid {
    pub phi_1: Vec<f64>,
    pub phi_2: Vec<f64>,
    /// Detunings in rad/ns.
    pub delta: Vec<f64>,
}

impl PhaseSearchGrid {
    /// 8 × 8 phases on `[0, 2π)` and `δ/2π ∈ {−1, −0.5, 0, 0.5, 1}` MHz.
    pub fn coarse() -> Self {
        let phases: Vec<f64> = (0..8).map(|k| k as f64 * std::f64::consts::FRAC_PI_4).collect();
        Self { phi_1: phases.clone(), phi_2: phases, delta: [-1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|&d| mhz(d)).collect() }
    }

    fn tuples(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.phi_1.len() * self.phi_2.len() * self.delta.len());
        for &a in &self.phi_1 {
            for &b in &self.phi_2 {
                for &d in &self.delta {
                    out.push((a, b, d));
                }
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).expect("finite search grid"));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseOptimum {
    pub phi_1: f64,
    pub phi_2: f64,
    pub delta: f64,
    /// `‖P_e^full − P_e^ref‖₂` over the sample times.
    pub residual: f64,
    pub max_deviation: f64,
}

/// Grid search minimising the 2-norm distance between the full-model `P_e`
/// trace and `reference`; ties go to the lexicographically smallest triple.
pub fn optimize_phases(
    p: &CircuitParams,
    state0: &QubitResonatorState,
    reference: &[f64],
    times: &[f64],
    grid: &PhaseSearchGrid,
    opts: &IntegratorOptions,
) -> Result<PhaseOptimum, CircuitError> {
    if reference.len() != times.len() {
        return Err(CircuitError::InvalidParameter {
            name: "reference",
            reason: format!("{} values for {} sample times", reference.len(), times.len()),
        });
    }
    let tuples = grid.tuples();
    if tuples.is_empty() {
        return Err(CircuitError::InvalidParameter { name: "search_grid", reason: "empty".into() });
    }
    let rate = dirac_frame_rate(p);
    let scored: Result<Vec<PhaseOptimum>, CircuitError> = tuples
        .par_iter()
        .map(|&(phi_1, phi_2, delta)| {
            let q = CircuitParams { phi_1, phi_2, delta, ..*p };
            let trace = full_pe_trace(&q, state0, times, rate, opts)?;
            let diffs = trace.iter().zip(reference).map(|(a, b)| a - b);
            let residual = diffs.clone().map(|d| d * d).sum::<f64>().sqrt();
            let max_deviation = diffs.map(f64::abs).fold(0.0, f64::max);
            Ok(PhaseOptimum { phi_1, phi_2, delta, residual, max_deviation })
        })
        .collect();
    let scored = scored?;
    let mut best = scored[0];
    for s in &scored[1..] {
        if s.residual < best.residual {
            best = *s;
        }
    }
    Ok(best)
}
