use super::params::{effective_params, CircuitParams};
use super::state::QubitResonatorState;
use super::CircuitError;
use crate::linalg::CMatrix;
use crate::C64;
use serde::{Deserialize, Serialize};

/// Per-branch phase-space rotation angles `θ_{k,0} + θ_k t/t_f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameAngles {
    pub theta_e0: f64,
    pub theta_g0: f64,
    pub theta_e: f64,
    pub theta_g: f64,
    pub t_f: f64,
}

impl FrameAngles {
    pub fn zitterbewegung() -> Self {
        Self { theta_e0: 0.260, theta_g0: 0.045, theta_e: 1.510, theta_g: 1.217, t_f: 330.0 }
    }

    pub fn klein() -> Self {
        Self { theta_e0: 0.0, theta_g0: 0.0, theta_e: 1.402, theta_g: 1.162, t_f: 280.0 }
    }

    pub fn none() -> Self {
        Self { theta_e0: 0.0, theta_g0: 0.0, theta_e: 0.0, theta_g: 0.0, t_f: 1.0 }
    }

    /// Total angle for branch `q` (`0 ↔ e`, `1 ↔ g`) at time `t`.
    pub fn angle(&self, q: usize, t: f64) -> f64 {
        if q == 0 {
            self.theta_e0 + self.theta_e * t / self.t_f
        } else {
            self.theta_g0 + self.theta_g * t / self.t_f
        }
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        let all = [self.theta_e0, self.theta_g0, self.theta_e, self.theta_g, self.t_f];
        if all.iter().any(|v| !v.is_finite()) || self.t_f <= 0.0 {
            return Err(CircuitError::InvalidParameter { name: "frame_angles", reason: "angles must be finite and t_f > 0".into() });
        }
        Ok(())
    }
}

/// `U ρ U†` with `U = exp[−i(θ_{k,0} + θ_k t/t_f) a†a]`.
///
/// A coherent state `|α⟩` maps to `|α e^{−iφ}⟩`, i.e. the Wigner function
/// turns clockwise by `φ` in the `(x, p)` plane.
pub fn frame_correction(rho: &CMatrix, theta_k0: f64, theta_k: f64, t: f64, t_f: f64) -> Result<CMatrix, CircuitError> {
    if !(t_f > 0.0) {
        return Err(CircuitError::InvalidParameter { name: "t_f", reason: format!("must be > 0, got {t_f}") });
    }
    let phi = theta_k0 + theta_k * t / t_f;
    Ok(CMatrix::from_fn(rho.nrows(), rho.ncols(), |m, n| {
        rho[(m, n)] * C64::from_polar(1.0, -phi * (m as f64 - n as f64))
    }))
}

/// Rotation rate of the frame in which the circuit realises the Dirac
/// Hamiltonian: `ν₂/2` when the second modulation is on, otherwise `K`.
pub fn dirac_frame_rate(p: &CircuitParams) -> f64 {
    if p.eps_2 != 0.0 {
        0.5 * p.nu_2
    } else {
        effective_params(p).k
    }
}

/// `(exp(i r t σ_θ) ⊗ I) ψ`, mapping an interaction-picture state to the Dirac frame.
pub fn dirac_frame(state: &QubitResonatorState, rate: f64, theta: f64, t: f64) -> QubitResonatorState {
    let (s, co) = (rate * t).sin_cos();
    let is = C64::new(0.0, s);
    let u = [
        [C64::new(co, 0.0), is * C64::from_polar(1.0, -theta)],
        [is * C64::from_polar(1.0, theta), C64::new(co, 0.0)],
    ];
    state.apply_qubit(&u)
}

#[cfg(test)]
mod tests {
    use super::super::state::{prepare_initial, QubitRotation};
    use super::*;
    use crate::fock::{coherent_amplitudes, momentum, position};
    use crate::linalg::{c, hermitian_eigen, outer, trace, CVector};

    fn coherent(alpha: C64, dim: usize) -> CMatrix {
        outer(&CVector::from_vec(coherent_amplitudes(alpha, dim)))
    }

    #[test]
    fn zero_angles_are_identity() {
        let rho = coherent(c(0.3, 1.2), 20);
        assert_eq!(frame_correction(&rho, 0.0, 0.0, 100.0, 330.0).unwrap(), rho);
        assert!(frame_correction(&rho, 0.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn quarter_turn_moves_centroid() {
        let dim = 30;
        let rho = coherent(c(0.0, 2f64.sqrt()), dim);
        let out = frame_correction(&rho, std::f64::consts::FRAC_PI_2, 0.0, 0.0, 1.0).unwrap();
        let x = trace(&(&out * position(dim))).re;
        let p = trace(&(&out * momentum(dim))).re;
        assert!((x - 2.0).abs() < 1e-10 && p.abs() < 1e-10, "({x}, {p})");
        let (a, _) = hermitian_eigen(&rho);
        let (b, _) = hermitian_eigen(&out);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
        assert!((trace(&out).re - trace(&rho).re).abs() < 1e-12);
    }

    #[test]
    fn angles_follow_linear_schedule() {
        let f = FrameAngles::zitterbewegung();
        assert!((f.angle(0, 330.0) - 1.770).abs() < 1e-12);
        assert!((f.angle(1, 0.0) - 0.045).abs() < 1e-15);
        assert!(f.validate().is_ok());
        assert!(FrameAngles { t_f: 0.0, ..f }.validate().is_err());
    }

    #[test]
    fn dirac_frame_is_unitary_and_inverts() {
        let s = prepare_initial(2.0, QubitRotation::y(0.7), 20).unwrap();
        let r = dirac_frame(&s, 0.3, 1.1, 17.0);
        assert!((r.norm_sqr() - 1.0).abs() < 1e-12);
        let back = dirac_frame(&r, -0.3, 1.1, 17.0);
        assert!((back.amplitudes() - s.amplitudes()).norm() < 1e-12);
        let p = CircuitParams::zitterbewegung();
        assert_eq!(dirac_frame_rate(&p), 0.5 * p.nu_2);
        assert_eq!(dirac_frame_rate(&CircuitParams::klein()), effective_params(&CircuitParams::klein()).k);
    }
}
