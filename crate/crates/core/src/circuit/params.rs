use super::CircuitError;
use crate::dirac::DiracParams;
use crate::special::bessel_j_orders;
use crate::units::mhz;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Validity ratios above this value are reported as warnings.
pub const VALIDITY_WARNING_RATIO: f64 = 0.25;

/// Circuit parameters; every frequency is an angular frequency in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub omega_0: f64,
    pub omega_r: f64,
    pub lambda: f64,
    pub eps_1: f64,
    pub nu_1: f64,
    pub phi_1: f64,
    pub eps_2: f64,
    pub nu_2: f64,
    pub phi_2: f64,
    /// Transverse drive amplitude `Ω`.
    pub omega_drive: f64,
    pub theta: f64,
    pub delta: f64,
    /// Resonator drive amplitude `ε` (linear potential `√2 ε x`).
    pub eps_drive: f64,
    /// Resonator drive frequency offset from `ω_r`.
    pub drive_detuning: f64,
}

impl CircuitParams {
    /// Zitterbewegung run: `ν₁ = 2π×160 MHz`, `ε₁ = 2π×130 MHz`, `ν₂ = 2π×33.4 MHz`,
    /// `ε₂ = 2π×8.8 MHz`, `Ω = 2π×20.03 MHz`, `λ = 2π×19.91 MHz`, `θ = π/2`,
    /// with `ω_r = 2π×5583.5 MHz` and the qubit placed on the sideband resonance.
    pub fn zitterbewegung() -> Self {
        let nu_1 = mhz(160.0);
        let omega_r = mhz(5583.5);
        Self {
            omega_0: omega_r - 2.0 * nu_1,
            omega_r,
            lambda: mhz(19.91),
            eps_1: mhz(130.0),
            nu_1,
            phi_1: 0.0,
            eps_2: mhz(8.8),
            nu_2: mhz(33.4),
            phi_2: 0.0,
            omega_drive: mhz(20.03),
            theta: FRAC_PI_2,
            delta: 0.0,
            eps_drive: 0.0,
            drive_detuning: 0.0,
        }
    }

    /// Klein run: massless (`ε₂ = 0`) with a resonator drive `ε = 2π×0.39 MHz`.
    pub fn klein() -> Self {
        Self { eps_2: 0.0, eps_drive: mhz(0.39), ..Self::zitterbewegung() }
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        let fields = [
            ("omega_0", self.omega_0),
            ("omega_r", self.omega_r),
            ("lambda", self.lambda),
            ("eps_1", self.eps_1),
            ("nu_1", self.nu_1),
            ("phi_1", self.phi_1),
            ("eps_2", self.eps_2),
            ("nu_2", self.nu_2),
            ("phi_2", self.phi_2),
            ("omega_drive", self.omega_drive),
            ("theta", self.theta),
            ("delta", self.delta),
            ("eps_drive", self.eps_drive),
            ("drive_detuning", self.drive_detuning),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(CircuitError::InvalidParameter { name, reason: format!("must be finite, got {v}") });
            }
        }
        if self.nu_1 <= 0.0 {
            return Err(CircuitError::InvalidParameter { name: "nu_1", reason: format!("must be > 0, got {}", self.nu_1) });
        }
        if self.nu_2 < 0.0 {
            return Err(CircuitError::InvalidParameter { name: "nu_2", reason: format!("must be ≥ 0, got {}", self.nu_2) });
        }
        Ok(())
    }

    pub fn mu(&self) -> f64 {
        self.eps_1 / self.nu_1
    }

    /// `|ω_r − ω_0 − 2ν₁|`.
    pub fn resonance_mismatch(&self) -> f64 {
        (self.omega_r - self.omega_0 - 2.0 * self.nu_1).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityDiagnostics {
    pub lambda_over_nu1: f64,
    pub k_over_nu1: f64,
    /// `max(η, ε₂/2)/(2K)`.
    pub sideband_over_2k: f64,
    pub resonance_mismatch: f64,
}

impl ValidityDiagnostics {
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let checks = [
            ("lambda/nu_1", self.lambda_over_nu1),
            ("K/nu_1", self.k_over_nu1),
            ("max(eta, eps_2/2)/(2K)", self.sideband_over_2k),
        ];
        for (name, r) in checks {
            if !(r <= VALIDITY_WARNING_RATIO) {
                out.push(format!("{name} = {r:.3} exceeds {VALIDITY_WARNING_RATIO}"));
            }
        }
        if self.resonance_mismatch > 1e-9 {
            out.push(format!("sideband resonance missed by {:.4e} rad/ns", self.resonance_mismatch));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub mu: f64,
    /// Carrier drive `K = Ω J₀(μ)`.
    pub k: f64,
    /// Sideband coupling `η = λ J₂(μ)/2`.
    pub eta: f64,
    /// `ω = ε₂/4`.
    pub omega: f64,
    pub c_star: f64,
    /// `ω/c*²`; infinite when `η = 0` and `ω > 0`.
    pub m_star: f64,
    pub diagnostics: ValidityDiagnostics,
}

impl EffectiveParams {
    pub fn dirac_params(&self) -> Result<DiracParams, CircuitError> {
        Ok(DiracParams::from_rest_energy(self.c_star, self.omega)?)
    }
}

pub fn effective_params(p: &CircuitParams) -> EffectiveParams {
    let mu = p.mu();
    let j = bessel_j_orders(mu, 2);
    let k = p.omega_drive * j[0];
    let eta = p.lambda * j[2] / 2.0;
    let omega = p.eps_2 / 4.0;
    let c_star = std::f64::consts::SQRT_2 * eta;
    let m_star = if c_star > 0.0 {
        omega / (c_star * c_star)
    } else if omega == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let diagnostics = ValidityDiagnostics {
        lambda_over_nu1: (p.lambda / p.nu_1).abs(),
        k_over_nu1: (k / p.nu_1).abs(),
        sideband_over_2k: eta.abs().max(p.eps_2.abs() / 2.0) / (2.0 * k.abs()),
        resonance_mismatch: p.resonance_mismatch(),
    };
    EffectiveParams { mu, k, eta, omega, c_star, m_star, diagnostics }
}
