use serde::{Deserialize, Serialize};

use super::DiracError;
use crate::quadrature::trapezoid_weight;
use crate::C64;

/// Two-component pseudospin vector `(e, g)`.
pub type Spinor = [C64; 2];

/// Named pseudospin states.
pub mod spinor {
    use super::Spinor;
    use crate::C64;
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn excited() -> Spinor {
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    }

    pub fn ground() -> Spinor {
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
    }

    /// `|X⟩ = (1, 1)/√2`.
    pub fn plus_x() -> Spinor {
        [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)]
    }

    /// `|−X⟩ = (1, −1)/√2`.
    pub fn minus_x() -> Spinor {
        [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)]
    }

    pub fn inner(a: &Spinor, b: &Spinor) -> C64 {
        a[0].conj() * b[0] + a[1].conj() * b[1]
    }

    pub fn norm_sqr(a: &Spinor) -> f64 {
        a[0].norm_sqr() + a[1].norm_sqr()
    }
}

/// Light speed and rest mass of the simulated particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracParams {
    c: f64,
    m: f64,
}

impl DiracParams {
    pub fn new(c: f64, m: f64) -> Result<Self, DiracError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(DiracError::InvalidParameter { name: "c", reason: format!("must be > 0, got {c}") });
        }
        if !(m >= 0.0 && m.is_finite()) {
            return Err(DiracError::InvalidParameter { name: "m", reason: format!("must be >= 0, got {m}") });
        }
        Ok(Self { c, m })
    }

    /// Parameters from an effective light speed and a rest energy `m c²`.
    pub fn from_rest_energy(c: f64, rest_energy: f64) -> Result<Self, DiracError> {
        Self::new(c, rest_energy / (c * c))
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Mass-momentum scale `m c`.
    pub fn mc(&self) -> f64 {
        self.m * self.c
    }

    /// `m c²`.
    pub fn rest_energy(&self) -> f64 {
        self.m * self.c * self.c
    }

    /// `E_p = √(p²c² + m²c⁴)`.
    pub fn energy(&self, p: f64) -> f64 {
        (p * self.c).hypot(self.rest_energy())
    }
}

/// Uniform momentum grid `p_min + k·dp`, `k = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    p_min: f64,
    p_max: f64,
    n_points: usize,
}

impl MomentumGrid {
    pub const DEFAULT_POINTS: usize = 4096;

    pub fn new(p_min: f64, p_max: f64, n_points: usize) -> Result<Self, DiracError> {
        if !(p_min.is_finite() && p_max.is_finite() && p_min < p_max) {
            return Err(DiracError::InvalidParameter {
                name: "grid",
                reason: format!("need p_min < p_max, got [{p_min}, {p_max}]"),
            });
        }
        if n_points < 2 {
            return Err(DiracError::InvalidParameter { name: "n_points", reason: format!("need >= 2, got {n_points}") });
        }
        Ok(Self { p_min, p_max, n_points })
    }

    /// Default grid for a wavepacket centred at `p0` with spread `delta_p`:
    /// the union of `p0 ± 8 δp` and `[−10, 10]`, sampled at 4096 points.
    pub fn around(p0: f64, delta_p: f64) -> Result<Self, DiracError> {
        Self::new((p0 - 8.0 * delta_p).min(-10.0), (p0 + 8.0 * delta_p).max(10.0), Self::DEFAULT_POINTS)
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.n_points - 1) as f64
    }

    #[inline]
    pub fn value(&self, k: usize) -> f64 {
        self.p_min + k as f64 * self.dp()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.value(k)).collect()
    }

    /// Trapezoidal quadrature weight of sample `k`.
    #[inline]
    pub fn weight(&self, k: usize) -> f64 {
        trapezoid_weight(k, self.n_points, self.dp())
    }
}

/// Spinor wavefunction sampled on a momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorMomentumState {
    grid: MomentumGrid,
    up: Vec<C64>,
    down: Vec<C64>,
}

impl SpinorMomentumState {
    pub fn from_components(grid: MomentumGrid, up: Vec<C64>, down: Vec<C64>) -> Result<Self, DiracError> {
        if up.len() != grid.len() || down.len() != grid.len() {
            return Err(DiracError::InvalidParameter {
                name: "amplitudes",
                reason: format!("expected {} samples, got {} and {}", grid.len(), up.len(), down.len()),
            });
        }
        Ok(Self { grid, up, down })
    }

    /// Product state `ξ(p) ⊗ s`; not renormalised.
    pub fn product(grid: MomentumGrid, xi: &[C64], s: Spinor) -> Result<Self, DiracError> {
        let up = xi.iter().map(|z| z * s[0]).collect();
        let down = xi.iter().map(|z| z * s[1]).collect();
        Self::from_components(grid, up, down)
    }

    /// Normalised Gaussian packet `ξ_p ∝ exp(−(p−p0)²/(4δp²) − i p x0)`
    /// carrying the constant spinor `s`.
    pub fn gaussian(grid: MomentumGrid, p0: f64, delta_p: f64, x0: f64, s: Spinor) -> Result<Self, DiracError> {
        if !(delta_p > 0.0) {
            return Err(DiracError::InvalidParameter { name: "delta_p", reason: format!("must be > 0, got {delta_p}") });
        }
        let xi: Vec<C64> = (0..grid.len()).map(|k| gaussian_amplitude(grid.value(k), p0, delta_p, x0)).collect();
        let mut state = Self::product(grid, &xi, s)?;
        state.normalize();
        Ok(state)
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn up(&self) -> &[C64] {
        &self.up
    }

    pub fn down(&self) -> &[C64] {
        &self.down
    }

    pub fn spinor_at(&self, k: usize) -> Spinor {
        [self.up[k], self.down[k]]
    }

    pub(crate) fn set_spinor(&mut self, k: usize, s: Spinor) {
        self.up[k] = s[0];
        self.down[k] = s[1];
    }

    /// `Σ_k (|up_k|² + |down_k|²) w_k` with trapezoidal weights.
    pub fn norm_sqr(&self) -> f64 {
        (0..self.grid.len())
            .map(|k| self.grid.weight(k) * (self.up[k].norm_sqr() + self.down[k].norm_sqr()))
            .sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for z in self.up.iter_mut().chain(self.down.iter_mut()) {
                *z /= n;
            }
        }
    }

    /// Projection `⟨b|spinor(p)⟩` at every grid point.
    pub fn project(&self, b: &Spinor) -> Vec<C64> {
        (0..self.grid.len()).map(|k| b[0].conj() * self.up[k] + b[1].conj() * self.down[k]).collect()
    }

    /// Largest spinor magnitude at the two grid edges.
    pub fn edge_amplitude(&self) -> f64 {
        let last = self.grid.len() - 1;
        [0, last]
            .iter()
            .map(|&k| spinor::norm_sqr(&self.spinor_at(k)).sqrt())
            .fold(0.0, f64::max)
    }

    /// Largest componentwise difference to another state on the same grid.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.up
            .iter()
            .zip(&other.up)
            .chain(self.down.iter().zip(&other.down))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `(δp√(2π))^{−1/2} exp(−(p−p0)²/(4δp²)) e^{−i p x0}`.
pub(crate) fn gaussian_amplitude(p: f64, p0: f64, delta_p: f64, x0: f64) -> C64 {
    let norm = (delta_p * (2.0 * std::f64::consts::PI).sqrt()).powf(-0.5);
    let d = p - p0;
    C64::from_polar(norm * (-d * d / (4.0 * delta_p * delta_p)).exp(), -p * x0)
}
