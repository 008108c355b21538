//! Wigner quasiprobability distributions on a rectangular `(x, p)` lattice.
//!
//! Convention: `ħ = 1`, `x̂ = (a + a†)/√2`, `p̂ = i(a† − a)/√2`, so a
//! normalised state satisfies `|W| ≤ 1/π` and `∫W dx dp = 1`.

mod analysis;
mod compute;
mod io;

pub use analysis::{
    combine_conditional, count_modes, discriminate_wavepackets, marginal_x, moments, HalfPlaneMoments, Moments,
    Side, WavepacketSplit, DEFAULT_INDISTINCT_THRESHOLD,
};
pub use compute::{
    conditional_wigner, unconditional_wigner, wigner_from_fock_density, wigner_from_fock_density_with_pad,
    DEFAULT_PAD,
};
pub use io::WignerLabel;

use crate::dirac::{spinor, Spinor};
use crate::quadrature::trapezoid_weight;
use serde::{Deserialize, Serialize};

pub const WIGNER_BOUND: f64 = std::f64::consts::FRAC_1_PI;

#[derive(Debug, thiserror::Error)]
pub enum WignerError {
    #[error("invalid phase-space grid: {0}")]
    InvalidGrid(String),
    #[error("invalid Wigner values: {0}")]
    InvalidValues(String),
    #[error("projection basis is not orthonormal (error {0:e})")]
    InvalidBasis(f64),
    #[error("amplitude {amplitude:e} at the momentum-grid edge; enlarge the grid")]
    EdgeLeakage { amplitude: f64 },
    #[error("invalid Fock density matrix: {0}")]
    InvalidDensity(String),
    #[error("population {tail:e} in the top Fock level exceeds 1e-4")]
    TruncationError { tail: f64 },
    #[error("displaced-parity sum not converged: extra padding changes W by {change:e}")]
    PadInsufficient { change: f64 },
    #[error("Wigner function has weight {weight:e}; moments undefined")]
    ZeroWeight { weight: f64 },
    #[error("wavepacket on the {side:?} side is too weak to resolve")]
    Indistinct { side: Side, available: Option<HalfPlaneMoments> },
    #[error("phase-space grids differ")]
    GridMismatch,
    #[error("populations {p_e} + {p_g} do not sum to 1")]
    InvalidWeights { p_e: f64, p_g: f64 },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed Wigner file: {0}")]
    Format(String),
}

/// Uniform lattice `x_i = x_min + i dx`, `p_j = p_min + j dp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    x_min: f64,
    x_max: f64,
    n_x: usize,
    p_min: f64,
    p_max: f64,
    n_p: usize,
}

impl Default for PhaseSpaceGrid {
    fn default() -> Self {
        Self { x_min: -4.5, x_max: 4.5, n_x: 121, p_min: -4.5, p_max: 4.5, n_p: 121 }
    }
}

impl PhaseSpaceGrid {
    pub fn new(x_min: f64, x_max: f64, n_x: usize, p_min: f64, p_max: f64, n_p: usize) -> Result<Self, WignerError> {
        let g = Self { x_min, x_max, n_x, p_min, p_max, n_p };
        g.validate()?;
        Ok(g)
    }

    pub fn square(extent: f64, n: usize) -> Result<Self, WignerError> {
        Self::new(-extent, extent, n, -extent, extent, n)
    }

    pub(crate) fn validate(&self) -> Result<(), WignerError> {
        if self.n_x < 2 || self.n_p < 2 {
            return Err(WignerError::InvalidGrid(format!("need ≥ 2 points per axis, got {}×{}", self.n_x, self.n_p)));
        }
        let finite = [self.x_min, self.x_max, self.p_min, self.p_max].iter().all(|v| v.is_finite());
        if !finite || !(self.x_min < self.x_max) || !(self.p_min < self.p_max) {
            return Err(WignerError::InvalidGrid("axes must be finite and strictly increasing".into()));
        }
        Ok(())
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_p(&self) -> usize {
        self.n_p
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn p_range(&self) -> (f64, f64) {
        (self.p_min, self.p_max)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.n_p - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.n_p).map(|j| self.p(j)).collect()
    }

    /// Trapezoidal weight along x.
    pub fn wx(&self, i: usize) -> f64 {
        trapezoid_weight(i, self.n_x, self.dx())
    }

    /// Trapezoidal weight along p.
    pub fn wp(&self, j: usize) -> f64 {
        trapezoid_weight(j, self.n_p, self.dp())
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
        self.n_x == other.n_x
            && self.n_p == other.n_p
            && close(self.x_min, other.x_min)
            && close(self.x_max, other.x_max)
            && close(self.p_min, other.p_min)
            && close(self.p_max, other.p_max)
    }
}

/// Sampled Wigner function; `values[i * n_p + j] = W(x_i, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    grid: PhaseSpaceGrid,
    values: Vec<f64>,
    weight: f64,
    pub label: WignerLabel,
}

impl WignerGrid {
    pub fn new(grid: PhaseSpaceGrid, values: Vec<f64>, weight: f64) -> Result<Self, WignerError> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(WignerError::InvalidValues(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if !(0.0..=1.0 + 1e-9).contains(&weight) {
            return Err(WignerError::InvalidValues(format!("weight {weight} outside [0, 1]")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || v.abs() > WIGNER_BOUND + 1e-6) {
            return Err(WignerError::InvalidValues(format!("value {v} violates |W| ≤ 1/π")));
        }
        Ok(Self { grid, values, weight, label: WignerLabel::default() })
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_p + j]
    }

    /// The same function rescaled to unit weight.
    pub fn normalized(&self) -> Result<Self, WignerError> {
        if !(self.weight > 1e-12) {
            return Err(WignerError::ZeroWeight { weight: self.weight });
        }
        let values = self.values.iter().map(|v| v / self.weight).collect();
        Ok(Self::new(self.grid, values, 1.0)?.with_label(self.label.clone()))
    }

    pub fn with_label(mut self, label: WignerLabel) -> Self {
        self.label = label;
        self
    }

    /// `∫ W dx dp` by the trapezoidal rule.
    pub fn integral(&self) -> f64 {
        let g = &self.grid;
        let mut s = 0.0;
        for i in 0..g.n_x {
            for j in 0..g.n_p {
                s += g.wx(i) * g.wp(j) * self.at(i, j);
            }
        }
        s
    }

    /// `|∫W − weight|`, to be compared with a quadrature tolerance (default 5e−3).
    pub fn normalization_error(&self) -> f64 {
        (self.integral() - self.weight).abs()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Orthonormal pseudospin basis `{|b₊⟩, |b₋⟩}` used to condition a Wigner function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionBasis {
    plus: Spinor,
    minus: Spinor,
}

impl ProjectionBasis {
    pub fn new(plus: Spinor, minus: Spinor) -> Result<Self, WignerError> {
        let err = spinor::inner(&plus, &minus)
            .norm()
            .max((spinor::norm_sqr(&plus) - 1.0).abs())
            .max((spinor::norm_sqr(&minus) - 1.0).abs());
        if err > 1e-12 {
            return Err(WignerError::InvalidBasis(err));
        }
        Ok(Self { plus, minus })
    }

    /// `{|e⟩, |g⟩}`, the measured basis.
    pub fn energy() -> Self {
        Self { plus: spinor::excited(), minus: spinor::ground() }
    }

    /// `{|X⟩, |−X⟩}`.
    pub fn x() -> Self {
        Self { plus: spinor::plus_x(), minus: spinor::minus_x() }
    }

    pub fn plus(&self) -> Spinor {
        self.plus
    }

    pub fn minus(&self) -> Spinor {
        self.minus
    }
}
