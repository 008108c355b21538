//! Measurement emulation and inversion: probe-qubit Rabi traces, photon-number
//! fits, displaced-parity Wigner values, readout calibration, conditional
//! photon distributions and density-matrix reconstruction.

mod calibration;
mod conditional;
mod io;
mod rabi;
mod reconstruct;

pub use calibration::{apply_calibration, CalibratedPopulations, QubitFidelity, ReadoutCalibration};
pub use conditional::{
    conditional_distribution, displaced_distribution, pipeline_conditional_wigner, wigner_from_distributions,
    wigner_point, Outcome,
};
pub use rabi::{fit_photon_distribution, simulate_rabi, FitOptions, ProbeParams, RabiFit, RabiTrace};
pub use reconstruct::{
    gamma_lattice, reconstruct_density, synthesize_samples, DisplacedSample, DisplacedSampleSet,
    ReconstructOptions, Reconstruction,
};

use crate::linalg::CMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum TomographyError {
    #[error("invalid photon distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid Rabi trace: {0}")]
    InvalidTrace(String),
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("basis Gram matrix for n_max = {n_max} has condition number {condition:e}")]
    IllConditioned { n_max: usize, condition: f64 },
    #[error("calibration matrix is singular")]
    Singular,
    #[error("outcome population {population:e} is too small to condition on")]
    ZeroPopulation { population: f64 },
    #[error("displaced distribution misses {missing:e} of the trace")]
    TruncationError { missing: f64 },
    #[error("need at least {need} samples, got {have}")]
    InsufficientSamples { have: usize, need: usize },
    #[error("reconstruction not converged after {iterations} iterations (step norm {step_norm:e})")]
    NotConverged { iterations: usize, step_norm: f64, best: Box<CMatrix> },
    #[error(transparent)]
    Wigner(#[from] crate::wigner::WignerError),
    #[error(transparent)]
    Circuit(#[from] crate::circuit::CircuitError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed file: {0}")]
    Format(String),
}

/// Photon-number populations `P_0 ..= P_{n_max}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PhotonDistribution {
    probs: Vec<f64>,
}

impl PhotonDistribution {
    /// Entries down to −1e−9 are clamped to zero; the total may exceed 1 by at most 1e−6.
    pub fn new(mut probs: Vec<f64>) -> Result<Self, TomographyError> {
        if probs.is_empty() {
            return Err(TomographyError::InvalidDistribution("empty".into()));
        }
        for (n, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -1e-9 {
                return Err(TomographyError::InvalidDistribution(format!("P_{n} = {p}")));
            }
            *p = p.max(0.0);
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + 1e-6 {
            return Err(TomographyError::InvalidDistribution(format!("total {total} exceeds 1")));
        }
        Ok(Self { probs })
    }

    pub fn vacuum(n_max: usize) -> Self {
        Self::fock(0, n_max)
    }

    pub fn fock(k: usize, n_max: usize) -> Self {
        let mut probs = vec![0.0; n_max.max(k) + 1];
        probs[k] = 1.0;
        Self { probs }
    }

    /// Poisson distribution truncated at `n_max` (not renormalised).
    pub fn poisson(mean: f64, n_max: usize) -> Self {
        let mut probs = Vec::with_capacity(n_max + 1);
        let mut p = (-mean).exp();
        for n in 0..=n_max {
            probs.push(p);
            p *= mean / (n + 1) as f64;
        }
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// `max_n |P_n − Q_n|`, padding the shorter distribution with zeros.
    pub fn linf_distance(&self, other: &Self) -> f64 {
        let len = self.probs.len().max(other.probs.len());
        (0..len)
            .map(|n| (self.probs.get(n).unwrap_or(&0.0) - other.probs.get(n).unwrap_or(&0.0)).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for PhotonDistribution {
    type Error = TomographyError;

    fn try_from(probs: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(probs)
    }
}

impl From<PhotonDistribution> for Vec<f64> {
    fn from(d: PhotonDistribution) -> Self {
        d.probs
    }
}
