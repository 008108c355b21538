use super::{PhotonDistribution, TomographyError};
use crate::circuit::{frame_correction, FrameAngles};
use crate::fock::{displaced_populations, gamma_from_xp, FactoredDensity};
use crate::linalg::{hermitize, trace, CMatrix};
use crate::wigner::{PhaseSpaceGrid, WignerGrid};
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_PI;

const CAPTURE_TOLERANCE: f64 = 1e-10;
const MAX_MISSING: f64 = 1e-8;
const MAX_EXTRA_LEVELS: usize = 600;

/// Projective outcome of the test qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "e")]
    Excited,
    #[serde(rename = "g")]
    Ground,
}

impl Outcome {
    /// Pseudospin component index (`e ↦ 0`, `g ↦ 1`).
    pub fn index(self) -> usize {
        match self {
            Outcome::Excited => 0,
            Outcome::Ground => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Excited => "e",
            Outcome::Ground => "g",
        }
    }
}

/// `(1/π) Σ (−1)ⁿ P_n`.
pub fn wigner_point(dist: &PhotonDistribution) -> f64 {
    FRAC_1_PI * dist.probs().iter().enumerate().map(|(n, p)| if n % 2 == 0 { *p } else { -*p }).sum::<f64>()
}

/// Photon statistics `⟨n|D(−γ) ρ D(γ)|n⟩` of the displaced field, with the
/// output cutoff raised until the populations account for `tr ρ`.
pub fn displaced_distribution(rho: &CMatrix, gamma: C64) -> Result<PhotonDistribution, TomographyError> {
    capture(trace(rho).re, rho.nrows(), |n_out| displaced_populations(rho, gamma, n_out))
}

fn capture(tr: f64, dim: usize, populations: impl Fn(usize) -> Vec<f64>) -> Result<PhotonDistribution, TomographyError> {
    let limit = dim + MAX_EXTRA_LEVELS;
    let mut n_out = dim + 7;
    loop {
        let pops = populations(n_out);
        let missing = tr - pops.iter().sum::<f64>();
        if missing.abs() <= CAPTURE_TOLERANCE || n_out >= limit {
            if missing.abs() > MAX_MISSING {
                return Err(TomographyError::TruncationError { missing });
            }
            return PhotonDistribution::new(pops);
        }
        n_out = (n_out + n_out / 2 + 8).min(limit);
    }
}

/// Normalised field density conditioned on `outcome` and its population.
/// `joint` is ordered with the `e` block first, as produced by
/// [`QubitResonatorState::joint_density`](crate::circuit::QubitResonatorState::joint_density).
fn conditional_field(joint: &CMatrix, outcome: Outcome) -> Result<(CMatrix, f64), TomographyError> {
    let dim = joint.nrows();
    if dim != joint.ncols() || dim == 0 || !dim.is_multiple_of(2) {
        return Err(TomographyError::InvalidParameter { name: "joint", reason: format!("{}×{} is not a qubit ⊗ field density", dim, joint.ncols()) });
    }
    let nf = dim / 2;
    let off = outcome.index() * nf;
    let block = joint.view((off, off), (nf, nf)).into_owned();
    let population = trace(&block).re;
    if !(population > 1e-12) {
        return Err(TomographyError::ZeroPopulation { population });
    }
    Ok((hermitize(&block.unscale(population)), population))
}

/// `𝒫_n^k(γ) = ⟨n,k|D(−γ) ρ D(γ)|k,n⟩ / P_k` and `P_k`.
pub fn conditional_distribution(
    joint: &CMatrix,
    outcome: Outcome,
    gamma: C64,
) -> Result<(PhotonDistribution, f64), TomographyError> {
    let (rho, pop) = conditional_field(joint, outcome)?;
    Ok((displaced_distribution(&rho, gamma)?, pop))
}

/// Wigner function assembled point by point from displaced photon statistics,
/// `W(x, p) = wigner_point(dist(γ))` with `γ = (x + ip)/√2`.
pub fn wigner_from_distributions<F>(grid: &PhaseSpaceGrid, weight: f64, dist: F) -> Result<WignerGrid, TomographyError>
where
    F: Fn(C64) -> Result<PhotonDistribution, TomographyError> + Sync,
{
    grid.validate()?;
    let values: Result<Vec<f64>, TomographyError> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / grid.n_p(), idx % grid.n_p());
            dist(gamma_from_xp(grid.x(i), grid.p(j))).map(|d| wigner_point(&d))
        })
        .collect();
    Ok(WignerGrid::new(*grid, values?, weight)?)
}

/// Conditional Wigner function as the measurement pipeline obtains it: the
/// conditioned field is rotated by the branch's frame angle at time `t` and
/// its displaced parity evaluated on `grid`. Returns the unit-weight function
/// and the outcome population.
pub fn pipeline_conditional_wigner(
    joint: &CMatrix,
    outcome: Outcome,
    angles: &FrameAngles,
    t: f64,
    grid: &PhaseSpaceGrid,
) -> Result<(WignerGrid, f64), TomographyError> {
    angles.validate()?;
    let (rho, pop) = conditional_field(joint, outcome)?;
    let (theta_0, theta) = match outcome {
        Outcome::Excited => (angles.theta_e0, angles.theta_e),
        Outcome::Ground => (angles.theta_g0, angles.theta_g),
    };
    let rotated = frame_correction(&rho, theta_0, theta, t, angles.t_f)?;
    let (tr, factored) = (trace(&rotated).re, FactoredDensity::new(&rotated));
    let w = wigner_from_distributions(grid, 1.0, |gamma| {
        capture(tr, factored.dim(), |n_out| factored.displaced_populations(gamma, n_out))
    })?;
    Ok((w, pop))
}
