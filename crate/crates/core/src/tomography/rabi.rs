use super::{PhotonDistribution, TomographyError};
use crate::units::mhz;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Probe-qubit and resonator constants entering the Rabi model. These are
/// characterised independently and never fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    /// Probe–resonator coupling in rad/ns.
    pub lambda_2: f64,
    /// Resonator energy-relaxation time in ns; `f64::INFINITY` disables decay.
    pub t1_p: f64,
    /// Exponent in `κ_n = n^l / T1_p`.
    pub l: f64,
    /// Ground population of the probe before the interaction.
    pub p_g0: f64,
}

impl ProbeParams {
    /// λ₂/2π = 20.92 MHz, T1 = 12.9 μs, l = 1, P_g(0) = 1.
    pub fn device() -> Self {
        Self { lambda_2: mhz(20.92), t1_p: 12_900.0, l: 1.0, p_g0: 1.0 }
    }

    pub fn validate(&self) -> Result<(), TomographyError> {
        let bad = |name, reason: &str| Err(TomographyError::InvalidParameter { name, reason: reason.into() });
        if !(self.lambda_2.is_finite() && self.lambda_2 > 0.0) {
            return bad("lambda_2", "must be finite and positive");
        }
        if !(self.t1_p > 0.0) {
            return bad("t1_p", "must be positive");
        }
        if !(self.l.is_finite() && self.l > 0.0) {
            return bad("l", "must be finite and positive");
        }
        if !(0.0..=1.0).contains(&self.p_g0) {
            return bad("p_g0", "must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn decay_rate(&self, n: usize) -> f64 {
        (n as f64).powf(self.l) / self.t1_p
    }

    /// `f_n(τ) = e^{−κ_n τ} cos(2√n λ₂ τ)`.
    pub fn basis(&self, n: usize, tau: f64) -> f64 {
        (-self.decay_rate(n) * tau).exp() * (2.0 * (n as f64).sqrt() * self.lambda_2 * tau).cos()
    }
}

/// Excited-state population of the probe qubit versus interaction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiTrace {
    taus: Vec<f64>,
    values: Vec<f64>,
    probe: ProbeParams,
}

impl RabiTrace {
    pub fn new(taus: Vec<f64>, values: Vec<f64>, probe: ProbeParams) -> Result<Self, TomographyError> {
        probe.validate()?;
        if taus.len() != values.len() {
            return Err(TomographyError::InvalidTrace(format!("{} times for {} values", taus.len(), values.len())));
        }
        if taus.iter().any(|t| !t.is_finite()) || taus.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TomographyError::InvalidTrace("times must be finite and strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(TomographyError::InvalidTrace(format!("value {v} outside [0, 1]")));
        }
        Ok(Self { taus, values, probe })
    }

    /// `τ = 0, 2, …, 200` ns.
    pub fn default_taus() -> Vec<f64> {
        (0..=100).map(|k| 2.0 * k as f64).collect()
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probe(&self) -> &ProbeParams {
        &self.probe
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// Adds i.i.d. Gaussian noise of width `sigma`, clipping back into `[0, 1]`.
    pub fn with_noise<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> Result<Self, TomographyError> {
        let normal = Normal::new(0.0, sigma)
            .map_err(|e| TomographyError::InvalidParameter { name: "sigma", reason: e.to_string() })?;
        let values = self.values.iter().map(|v| (v + normal.sample(rng)).clamp(0.0, 1.0)).collect();
        Ok(Self { values, ..self.clone() })
    }
}

/// `P_e(τ) = ½[1 − P_g(0) Σ_n P_n e^{−κ_n τ} cos(2√n λ₂ τ)]`.
pub fn simulate_rabi(dist: &PhotonDistribution, probe: ProbeParams, taus: &[f64]) -> Result<RabiTrace, TomographyError> {
    probe.validate()?;
    let values = taus
        .iter()
        .map(|&tau| {
            let sum: f64 = dist.probs().iter().enumerate().map(|(n, p)| p * probe.basis(n, tau)).sum();
            (0.5 * (1.0 - probe.p_g0 * sum)).clamp(0.0, 1.0)
        })
        .collect();
    RabiTrace::new(taus.to_vec(), values, probe)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub n_max: usize,
    /// Fit `P_g(0)` within `p_g0_bounds` instead of taking it from the trace.
    /// The populations are then constrained to sum to exactly 1, since
    /// otherwise `P_g(0)` and the total are degenerate.
    pub fit_p_g0: bool,
    pub p_g0_bounds: (f64, f64),
}

impl FitOptions {
    pub fn new(n_max: usize) -> Self {
        Self { n_max, fit_p_g0: false, p_g0_bounds: (0.95, 1.0) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RabiFit {
    pub distribution: PhotonDistribution,
    pub p_g0: f64,
    /// 2-norm of the `P_e` residual.
    pub residual: f64,
    pub condition: f64,
}

const MAX_CONDITION: f64 = 1e12;

/// Nonnegative least-squares fit of the photon-number populations to a Rabi trace.
pub fn fit_photon_distribution(trace: &RabiTrace, opts: &FitOptions) -> Result<RabiFit, TomographyError> {
    let cols = opts.n_max + 1;
    if trace.len() < 2 * cols {
        return Err(TomographyError::InsufficientSamples { have: trace.len(), need: 2 * cols });
    }
    let probe = trace.probe();
    let a = DMatrix::from_fn(trace.len(), cols, |k, n| probe.basis(n, trace.taus()[k]));
    let gram = a.transpose() * &a;
    let eig = gram.symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(TomographyError::IllConditioned { n_max: opts.n_max, condition });
    }
    let y = DVector::from_iterator(trace.len(), trace.values().iter().map(|v| 1.0 - 2.0 * v));
    let solve = |p_g0: f64, equality: bool| {
        let x = nnls_capped(&a, &y.unscale(p_g0), equality);
        let r = 0.5 * (&a * &x * p_g0 - &y).norm();
        (x, r)
    };
    let (p_g0, (x, residual)) = if opts.fit_p_g0 {
        let (lo, hi) = opts.p_g0_bounds;
        if !(0.0 < lo && lo <= hi && hi <= 1.0) {
            return Err(TomographyError::InvalidParameter {
                name: "p_g0_bounds",
                reason: format!("need 0 < lo ≤ hi ≤ 1, got ({lo}, {hi})"),
            });
        }
        let best = golden_section(|c| solve(c, true).1, lo, hi, 1e-10);
        (best, solve(best, true))
    } else {
        (probe.p_g0, solve(probe.p_g0, false))
    };
    let distribution = PhotonDistribution::new(x.iter().copied().collect())?;
    Ok(RabiFit { distribution, p_g0, residual, condition })
}

/// `min ‖Ax − b‖` over `x ≥ 0` with `Σx ≤ 1` (or `= 1`), the sum constraint
/// entering as a weighted extra row with a nonnegative slack column. The
/// penalty leaves a violation of order `‖A‖⁻²`, removed by rescaling.
fn nnls_capped(a: &DMatrix<f64>, b: &DVector<f64>, equality: bool) -> DVector<f64> {
    let (m, n) = a.shape();
    let extra = usize::from(!equality);
    let w = 10.0 * a.norm().max(1.0);
    let mut aug = DMatrix::zeros(m + 1, n + extra);
    aug.view_mut((0, 0), (m, n)).copy_from(a);
    for j in 0..n + extra {
        aug[(m, j)] = w;
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs.rows_mut(0, m).copy_from(b);
    rhs[m] = w;
    let x = nnls(&aug, &rhs).rows(0, n).into_owned();
    let total = x.sum();
    if total > 1.0 { x.unscale(total) } else { x }
}

/// Lawson–Hanson active-set nonnegative least squares.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (m, n) = a.shape();
    let tol = 10.0 * f64::EPSILON * a.norm() * m.max(n) as f64;
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let at = a.transpose();
    for _ in 0..3 * n {
        let w = &at * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let sub = a.select_columns(&idx);
            let z_sub = sub.svd(true, true).solve(b, 1e-14).expect("SVD computed with both factors");
            let mut z = DVector::zeros(n);
            for (k, &col) in idx.iter().enumerate() {
                z[col] = z_sub[k];
            }
            if idx.iter().all(|&k| z[k] > 0.0) {
                x = z;
                break;
            }
            let alpha = idx
                .iter()
                .filter(|&&k| z[k] <= 0.0)
                .map(|&k| x[k] / (x[k] - z[k]))
                .fold(f64::INFINITY, f64::min);
            x += (z - &x) * alpha;
            for &k in &idx {
                if x[k] <= tol {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
        }
    }
    x
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    let mid = 0.5 * (lo + hi);
    [lo, mid, hi].into_iter().min_by(|a, b| f(*a).total_cmp(&f(*b))).expect("three candidates")
}
