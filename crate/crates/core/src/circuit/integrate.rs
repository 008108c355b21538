use super::hamiltonian::Hamiltonian;
use super::state::QubitResonatorState;
use super::{CircuitError, TAIL_LIMIT};
use crate::linalg::CVector;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    /// Absolute tolerance per component; defaults to `rel_tol × 1e−3`.
    pub abs_tol: Option<f64>,
    pub min_step: f64,
    pub max_step: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: None, min_step: 1e-4, max_step: 5.0 }
    }
}

impl IntegratorOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    fn validate(&self) -> Result<(), CircuitError> {
        if !(1e-12..=1e-4).contains(&self.rel_tol) {
            return Err(CircuitError::InvalidParameter {
                name: "rel_tol",
                reason: format!("must lie in [1e-12, 1e-4], got {}", self.rel_tol),
            });
        }
        if !(self.min_step > 0.0 && self.max_step >= self.min_step) {
            return Err(CircuitError::InvalidParameter { name: "step", reason: "need 0 < min_step ≤ max_step".into() });
        }
        Ok(())
    }
}

/// First sample at which the top Fock level carried more than [`TAIL_LIMIT`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationWarning {
    pub time: f64,
    pub tail: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QubitResonatorState>,
    pub truncation: Option<TruncationWarning>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Adaptive Dormand–Prince 5(4) integration of `y' = f(t, y)` with dense
/// output at `sample_times`, which must be sorted and lie in `[t0, t1]`.
pub fn integrate_vector<F>(
    mut f: F,
    y0: &CVector,
    t_span: (f64, f64),
    sample_times: &[f64],
    opts: &IntegratorOptions,
) -> Result<(Vec<CVector>, usize, usize), CircuitError>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    opts.validate()?;
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(CircuitError::InvalidParameter { name: "t_span", reason: format!("need t0 ≤ t1, got ({t0}, {t1})") });
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) || sample_times.iter().any(|&t| t < t0 || t > t1) {
        return Err(CircuitError::InvalidParameter {
            name: "sample_times",
            reason: format!("must be sorted and within [{t0}, {t1}]"),
        });
    }
    let n = y0.len();
    let atol = opts.abs_tol.unwrap_or(opts.rel_tol * 1e-3);
    let rtol = opts.rel_tol;
    let zero = C64::new(0.0, 0.0);
    let mut k = vec![vec![zero; n]; 7];
    let mut tmp = vec![zero; n];
    let mut y: Vec<C64> = y0.iter().copied().collect();
    let mut y_new = vec![zero; n];
    let mut out = Vec::with_capacity(sample_times.len());
    let mut next_sample = 0;
    while next_sample < sample_times.len() && sample_times[next_sample] <= t0 {
        out.push(y0.clone());
        next_sample += 1;
    }
    let mut t = t0;
    f(t, &y, &mut k[0]);
    let norm = |v: &[C64]| (v.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    let mut h = {
        let d0 = norm(&y);
        let d1 = norm(&k[0]);
        let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-3 } else { 0.01 * d0 / d1 };
        guess.clamp(opts.min_step, opts.max_step)
    };
    let (mut accepted, mut rejected) = (0, 0);
    while t < t1 {
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let stage = |k: &[Vec<C64>], coeffs: &[(usize, f64)], tmp: &mut Vec<C64>| {
            for i in 0..n {
                let mut acc = y[i];
                for &(j, a) in coeffs {
                    acc += k[j][i] * (h * a);
                }
                tmp[i] = acc;
            }
        };
        let stages: [(f64, &[(usize, f64)]); 5] = [
            (C2, &[(0, A21)]),
            (C3, &[(0, A31), (1, A32)]),
            (C4, &[(0, A41), (1, A42), (2, A43)]),
            (C5, &[(0, A51), (1, A52), (2, A53), (3, A54)]),
            (1.0, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]),
        ];
        for (s, (cs, coeffs)) in stages.iter().enumerate() {
            stage(&k, coeffs, &mut tmp);
            let (head, tail) = k.split_at_mut(s + 1);
            let _ = head;
            f(t + cs * h, &tmp, &mut tail[0]);
        }
        stage(&k, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)], &mut y_new);
        f(t + h, &y_new, &mut k[6]);
        let mut err = 0.0;
        for i in 0..n {
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
            let sc = atol + rtol * y[i].norm().max(y_new[i].norm());
            err += (e.norm() / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if err <= 1.0 {
            accepted += 1;
            let t_end = if last { t1 } else { t + h };
            while next_sample < sample_times.len() && sample_times[next_sample] <= t_end {
                let theta = ((sample_times[next_sample] - t) / h).clamp(0.0, 1.0);
                out.push(dense(&y, &y_new, &k, h, theta));
                next_sample += 1;
            }
            t = t_end;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(opts.max_step);
        } else {
            rejected += 1;
            if h <= opts.min_step {
                return Err(CircuitError::StepFailure { t, step: h });
            }
            h = (h * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)).max(opts.min_step);
        }
    }
    while next_sample < sample_times.len() {
        out.push(CVector::from_vec(y.clone()));
        next_sample += 1;
    }
    Ok((out, accepted, rejected))
}

fn dense(y0: &[C64], y1: &[C64], k: &[Vec<C64>], h: f64, theta: f64) -> CVector {
    let th1 = 1.0 - theta;
    CVector::from_fn(y0.len(), |i, _| {
        let ydiff = y1[i] - y0[i];
        let bspl = k[0][i] * h - ydiff;
        let r4 = ydiff - k[6][i] * h - bspl;
        let r5 = (k[0][i] * D1 + k[2][i] * D3 + k[3][i] * D4 + k[4][i] * D5 + k[5][i] * D6 + k[6][i] * D7) * h;
        y0[i] + (ydiff + (bspl + (r4 + r5 * th1) * theta) * th1) * theta
    })
}

/// Solves `i dψ/dt = H(t) ψ` and samples the state at `sample_times`.
pub fn integrate<H: Hamiltonian + ?Sized>(
    state0: &QubitResonatorState,
    hamiltonian: &H,
    t_span: (f64, f64),
    sample_times: &[f64],
    opts: &IntegratorOptions,
) -> Result<Trajectory, CircuitError> {
    if hamiltonian.dim() != state0.dim() {
        return Err(CircuitError::InvalidParameter {
            name: "hamiltonian",
            reason: format!("dimension {} does not match state dimension {}", hamiltonian.dim(), state0.dim()),
        });
    }
    let minus_i = C64::new(0.0, -1.0);
    let rhs = |t: f64, y: &[C64], out: &mut [C64]| {
        hamiltonian.apply(t, y, out);
        for z in out.iter_mut() {
            *z *= minus_i;
        }
    };
    let (vectors, accepted, rejected) = integrate_vector(rhs, state0.amplitudes(), t_span, sample_times, opts)?;
    let n_max = state0.n_max();
    let mut truncation = None;
    let mut states = Vec::with_capacity(vectors.len());
    for (t, v) in sample_times.iter().zip(vectors) {
        let s = QubitResonatorState::from_vector(n_max, v)?;
        let tail = s.tail_population();
        if tail > TAIL_LIMIT && truncation.is_none() {
            log::warn!("top Fock level population {tail:e} at t = {t} ns");
            truncation = Some(TruncationWarning { time: *t, tail });
        }
        states.push(s);
    }
    Ok(Trajectory { times: sample_times.to_vec(), states, truncation, steps_accepted: accepted, steps_rejected: rejected })
}
