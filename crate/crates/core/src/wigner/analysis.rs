use super::{WignerError, WignerGrid};
use serde::{Deserialize, Serialize};

/// Default minimum half-plane weight for [`discriminate_wavepackets`].
pub const DEFAULT_INDISTINCT_THRESHOLD: f64 = 0.05;

/// `P(x_i) = Σ_j W(x_i, p_j) w_j`.
pub fn marginal_x(w: &WignerGrid) -> Vec<f64> {
    let g = w.grid();
    (0..g.n_x()).map(|i| (0..g.n_p()).map(|j| g.wp(j) * w.at(i, j)).sum()).collect()
}

/// Number of well-separated peaks in a sampled density. Local maxima below 5%
/// of the global maximum are ignored, and neighbouring peaks merge unless the
/// valley between them drops below 90% of the lower peak.
pub fn count_modes(values: &[f64]) -> usize {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return 0;
    }
    let n = values.len();
    let is_peak = |k: usize| {
        let left = k == 0 || values[k] > values[k - 1];
        let right = k + 1 == n || values[k] >= values[k + 1];
        left && right && values[k] >= 0.05 * top
    };
    let mut peaks: Vec<usize> = Vec::new();
    for k in (0..n).filter(|&k| is_peak(k)) {
        if let Some(&last) = peaks.last() {
            let valley = values[last..=k].iter().copied().fold(f64::INFINITY, f64::min);
            if valley >= 0.9 * values[last].min(values[k]) {
                if values[k] > values[last] {
                    *peaks.last_mut().expect("nonempty") = k;
                }
                continue;
            }
        }
        peaks.push(k);
    }
    peaks.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub min_value: f64,
    /// `Σ |min(W, 0)| dx dp`.
    pub negative_volume: f64,
}

/// Weight-normalised first moments, minimum and negative volume.
pub fn moments(w: &WignerGrid) -> Result<Moments, WignerError> {
    if w.weight() < 1e-12 {
        return Err(WignerError::ZeroWeight { weight: w.weight() });
    }
    let g = w.grid();
    let (mut sx, mut sp, mut neg) = (0.0, 0.0, 0.0);
    for i in 0..g.n_x() {
        for j in 0..g.n_p() {
            let a = g.wx(i) * g.wp(j);
            let v = w.at(i, j);
            sx += a * g.x(i) * v;
            sp += a * g.p(j) * v;
            if v < 0.0 {
                neg -= a * v;
            }
        }
    }
    Ok(Moments { mean_x: sx / w.weight(), mean_p: sp / w.weight(), min_value: w.min_value(), negative_volume: neg })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Positive,
    Negative,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavepacketSplit {
    pub pos: HalfPlaneMoments,
    pub neg: HalfPlaneMoments,
}

/// Moments over `x > 0` and `x < 0` separately, each normalised by its own
/// half-plane integral. A column at exactly `x = 0` is shared equally.
///
/// A side whose integral does not exceed `threshold` is reported as
/// [`WignerError::Indistinct`], carrying the other side when it is usable.
pub fn discriminate_wavepackets(w: &WignerGrid, threshold: f64) -> Result<WavepacketSplit, WignerError> {
    let g = w.grid();
    let mut acc = [[0.0f64; 3]; 2];
    for i in 0..g.n_x() {
        let x = g.x(i);
        let share = if x > 0.0 {
            [1.0, 0.0]
        } else if x < 0.0 {
            [0.0, 1.0]
        } else {
            [0.5, 0.5]
        };
        for j in 0..g.n_p() {
            let a = g.wx(i) * g.wp(j) * w.at(i, j);
            for s in 0..2 {
                acc[s][0] += share[s] * a;
                acc[s][1] += share[s] * a * x;
                acc[s][2] += share[s] * a * g.p(j);
            }
        }
    }
    let half = |a: [f64; 3]| HalfPlaneMoments { mean_x: a[1] / a[0], mean_p: a[2] / a[0], weight: a[0] };
    let (pos_ok, neg_ok) = (acc[0][0] > threshold, acc[1][0] > threshold);
    match (pos_ok, neg_ok) {
        (true, true) => Ok(WavepacketSplit { pos: half(acc[0]), neg: half(acc[1]) }),
        (false, true) => Err(WignerError::Indistinct { side: Side::Positive, available: Some(half(acc[1])) }),
        (true, false) => Err(WignerError::Indistinct { side: Side::Negative, available: Some(half(acc[0])) }),
        (false, false) => Err(WignerError::Indistinct { side: Side::Both, available: None }),
    }
}

/// `P_e W_e + P_g W_g` for population-normalised conditional Wigner functions.
pub fn combine_conditional(w_e: &WignerGrid, w_g: &WignerGrid, p_e: f64, p_g: f64) -> Result<WignerGrid, WignerError> {
    if !w_e.grid().approx_eq(w_g.grid()) {
        return Err(WignerError::GridMismatch);
    }
    if (p_e + p_g - 1.0).abs() > 1e-6 || p_e < 0.0 || p_g < 0.0 {
        return Err(WignerError::InvalidWeights { p_e, p_g });
    }
    let values = w_e.values().iter().zip(w_g.values()).map(|(a, b)| p_e * a + p_g * b).collect();
    WignerGrid::new(*w_e.grid(), values, 1.0)
}
