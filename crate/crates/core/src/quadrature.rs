//! Uniform-grid quadrature, differentiation and interpolation helpers.

use crate::C64;

/// Trapezoidal weight of sample `k` out of `n` on a grid with spacing `h`.
#[inline]
pub fn trapezoid_weight(k: usize, n: usize, h: f64) -> f64 {
    if k == 0 || k + 1 == n {
        0.5 * h
    } else {
        h
    }
}

/// Trapezoidal rule for uniformly spaced real samples.
pub fn trapezoid(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    samples.iter().enumerate().map(|(k, v)| trapezoid_weight(k, n, h) * v).sum()
}

/// Fourth-order central difference of uniformly spaced complex samples.
///
/// Samples outside the array are taken to be zero, so callers must make sure
/// the function has decayed at both edges.
pub fn central_derivative(samples: &[C64], h: f64) -> Vec<C64> {
    let n = samples.len();
    let at = |k: isize| -> C64 {
        if k < 0 || k as usize >= n {
            C64::new(0.0, 0.0)
        } else {
            samples[k as usize]
        }
    };
    (0..n as isize)
        .map(|k| (at(k - 2) - at(k - 1) * 8.0 + at(k + 1) * 8.0 - at(k + 2)) / (12.0 * h))
        .collect()
}

/// Four-point Lagrange interpolation of uniformly spaced complex samples
/// starting at `x0` with spacing `h`; zero outside the sampled interval.
pub fn cubic_interpolate(samples: &[C64], x0: f64, h: f64, x: f64) -> C64 {
    let n = samples.len();
    let s = (x - x0) / h;
    if !(s >= 0.0) || s > (n - 1) as f64 {
        return C64::new(0.0, 0.0);
    }
    let i = (s.floor() as usize).min(n - 2);
    let t = s - i as f64;
    // stencil i-1, i, i+1, i+2, clamped to a one-sided stencil at the edges
    let base = i.saturating_sub(1).min(n.saturating_sub(4));
    if n < 4 {
        return samples[i] * (1.0 - t) + samples[i + 1] * t;
    }
    let u = s - base as f64;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..4 {
        let mut w = 1.0;
        for m in 0..4 {
            if m != j {
                w *= (u - m as f64) / (j as f64 - m as f64);
            }
        }
        acc += samples[base + j] * w;
    }
    acc
}

/// Piecewise-linear interpolation; zero outside the sampled interval.
pub fn linear_interpolate(samples: &[C64], x0: f64, h: f64, x: f64) -> C64 {
    let n = samples.len();
    let s = (x - x0) / h;
    if !(s >= 0.0) || s > (n - 1) as f64 {
        return C64::new(0.0, 0.0);
    }
    let i = (s.floor() as usize).min(n - 2);
    let t = s - i as f64;
    samples[i] * (1.0 - t) + samples[i + 1] * t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_integrates_gaussian() {
        let h = 0.01;
        let xs: Vec<f64> = (0..2001).map(|k| -10.0 + k as f64 * h).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
        assert!((trapezoid(&ys, h) - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn derivative_of_plane_wave() {
        let h = 0.01;
        let k = 2.3;
        let f: Vec<C64> = (0..2001)
            .map(|j| {
                let x = -10.0 + j as f64 * h;
                C64::from_polar((-x * x / 2.0).exp(), k * x)
            })
            .collect();
        let d = central_derivative(&f, h);
        for j in (200..1800).step_by(97) {
            let x = -10.0 + j as f64 * h;
            let exact = f[j] * C64::new(-x, k);
            assert!((d[j] - exact).norm() < 1e-7);
        }
    }

    #[test]
    fn cubic_reproduces_cubics() {
        let h = 0.5;
        let poly = |x: f64| C64::new(x * x * x - 2.0 * x + 1.0, 0.5 * x * x);
        let s: Vec<C64> = (0..9).map(|k| poly(-1.0 + k as f64 * h)).collect();
        for &x in &[-1.0, -0.9, 0.2, 1.1, 2.7, 3.0] {
            assert!((cubic_interpolate(&s, -1.0, h, x) - poly(x)).norm() < 1e-12, "x = {x}");
        }
        assert_eq!(cubic_interpolate(&s, -1.0, h, 3.01), C64::new(0.0, 0.0));
        assert_eq!(cubic_interpolate(&s, -1.0, h, -1.01), C64::new(0.0, 0.0));
    }

    #[test]
    fn linear_hits_nodes() {
        let s = vec![C64::new(1.0, 0.0), C64::new(3.0, 1.0)];
        assert_eq!(linear_interpolate(&s, 0.0, 1.0, 0.5), C64::new(2.0, 0.5));
    }
}
