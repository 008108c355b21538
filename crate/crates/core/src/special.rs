//! Bessel functions of the first kind for integer order.
//!
//! Values are obtained with Miller's downward recurrence normalised by
//! `J_0(x) + 2 Σ_k J_{2k}(x) = 1`, which is stable for all orders at once.

/// `J_0(x) ..= J_{max_order}(x)`.
pub fn bessel_j_orders(x: f64, max_order: usize) -> Vec<f64> {
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    if ax < 1e-8 {
        // leading term of the power series
        let mut term = 1.0;
        for (n, slot) in out.iter_mut().enumerate() {
            if n > 0 {
                term *= 0.5 * ax / n as f64;
            }
            *slot = term;
        }
    } else {
        let top = max_order.max(ax.ceil() as usize);
        let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
        if start % 2 == 1 {
            start += 1;
        }
        let mut j_next = 0.0;
        let mut j_cur = 1e-30;
        let mut even_sum = 0.0;
        for k in (1..=start).rev() {
            let j_prev = 2.0 * k as f64 / ax * j_cur - j_next;
            j_next = j_cur;
            j_cur = j_prev;
            // j_cur now holds the (unnormalised) J_{k-1}
            let order = k - 1;
            if order <= max_order {
                out[order] = j_cur;
            }
            if order > 0 && order % 2 == 0 {
                even_sum += j_cur;
            }
            if j_cur.abs() > 1e250 {
                j_cur *= 1e-250;
                j_next *= 1e-250;
                even_sum *= 1e-250;
                for v in out.iter_mut() {
                    *v *= 1e-250;
                }
            }
        }
        let norm = j_cur + 2.0 * even_sum;
        for v in out.iter_mut() {
            *v /= norm;
        }
    }
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n`.
pub fn bessel_j(order: i32, x: f64) -> f64 {
    let n = order.unsigned_abs() as usize;
    let value = bessel_j_orders(x, n)[n];
    if order < 0 && n % 2 == 1 {
        -value
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an independent arbitrary-precision evaluation.
    const REFERENCE: &[(i32, f64, f64)] = &[
        (0, 0.8125, 0.8416468202051992),
        (1, 0.8125, 0.3736359785502159),
        (2, 0.8125, 0.07807251161071686),
        (3, 0.8125, 0.010721001687159415),
        (5, 3.0, 0.043028434877047585),
        (0, 10.0, -0.24593576445134832),
        (12, 1.0, 4.999718179448425e-13),
    ];

    #[test]
    fn matches_reference_values() {
        for &(n, x, expected) in REFERENCE {
            let got = bessel_j(n, x);
            let tol = 1e-13 * expected.abs().max(1e-3);
            assert!((got - expected).abs() < tol, "J_{n}({x}) = {got}, expected {expected}");
        }
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(1, 0.0), 0.0);
        assert_eq!(bessel_j(2, 0.0), 0.0);
    }

    #[test]
    fn symmetry_relations() {
        for &x in &[0.3, 1.7, 4.2] {
            for n in 0..6 {
                let jn = bessel_j(n, x);
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert!((bessel_j(-n, x) - sign * jn).abs() < 1e-15);
                assert!((bessel_j(n, -x) - sign * jn).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn small_argument_series() {
        let x = 0.05;
        let j2 = bessel_j(2, x);
        let series = x * x / 8.0 - x.powi(4) / 96.0;
        assert!((j2 - series).abs() < 1e-10);
        let tiny = bessel_j(2, 1e-9);
        assert!((tiny - 1.25e-19).abs() < 1e-30);
    }

    #[test]
    fn neumann_sum_rule() {
        // J_0^2 + 2 Σ J_n^2 = 1
        for &x in &[0.5, 2.0, 7.5] {
            let j = bessel_j_orders(x, 60);
            let s: f64 = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-13, "x = {x}: {s}");
        }
    }
}
