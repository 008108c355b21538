//! Truncated Fock-space operators for a single bosonic mode.
//!
//! Quadratures follow `x = (a† + a)/√2`, `p = i(a† − a)/√2`, so `[x, p] = i`.
//! In the momentum representation `⟨p|n⟩ = (−i)^n ψ_n(p)` with `ψ_n` the
//! Hermite functions.

use crate::linalg::{c, hermitian_eigen, CMatrix, CVector};
use crate::C64;

/// Annihilation operator on `dim` Fock levels.
pub fn annihilation(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn creation(dim: usize) -> CMatrix {
    annihilation(dim).adjoint()
}

pub fn number(dim: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(dim, (0..dim).map(|n| c(n as f64, 0.0))))
}

/// Position quadrature `(a† + a)/√2`.
pub fn position(dim: usize) -> CMatrix {
    let a = annihilation(dim);
    (&a + a.adjoint()).map(|z| z * std::f64::consts::FRAC_1_SQRT_2)
}

/// Momentum quadrature `i(a† − a)/√2`.
pub fn momentum(dim: usize) -> CMatrix {
    let a = annihilation(dim);
    (a.adjoint() - &a).map(|z| z * c(0.0, std::f64::consts::FRAC_1_SQRT_2))
}

/// Photon-parity operator `(−1)^{a†a}`.
pub fn parity(dim: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        dim,
        (0..dim).map(|n| c(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)),
    ))
}

/// Coherent-state amplitudes `e^{−|α|²/2} α^n / √n!` for `n < dim`.
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(dim);
    let mut amp = C64::from(( -0.5 * alpha.norm_sqr()).exp());
    for n in 0..dim {
        if n > 0 {
            amp = amp * alpha / (n as f64).sqrt();
        }
        out.push(amp);
    }
    out
}

/// Phase-space displacement `γ = (x + i p)/√2`.
#[inline]
pub fn gamma_from_xp(x: f64, p: f64) -> C64 {
    C64::new(x, p) * std::f64::consts::FRAC_1_SQRT_2
}

/// Displacement operator `exp(α a† − α* a)` by matrix exponential of the
/// generator truncated to `dim` levels.
///
/// Only the low-lying block is accurate; the truncation error grows with
/// `|α|` and must be controlled by the caller.
pub fn displacement_truncated(alpha: C64, dim: usize) -> CMatrix {
    let a = annihilation(dim);
    let generator = a.adjoint().map(|z| z * alpha) - a.map(|z| z * alpha.conj());
    generator.exp()
}

/// Exact matrix elements `⟨m|D(α)|n⟩` for `m ≤ row_max`, `n ≤ col_max`.
///
/// For `m ≥ n`, `⟨m|D|n⟩ = √(n!/m!) α^{m−n} e^{−|α|²/2} L_n^{(m−n)}(|α|²)`;
/// the upper triangle uses `α → −α*` with the roles of `m` and `n` swapped.
/// Each diagonal is filled by the Laguerre recurrence in the lower index.
pub fn displacement_block(alpha: C64, row_max: usize, col_max: usize) -> CMatrix {
    let rows = row_max + 1;
    let cols = col_max + 1;
    let mut d = CMatrix::zeros(rows, cols);
    let r = alpha.norm();
    if r == 0.0 {
        for k in 0..rows.min(cols) {
            d[(k, k)] = c(1.0, 0.0);
        }
        return d;
    }
    let x = r * r;
    let ln_r = r.ln();
    let mut fill = |offset: usize, len: usize, phase: C64, lower: bool| {
        // f_k = √(k!/(k+offset)!) r^offset e^{−x/2}, L_k^{(offset)}(x)
        let mut ln_f = offset as f64 * ln_r - 0.5 * x - 0.5 * ln_factorial(offset);
        let a = offset as f64;
        let (mut l_prev, mut l) = (0.0, 1.0);
        for k in 0..len {
            if k > 0 {
                let kf = (k - 1) as f64;
                let next = ((2.0 * kf + 1.0 + a - x) * l - (kf + a) * l_prev) / (kf + 1.0);
                l_prev = l;
                l = next;
                ln_f += 0.5 * ((k as f64).ln() - (k as f64 + a).ln());
            }
            let v = phase * (ln_f.exp() * l);
            if lower {
                d[(k + offset, k)] = v;
            } else {
                d[(k, k + offset)] = v;
            }
        }
    };
    let unit = alpha / r;
    for offset in 0..rows {
        let len = (rows - offset).min(cols);
        fill(offset, len, unit.powi(offset as i32), true);
    }
    let unit_up = -unit.conj();
    for offset in 1..cols {
        let len = (cols - offset).min(rows);
        fill(offset, len, unit_up.powi(offset as i32), false);
    }
    d
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Displaced photon-number populations `P_n(γ) = ⟨n|D(−γ) ρ D(γ)|n⟩` for `n ≤ n_out`.
///
/// `ρ` lives on `dim` levels; `n_out` may exceed `dim − 1`.
pub fn displaced_populations(rho: &CMatrix, gamma: C64, n_out: usize) -> Vec<f64> {
    let dim = rho.nrows();
    let d = displacement_block(gamma, dim - 1, n_out);
    let rd = rho * &d;
    (0..=n_out)
        .map(|n| {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..dim {
                acc += d[(j, n)].conj() * rd[(j, n)];
            }
            acc.re
        })
        .collect()
}

/// `ρ = Σ_k λ_k |v_k⟩⟨v_k|` with eigenvalues below 1e−14 in magnitude dropped,
/// so that displaced populations of a low-rank density cost `O(rank)` columns.
#[derive(Debug, Clone)]
pub struct FactoredDensity {
    weights: Vec<f64>,
    vectors: CMatrix,
}

impl FactoredDensity {
    pub fn new(rho: &CMatrix) -> Self {
        let (values, vecs) = hermitian_eigen(rho);
        let keep: Vec<usize> = (0..values.len()).filter(|&k| values[k].abs() > 1e-14).collect();
        let mut vectors = CMatrix::zeros(rho.nrows(), keep.len());
        for (dst, &k) in keep.iter().enumerate() {
            vectors.set_column(dst, &vecs.column(k));
        }
        Self { weights: keep.iter().map(|&k| values[k]).collect(), vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    /// Same as [`displaced_populations`] on the original density.
    pub fn displaced_populations(&self, gamma: C64, n_out: usize) -> Vec<f64> {
        let d = displacement_block(gamma, self.dim() - 1, n_out);
        let w = d.ad_mul(&self.vectors);
        (0..=n_out)
            .map(|n| self.weights.iter().enumerate().map(|(k, l)| l * w[(n, k)].norm_sqr()).sum())
            .collect()
    }
}

/// Hermite functions `ψ_0(q) ..= ψ_{max_n}(q)`.
pub fn hermite_functions(q: f64, max_n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_n + 1);
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * q * q).exp();
    out.push(psi0);
    if max_n == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * q * psi0);
    for n in 1..max_n {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * q * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Momentum-space wavefunction `Σ_n c_n ⟨p|n⟩` of a Fock amplitude vector,
/// sampled at the given momenta.
pub fn momentum_wavefunction(amplitudes: &[C64], momenta: &[f64]) -> Vec<C64> {
    let max_n = amplitudes.len().saturating_sub(1);
    // (−i)^n
    let phases: Vec<C64> = (0..amplitudes.len())
        .map(|n| match n % 4 {
            0 => c(1.0, 0.0),
            1 => c(0.0, -1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, 1.0),
        })
        .collect();
    momenta
        .iter()
        .map(|&p| {
            let h = hermite_functions(p, max_n);
            amplitudes
                .iter()
                .zip(&phases)
                .zip(&h)
                .map(|((a, ph), hn)| a * ph * *hn)
                .sum()
        })
        .collect()
}
