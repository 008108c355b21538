use super::{PhaseSpaceGrid, ProjectionBasis, WignerError, WignerGrid};
use crate::dirac::{Spinor, SpinorMomentumState};
use crate::fock::{gamma_from_xp, FactoredDensity};
use crate::linalg::{hermiticity_error, trace, CMatrix};
use crate::quadrature::cubic_interpolate;
use crate::C64;
use rayon::prelude::*;
use std::f64::consts::FRAC_1_PI;

/// Extra Fock levels kept beyond the density matrix when summing displaced parities.
pub const DEFAULT_PAD: usize = 8;

const MAX_EXTRA_LEVELS: usize = 600;
const PARITY_RESIDUAL: f64 = 1e-10;

/// `W_b(x,p) = (1/π)∫dv φ_b*(p+v) φ_b(p−v) e^{−2ivx}` with `φ_b(p) = ⟨b|ψ(p)⟩`.
///
/// `v` runs over multiples of the momentum spacing; `φ_b` between nodes is
/// obtained by cubic interpolation and is zero outside the momentum grid.
pub fn conditional_wigner(
    state: &SpinorMomentumState,
    b: &Spinor,
    grid: &PhaseSpaceGrid,
) -> Result<WignerGrid, WignerError> {
    grid.validate()?;
    let phi = state.project(b);
    let n = phi.len();
    let edge = phi[0].norm().max(phi[n - 1].norm());
    if edge > 1e-6 {
        return Err(WignerError::EdgeLeakage { amplitude: edge });
    }
    let mg = state.grid();
    let weight: f64 = (0..n).map(|k| mg.weight(k) * phi[k].norm_sqr()).sum();
    let values = wigner_of_wavefunction(&phi, mg.p_min(), mg.dp(), grid);
    WignerGrid::new(*grid, values, weight.min(1.0))
}

/// Sum of the two conditional Wigner functions; independent of the basis.
pub fn unconditional_wigner(
    state: &SpinorMomentumState,
    basis: &ProjectionBasis,
    grid: &PhaseSpaceGrid,
) -> Result<WignerGrid, WignerError> {
    let a = conditional_wigner(state, &basis.plus(), grid)?;
    let b = conditional_wigner(state, &basis.minus(), grid)?;
    let values = a.values().iter().zip(b.values()).map(|(u, v)| u + v).collect();
    WignerGrid::new(*grid, values, (a.weight() + b.weight()).min(1.0))
}

fn wigner_of_wavefunction(phi: &[C64], p0: f64, h: f64, grid: &PhaseSpaceGrid) -> Vec<f64> {
    let p_hi = p0 + (phi.len() - 1) as f64 * h;
    let xs = grid.xs();
    let rows: Vec<Vec<f64>> = grid
        .ps()
        .into_par_iter()
        .map(|p| {
            let reach = (p - p0).min(p_hi - p);
            if reach < 0.0 {
                return vec![0.0; xs.len()];
            }
            let k_max = (reach / h + 1e-9).floor() as usize;
            let f: Vec<C64> = (0..=k_max)
                .map(|k| {
                    let v = k as f64 * h;
                    cubic_interpolate(phi, p0, h, p + v).conj() * cubic_interpolate(phi, p0, h, p - v)
                })
                .collect();
            xs.iter()
                .map(|&x| {
                    let step = C64::from_polar(1.0, -2.0 * h * x);
                    let mut z = step;
                    let mut acc = C64::new(0.0, 0.0);
                    for (k, fk) in f.iter().enumerate().skip(1) {
                        if k % 256 == 0 {
                            z = C64::from_polar(1.0, -2.0 * h * x * k as f64);
                        }
                        acc += fk * z;
                        z *= step;
                    }
                    h * FRAC_1_PI * (f[0].re + 2.0 * acc.re)
                })
                .collect()
        })
        .collect();
    let mut values = vec![0.0; grid.len()];
    for (j, row) in rows.iter().enumerate() {
        for (i, w) in row.iter().enumerate() {
            values[i * grid.n_p() + j] = *w;
        }
    }
    values
}

/// `W(x,p) = (1/π) Σ_n (−1)^n P_n(γ)` with `γ = (x + ip)/√2`.
pub fn wigner_from_fock_density(rho: &CMatrix, grid: &PhaseSpaceGrid) -> Result<WignerGrid, WignerError> {
    wigner_from_fock_density_with_pad(rho, grid, DEFAULT_PAD)
}

/// As [`wigner_from_fock_density`]; the parity sum starts `pad` levels above
/// the density-matrix cutoff and is extended until the displaced populations
/// account for the trace to 1e−10, which bounds the error of the alternating sum.
pub fn wigner_from_fock_density_with_pad(
    rho: &CMatrix,
    grid: &PhaseSpaceGrid,
    pad: usize,
) -> Result<WignerGrid, WignerError> {
    grid.validate()?;
    let tr = validate_fock_density(rho)?;
    let dim = rho.nrows();
    let factored = FactoredDensity::new(rho);
    let values: Result<Vec<f64>, WignerError> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / grid.n_p(), idx % grid.n_p());
            parity_sum(&factored, tr, gamma_from_xp(grid.x(i), grid.p(j)), dim - 1 + pad.max(1))
        })
        .collect();
    WignerGrid::new(*grid, values?, tr.min(1.0))
}

pub(crate) fn validate_fock_density(rho: &CMatrix) -> Result<f64, WignerError> {
    if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
        return Err(WignerError::InvalidDensity("matrix must be square and nonempty".into()));
    }
    let herm = hermiticity_error(rho);
    if herm > 1e-10 {
        return Err(WignerError::InvalidDensity(format!("not Hermitian (error {herm:e})")));
    }
    let tr = trace(rho).re;
    if (tr - 1.0).abs() > 1e-8 {
        return Err(WignerError::InvalidDensity(format!("trace {tr} differs from 1")));
    }
    let n = rho.nrows() - 1;
    let tail = rho[(n, n)].re;
    if n > 0 && tail >= 1e-4 {
        return Err(WignerError::TruncationError { tail });
    }
    Ok(tr)
}

fn parity_sum(rho: &FactoredDensity, tr: f64, gamma: C64, start: usize) -> Result<f64, WignerError> {
    let limit = rho.dim() + MAX_EXTRA_LEVELS;
    let mut n_out = start;
    loop {
        let pops = rho.displaced_populations(gamma, n_out);
        let total: f64 = pops.iter().sum();
        let alt = |upto: usize| -> f64 {
            pops[..=upto].iter().enumerate().map(|(n, p)| if n % 2 == 0 { *p } else { -*p }).sum::<f64>()
        };
        if (tr - total).abs() <= PARITY_RESIDUAL || n_out >= limit {
            let w = FRAC_1_PI * alt(n_out);
            if (tr - total).abs() > PARITY_RESIDUAL {
                let change = (w - FRAC_1_PI * alt(n_out - 8)).abs();
                if change > 1e-6 {
                    return Err(WignerError::PadInsufficient { change });
                }
            }
            return Ok(w);
        }
        n_out = (n_out + n_out / 2 + 8).min(limit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::{evolve, positive_branch_state, propagator, spinor, DiracParams, MomentumGrid};
    use crate::fock::{coherent_amplitudes, displacement_truncated, parity};
    use crate::linalg::{c, dagger, outer, CVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::square(3.0, 25).unwrap()
    }

    fn fock_state(amps: &[C64], dim: usize) -> CMatrix {
        let mut v = CVector::zeros(dim);
        for (k, a) in amps.iter().enumerate() {
            v[k] = *a;
        }
        outer(&v)
    }

    #[test]
    fn vacuum_is_gaussian() {
        let rho = fock_state(&[c(1.0, 0.0)], 12);
        let g = small_grid();
        let w = wigner_from_fock_density(&rho, &g).unwrap();
        for i in 0..g.n_x() {
            for j in 0..g.n_p() {
                let (x, p) = (g.x(i), g.p(j));
                assert!((w.at(i, j) - FRAC_1_PI * (-x * x - p * p).exp()).abs() < 1e-10);
            }
        }
        assert!((w.at(12, 12) - FRAC_1_PI).abs() < 1e-14);
    }

    #[test]
    fn single_photon_is_negative_at_origin() {
        let rho = fock_state(&[c(0.0, 0.0), c(1.0, 0.0)], 10);
        let g = PhaseSpaceGrid::square(1.0, 3).unwrap();
        let w = wigner_from_fock_density(&rho, &g).unwrap();
        assert!((w.at(1, 1) + FRAC_1_PI).abs() < 1e-14);
    }

    #[test]
    fn coherent_state_centred_at_p_two() {
        let alpha = c(0.0, 2f64.sqrt());
        let rho = fock_state(&coherent_amplitudes(alpha, 30), 30);
        let g = small_grid();
        let w = wigner_from_fock_density(&rho, &g).unwrap();
        for i in 0..g.n_x() {
            for j in 0..g.n_p() {
                let (x, p) = (g.x(i), g.p(j));
                let exact = FRAC_1_PI * (-x * x - (p - 2.0) * (p - 2.0)).exp();
                assert!((w.at(i, j) - exact).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn parity_sum_matches_displaced_parity_oracle() {
        // (1/π) Tr[ρ D(γ) Π D(γ)†] with a large truncated exponential
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dim = 12;
        let v = CVector::from_fn(dim, |k, _| {
            if k < 8 { c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) } else { c(0.0, 0.0) }
        });
        let v = v.unscale(v.norm());
        let rho = outer(&v);
        let big = 220;
        let mut rho_big = CMatrix::zeros(big, big);
        rho_big.view_mut((0, 0), (dim, dim)).copy_from(&rho);
        let pi_big = parity(big);
        let g = PhaseSpaceGrid::square(4.5, 3).unwrap();
        let w = wigner_from_fock_density(&rho, &g).unwrap();
        for i in 0..g.n_x() {
            for j in 0..g.n_p() {
                let d = displacement_truncated(gamma_from_xp(g.x(i), g.p(j)), big);
                let oracle = FRAC_1_PI * trace(&(&rho_big * &d * &pi_big * dagger(&d))).re;
                assert!((w.at(i, j) - oracle).abs() < 1e-9, "{} vs {oracle}", w.at(i, j));
            }
        }
    }

    #[test]
    fn truncation_detected() {
        let mut rho = CMatrix::zeros(3, 3);
        rho[(0, 0)] = c(0.5, 0.0);
        rho[(2, 2)] = c(0.5, 0.0);
        assert!(matches!(wigner_from_fock_density(&rho, &small_grid()), Err(WignerError::TruncationError { .. })));
    }

    fn gaussian_state(x0: f64, s: Spinor) -> SpinorMomentumState {
        let grid = MomentumGrid::around(1.0, 1.0).unwrap();
        SpinorMomentumState::gaussian(grid, 1.0, 1.0 / 2f64.sqrt(), x0, s).unwrap()
    }

    #[test]
    fn product_state_projections() {
        let s = gaussian_state(0.5, spinor::plus_x());
        let g = small_grid();
        let wx = conditional_wigner(&s, &spinor::plus_x(), &g).unwrap();
        assert!((wx.weight() - 1.0).abs() < 1e-12);
        assert!(wx.min_value() > -1e-9);
        // minimum-uncertainty packet: W = (1/π) exp(−(x−x0)² − (p−p0)²)
        for i in 0..g.n_x() {
            for j in 0..g.n_p() {
                let (x, p) = (g.x(i), g.p(j));
                let exact = FRAC_1_PI * (-(x - 0.5) * (x - 0.5) - (p - 1.0) * (p - 1.0)).exp();
                assert!((wx.at(i, j) - exact).abs() < 1e-8);
            }
        }
        let wm = conditional_wigner(&s, &spinor::minus_x(), &g).unwrap();
        assert!(wm.weight() < 1e-20);
        assert!(wm.values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn unconditional_is_basis_independent() {
        let params = DiracParams::new(1.0, 1.0).unwrap();
        let s = evolve(&gaussian_state(0.0, spinor::plus_x()), 3.0, &params);
        let g = small_grid();
        let a = unconditional_wigner(&s, &ProjectionBasis::energy(), &g).unwrap();
        let b = unconditional_wigner(&s, &ProjectionBasis::x(), &g).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-9);
        assert!((a.weight() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn positive_branch_shows_interference() {
        let params = DiracParams::new(1.0, 1.0).unwrap();
        let grid = MomentumGrid::around(1.0, 1.0).unwrap();
        let g = PhaseSpaceGrid::default();
        for t in [2.0, 4.0] {
            let s = positive_branch_state(1.0, 1.0, |p| -params.energy(p) * t, grid, &params).unwrap();
            for b in [spinor::excited(), spinor::ground()] {
                assert!(conditional_wigner(&s, &b, &g).unwrap().min_value() < 0.0);
            }
            if t == 4.0 {
                assert!(unconditional_wigner(&s, &ProjectionBasis::energy(), &g).unwrap().min_value() < 0.0);
            }
        }
    }

    #[test]
    fn conditional_matches_dense_quadrature_oracle() {
        // analytic amplitudes at arbitrary momenta, fine Riemann sum over v
        let params = DiracParams::new(1.0, 0.8).unwrap();
        let (p0, dp, x0, t) = (1.2, 0.7, -0.4, 2.5);
        let s0 = spinor::plus_x();
        let amp = |p: f64| -> C64 {
            let u = propagator(p, t, &params);
            let norm = (dp * (2.0 * std::f64::consts::PI).sqrt()).powf(-0.5);
            let g = C64::from_polar(norm * (-(p - p0) * (p - p0) / (4.0 * dp * dp)).exp(), -p * x0);
            let b = spinor::excited();
            b[0].conj() * (u[0][0] * s0[0] + u[0][1] * s0[1]) * g + b[1].conj() * (u[1][0] * s0[0] + u[1][1] * s0[1]) * g
        };
        let grid = MomentumGrid::around(p0, dp).unwrap();
        let state = evolve(&SpinorMomentumState::gaussian(grid, p0, dp, x0, s0).unwrap(), t, &params);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let x = rng.random_range(-3.0..3.0);
            let p = rng.random_range(-2.0..4.0);
            let g = PhaseSpaceGrid::new(x, x + 1.0, 2, p, p + 1.0, 2).unwrap();
            let w = conditional_wigner(&state, &spinor::excited(), &g).unwrap().at(0, 0);
            let h = 2e-4;
            let mut acc = 0.0;
            let mut v = -12.0;
            while v <= 12.0 {
                acc += (amp(p + v).conj() * amp(p - v) * C64::from_polar(1.0, -2.0 * v * x)).re;
                v += h;
            }
            let oracle = acc * h * FRAC_1_PI;
            assert!((w - oracle).abs() < 1e-6, "({x},{p}): {w} vs {oracle}");
        }
    }

    #[test]
    fn representations_agree() {
        // |i√2⟩ ⊗ |X⟩ in Fock space versus its momentum wavefunction
        let alpha = c(0.0, 2f64.sqrt());
        let amps = coherent_amplitudes(alpha, 40);
        let grid = MomentumGrid::new(-10.0, 14.0, 4096).unwrap();
        let phi = crate::fock::momentum_wavefunction(&amps, &grid.values());
        let s = SpinorMomentumState::product(grid, &phi, spinor::plus_x()).unwrap();
        let g = small_grid();
        let a = unconditional_wigner(&s, &ProjectionBasis::energy(), &g).unwrap();
        let b = wigner_from_fock_density(&fock_state(&amps, 40), &g).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-4);
    }

    #[test]
    fn edge_leakage_rejected() {
        let grid = MomentumGrid::new(-1.0, 3.0, 256).unwrap();
        let s = SpinorMomentumState::gaussian(grid, 1.0, 1.0, 0.0, spinor::excited()).unwrap();
        assert!(matches!(
            conditional_wigner(&s, &spinor::excited(), &small_grid()),
            Err(WignerError::EdgeLeakage { .. })
        ));
    }
}
