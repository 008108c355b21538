use super::state::{gaussian_amplitude, DiracParams, MomentumGrid, Spinor, SpinorMomentumState};
use super::DiracError;
use crate::C64;

/// Energy, mixing angle and eigenvectors of `H_D(p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigensystem {
    pub energy: f64,
    pub angle: f64,
    /// `|φ₊(p)⟩ = (cos φ_p, i sin φ_p)`, eigenvalue `+E_p`.
    pub plus: Spinor,
    /// `|φ₋(p)⟩ = (i sin φ_p, cos φ_p)`, eigenvalue `−E_p`.
    pub minus: Spinor,
}

/// `φ_p = ½ atan2(p, m c)`; for `m = 0` this is `±π/4` with `φ_0 = 0`.
#[inline]
pub fn mixing_angle(p: f64, params: &DiracParams) -> f64 {
    0.5 * p.atan2(params.mc())
}

pub fn eigensystem(p: f64, params: &DiracParams) -> Eigensystem {
    let angle = mixing_angle(p, params);
    let (s, c) = angle.sin_cos();
    Eigensystem {
        energy: params.energy(p),
        angle,
        plus: [C64::new(c, 0.0), C64::new(0.0, s)],
        minus: [C64::new(0.0, s), C64::new(c, 0.0)],
    }
}

/// `H_D(p) = c p σ_y + m c² σ_z` as a row-major 2×2 array.
pub fn hamiltonian(p: f64, params: &DiracParams) -> [[C64; 2]; 2] {
    let cp = params.c() * p;
    let mc2 = params.rest_energy();
    [[C64::new(mc2, 0.0), C64::new(0.0, -cp)], [C64::new(0.0, cp), C64::new(-mc2, 0.0)]]
}

/// `U(p, t) = cos(E_p t) I − i sin(E_p t) H_D(p)/E_p`, and `I` at `E_p = 0`.
pub fn propagator(p: f64, t: f64, params: &DiracParams) -> [[C64; 2]; 2] {
    let e = params.energy(p);
    if e == 0.0 {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        return [[one, zero], [zero, one]];
    }
    let (s, c) = (e * t).sin_cos();
    let h = hamiltonian(p, params);
    let k = C64::new(0.0, -s / e);
    [
        [C64::new(c, 0.0) + k * h[0][0], k * h[0][1]],
        [k * h[1][0], C64::new(c, 0.0) + k * h[1][1]],
    ]
}

#[inline]
pub(crate) fn apply(u: &[[C64; 2]; 2], s: &Spinor) -> Spinor {
    [u[0][0] * s[0] + u[0][1] * s[1], u[1][0] * s[0] + u[1][1] * s[1]]
}

/// Exact evolution by `exp(−i H_D t)`; negative `t` evolves backwards.
pub fn evolve(state: &SpinorMomentumState, t: f64, params: &DiracParams) -> SpinorMomentumState {
    let grid = *state.grid();
    let mut out = state.clone();
    for k in 0..grid.len() {
        let u = propagator(grid.value(k), t, params);
        out.set_spinor(k, apply(&u, &state.spinor_at(k)));
    }
    out
}

/// Positive-energy wavepacket `e^{iθ(p)} ξ_p |φ₊(p)⟩`, with
/// `ξ_p = (δp√(2π))^{−1/2} exp(−(p−p0)²/(4δp²))`, renormalised on the grid.
///
/// `phase = |p| -E_p t` gives the packet evolved for a time `t`.
pub fn positive_branch_state(
    p0: f64,
    delta_p: f64,
    phase: impl Fn(f64) -> f64,
    grid: MomentumGrid,
    params: &DiracParams,
) -> Result<SpinorMomentumState, DiracError> {
    if !(delta_p > 0.0 && delta_p.is_finite()) {
        return Err(DiracError::InvalidParameter { name: "delta_p", reason: format!("must be > 0, got {delta_p}") });
    }
    let sigma = std::f64::consts::SQRT_2 * delta_p;
    let outside = 0.5 * statrs::function::erf::erfc((p0 - grid.p_min()) / sigma)
        + 0.5 * statrs::function::erf::erfc((grid.p_max() - p0) / sigma);
    if outside > 1e-6 {
        return Err(DiracError::GridTooNarrow { outside, p_min: grid.p_min(), p_max: grid.p_max() });
    }
    let mut up = Vec::with_capacity(grid.len());
    let mut down = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let p = grid.value(k);
        let amp = gaussian_amplitude(p, p0, delta_p, 0.0) * C64::from_polar(1.0, phase(p));
        let v = eigensystem(p, params).plus;
        up.push(amp * v[0]);
        down.push(amp * v[1]);
    }
    let mut state = SpinorMomentumState::from_components(grid, up, down)?;
    state.normalize();
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::super::state::spinor;
    use super::*;
    use crate::linalg::{c, unitary_propagator, CMatrix};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn matvec(h: &[[C64; 2]; 2], v: &Spinor) -> Spinor {
        apply(h, v)
    }

    #[test]
    fn zero_momentum_eigensystem() {
        let params = DiracParams::new(1.0, 1.0).unwrap();
        let e = eigensystem(0.0, &params);
        assert_eq!(e.energy, 1.0);
        assert_eq!(e.angle, 0.0);
        assert_eq!(e.plus, spinor::excited());
        assert_eq!(e.minus, spinor::ground());
    }

    #[test]
    fn massless_eigensystem() {
        let params = DiracParams::new(1.0, 0.0).unwrap();
        let e = eigensystem(1.0, &params);
        assert_eq!(e.energy, 1.0);
        assert!((e.angle - FRAC_PI_4).abs() < 1e-15);
        assert!((e.plus[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((e.plus[1] - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
        assert_eq!(mixing_angle(0.0, &params), 0.0);
        assert!((mixing_angle(-2.0, &params) + FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn eigenvectors_by_direct_multiplication() {
        let params = DiracParams::new(1.0, 1.0).unwrap();
        let e = eigensystem(1.0, &params);
        assert!((e.energy - 2f64.sqrt()).abs() < 1e-15);
        let h = hamiltonian(1.0, &params);
        let hv = matvec(&h, &e.plus);
        let hm = matvec(&h, &e.minus);
        for i in 0..2 {
            assert!((hv[i] - e.plus[i] * e.energy).norm() < 1e-14);
            assert!((hm[i] + e.minus[i] * e.energy).norm() < 1e-14);
        }
        // brute force: eigenvalues of the dense matrix
        let dense = CMatrix::from_row_slice(2, 2, &[h[0][0], h[0][1], h[1][0], h[1][1]]);
        let (vals, _) = crate::linalg::hermitian_eigen(&dense);
        assert!((vals[1] - 2f64.sqrt()).abs() < 1e-14 && (vals[0] + 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn completeness_and_orthogonality() {
        for &(p, m) in &[(0.3, 1.0), (-4.0, 0.2), (2.0, 0.0), (0.0, 0.0)] {
            let params = DiracParams::new(1.3, m).unwrap();
            let e = eigensystem(p, &params);
            assert!(spinor::inner(&e.plus, &e.minus).norm() < 1e-15);
            for i in 0..2 {
                for j in 0..2 {
                    let s = e.plus[i] * e.plus[j].conj() + e.minus[i] * e.minus[j].conj();
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((s - c(id, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rabi_limit_at_zero_momentum() {
        let params = DiracParams::new(1.0, 1.0).unwrap();
        let grid = MomentumGrid::new(-1.0, 1.0, 3).unwrap();
        let s = SpinorMomentumState::product(grid, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], spinor::plus_x()).unwrap();
        let out = evolve(&s, PI / 2.0, &params);
        let expected = spinor::minus_x();
        let got = out.spinor_at(1);
        for i in 0..2 {
            assert!((got[i] - expected[i] * c(0.0, -1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn identity_at_zero_time_and_degenerate_point() {
        let params = DiracParams::new(1.0, 0.0).unwrap();
        let u = propagator(0.0, 3.7, &params);
        assert_eq!(u[0][0], c(1.0, 0.0));
        assert_eq!(u[0][1], c(0.0, 0.0));
        let grid = MomentumGrid::around(1.0, 1.0).unwrap();
        let s = SpinorMomentumState::gaussian(grid, 1.0, 1.0, 0.4, spinor::plus_x()).unwrap();
        assert_eq!(evolve(&s, 0.0, &DiracParams::new(1.0, 1.0).unwrap()), s);
    }

    #[test]
    fn matches_diagonalisation_oracle() {
        let params = DiracParams::new(1.1, 0.7).unwrap();
        for &(p, t) in &[(0.4, 3.0), (-2.0, 10.0), (5.0, -1.3)] {
            let h = hamiltonian(p, &params);
            let dense = CMatrix::from_row_slice(2, 2, &[h[0][0], h[0][1], h[1][0], h[1][1]]);
            let oracle = unitary_propagator(&dense, t);
            let u = propagator(p, t, &params);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((u[i][j] - oracle[(i, j)]).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn reproduces_x_basis_closed_form() {
        // cos φ_t |X⟩ − i e^{−2iφ_p} sin φ_t |−X⟩
        let params = DiracParams::new(1.0, 0.8).unwrap();
        let (p, t) = (1.7, 2.3);
        let e = eigensystem(p, &params);
        let phi_t = e.energy * t;
        let got = apply(&propagator(p, t, &params), &spinor::plus_x());
        let k = C64::from_polar(1.0, -2.0 * e.angle) * c(0.0, -phi_t.sin());
        let x = spinor::plus_x();
        let mx = spinor::minus_x();
        for i in 0..2 {
            let expected = x[i] * phi_t.cos() + mx[i] * k;
            assert!((got[i] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn positive_branch_rejects_narrow_grid() {
        let params = DiracParams::new(1.0, 1.0).unwrap();
        let grid = MomentumGrid::new(-1.0, 3.0, 512).unwrap();
        let err = positive_branch_state(1.0, 1.0, |_| 0.0, grid, &params).unwrap_err();
        assert!(matches!(err, DiracError::GridTooNarrow { .. }));
        assert!(positive_branch_state(1.0, 0.0, |_| 0.0, grid, &params).is_err());
    }

    #[test]
    fn positive_branch_phase_evolution() {
        let params = DiracParams::new(1.0, 1.0).unwrap();
        let grid = MomentumGrid::around(1.0, 1.0).unwrap();
        let s0 = positive_branch_state(1.0, 1.0, |_| 0.0, grid, &params).unwrap();
        let t = 4.0;
        let evolved = evolve(&s0, t, &params);
        let shifted = positive_branch_state(1.0, 1.0, |p| -params.energy(p) * t, grid, &params).unwrap();
        assert!(evolved.max_abs_diff(&shifted) < 1e-10);
    }
}
