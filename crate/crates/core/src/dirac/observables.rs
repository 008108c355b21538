use super::dynamics::{hamiltonian, mixing_angle};
use super::state::{spinor, DiracParams, Spinor, SpinorMomentumState};
use super::DiracError;
use crate::quadrature::central_derivative;
use crate::C64;

/// Reduced 2×2 pseudospin density matrix, `(e, g)` ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudospinDensity {
    rho: [[C64; 2]; 2],
}

impl PseudospinDensity {
    /// Validates Hermiticity, unit trace (both to 1e−12) and eigenvalues in `[−1e−10, 1 + 1e−10]`.
    pub fn new(rho: [[C64; 2]; 2]) -> Result<Self, DiracError> {
        let herm = (rho[0][1] - rho[1][0].conj())
            .norm()
            .max(rho[0][0].im.abs())
            .max(rho[1][1].im.abs());
        if herm > 1e-12 {
            return Err(DiracError::InvalidDensity(format!("not Hermitian (error {herm:e})")));
        }
        let tr = rho[0][0].re + rho[1][1].re;
        if (tr - 1.0).abs() > 1e-12 {
            return Err(DiracError::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let d = Self { rho };
        let [lo, hi] = d.eigenvalues();
        if lo < -1e-10 || hi > 1.0 + 1e-10 {
            return Err(DiracError::InvalidDensity(format!("eigenvalues {lo}, {hi} outside [0, 1]")));
        }
        Ok(d)
    }

    pub fn from_spinor(s: &Spinor) -> Self {
        let n = spinor::norm_sqr(s);
        let rho = [
            [C64::new(s[0].norm_sqr() / n, 0.0), s[0] * s[1].conj() / n],
            [s[1] * s[0].conj() / n, C64::new(s[1].norm_sqr() / n, 0.0)],
        ];
        Self { rho }
    }

    pub fn maximally_mixed() -> Self {
        let h = C64::new(0.5, 0.0);
        let z = C64::new(0.0, 0.0);
        Self { rho: [[h, z], [z, h]] }
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho[0][0].re + self.rho[1][1].re
    }

    pub fn purity(&self) -> f64 {
        let r = &self.rho;
        r[0][0].re * r[0][0].re + r[1][1].re * r[1][1].re + 2.0 * r[0][1].norm_sqr()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.rho[0][0].re;
        let d = self.rho[1][1].re;
        let half = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + self.rho[0][1].norm_sqr()).sqrt();
        [half - r, half + r]
    }

    /// Bloch vector `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)`.
    pub fn bloch(&self) -> [f64; 3] {
        let b = self.rho[1][0];
        [2.0 * b.re, 2.0 * b.im, self.rho[0][0].re - self.rho[1][1].re]
    }

    /// Eigenvector of the largest eigenvalue.
    pub fn dominant_spinor(&self) -> Spinor {
        let [x, y, z] = self.bloch();
        let r = (x * x + y * y + z * z).sqrt();
        if r == 0.0 {
            return spinor::excited();
        }
        let (nx, ny, nz) = (x / r, y / r, z / r);
        // Bloch-sphere point (θ, φ) → (cos θ/2, e^{iφ} sin θ/2)
        let theta = nz.clamp(-1.0, 1.0).acos();
        let phi = ny.atan2(nx);
        [C64::new((0.5 * theta).cos(), 0.0), C64::from_polar((0.5 * theta).sin(), phi)]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.rho[i][j] - other.rho[i][j]).norm());
            }
        }
        m
    }
}

/// `ρ_q[i][j] = Σ_k amp_i(p_k) conj(amp_j(p_k)) w_k`.
pub fn reduced_pseudospin(state: &SpinorMomentumState) -> PseudospinDensity {
    let grid = state.grid();
    let (mut ee, mut gg, mut ge) = (0.0, 0.0, C64::new(0.0, 0.0));
    for k in 0..grid.len() {
        let w = grid.weight(k);
        let (u, d) = (state.up()[k], state.down()[k]);
        ee += w * u.norm_sqr();
        gg += w * d.norm_sqr();
        ge += d * u.conj() * w;
    }
    PseudospinDensity { rho: [[C64::new(ee, 0.0), ge.conj()], [ge, C64::new(gg, 0.0)]] }
}

/// Von Neumann entropy in bits; eigenvalues are clamped to `[0, 1]`.
pub fn entanglement_entropy(rho: &PseudospinDensity) -> f64 {
    let s: f64 = rho
        .eigenvalues()
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum();
    s.clamp(0.0, 1.0)
}

/// `⟨x⟩` with `x = i d/dp`, together with the imaginary part of the same sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionEstimate {
    pub mean: f64,
    pub imag_residue: f64,
}

pub fn mean_position_numeric(state: &SpinorMomentumState) -> Result<PositionEstimate, DiracError> {
    let edge = state.edge_amplitude();
    if edge > 1e-6 {
        return Err(DiracError::EdgeLeakage { amplitude: edge });
    }
    let grid = state.grid();
    let h = grid.dp();
    let du = central_derivative(state.up(), h);
    let dd = central_derivative(state.down(), h);
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..grid.len() {
        acc += (state.up()[k].conj() * du[k] + state.down()[k].conj() * dd[k]) * grid.weight(k);
    }
    let x = acc * C64::new(0.0, 1.0);
    Ok(PositionEstimate { mean: x.re, imag_residue: x.im })
}

/// Closed-form ingredients of `⟨x(t)⟩` for a product state `ξ_p ⊗ s`:
///
/// `⟨x(t)⟩ = ⟨x(0)⟩ + v_d t + Σ_p |ξ_p|² x_p [sin(2E_p t)⟨k_p⟩ + (1 − cos 2E_p t)⟨σ_x⟩]`
///
/// with `x_p = dφ_p/dp`, `h_p = sin 2φ_p σ_y + cos 2φ_p σ_z`, `k_p = cos 2φ_p σ_y − sin 2φ_p σ_z`
/// and drift `v_d = Σ_p |ξ_p|² (p c²/E_p) ⟨h_p⟩`. For `s = |X⟩` the drift and the `sin` term vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanPositionTerms {
    pub initial_position: f64,
    pub drift_velocity: f64,
    pub spinor: Spinor,
    sigma_x: f64,
    // per grid point: (2E_p, w_k |ξ_p|² x_p ⟨k_p⟩, w_k |ξ_p|² x_p)
    zb: Vec<(f64, f64, f64)>,
}

impl MeanPositionTerms {
    pub fn new(initial: &SpinorMomentumState, params: &DiracParams) -> Result<Self, DiracError> {
        let rho = reduced_pseudospin(initial);
        let s = rho.dominant_spinor();
        let xi = initial.project(&s);
        let mut deviation: f64 = 0.0;
        for (k, z) in xi.iter().enumerate() {
            let a = initial.spinor_at(k);
            deviation = deviation.max((a[0] - z * s[0]).norm()).max((a[1] - z * s[1]).norm());
        }
        if deviation > 1e-10 {
            return Err(DiracError::NotProductState { deviation });
        }
        let [sx, sy, sz] = PseudospinDensity::from_spinor(&s).bloch();
        let grid = initial.grid();
        let h = grid.dp();
        let dxi = central_derivative(&xi, h);
        let mc = params.mc();
        let c2 = params.c() * params.c();
        let mut x0 = 0.0;
        let mut drift = 0.0;
        let mut zb = Vec::with_capacity(grid.len());
        for k in 0..grid.len() {
            let p = grid.value(k);
            let w = grid.weight(k);
            x0 += w * (C64::new(0.0, 1.0) * xi[k].conj() * dxi[k]).re;
            let prob = w * xi[k].norm_sqr();
            let e = params.energy(p);
            let (s2, c2phi) = (2.0 * mixing_angle(p, params)).sin_cos();
            if e > 0.0 {
                drift += prob * (p * c2 / e) * (s2 * sy + c2phi * sz);
            }
            if mc > 0.0 {
                let xp = 0.5 * mc / (mc * mc + p * p);
                zb.push((2.0 * e, prob * xp * (c2phi * sy - s2 * sz), prob * xp));
            }
        }
        Ok(Self { initial_position: x0, drift_velocity: drift, spinor: s, sigma_x: sx, zb })
    }

    /// Oscillatory contribution at time `t`; zero when `m = 0`.
    pub fn zitterbewegung(&self, t: f64) -> f64 {
        self.zb
            .iter()
            .map(|&(two_e, a, b)| {
                let (s, c) = (two_e * t).sin_cos();
                a * s + b * self.sigma_x * (1.0 - c)
            })
            .sum()
    }

    pub fn at(&self, t: f64) -> f64 {
        self.initial_position + self.drift_velocity * t + self.zitterbewegung(t)
    }
}

pub fn mean_position_analytic(
    initial: &SpinorMomentumState,
    t: f64,
    params: &DiracParams,
) -> Result<f64, DiracError> {
    Ok(MeanPositionTerms::new(initial, params)?.at(t))
}

/// `⟨v⟩ = ⟨c σ_y⟩`, the expectation of `∂H_D/∂p`.
pub fn initial_velocity(state: &SpinorMomentumState, params: &DiracParams) -> f64 {
    let rho = reduced_pseudospin(state);
    params.c() * rho.bloch()[1]
}

pub fn energy_expectation(state: &SpinorMomentumState, params: &DiracParams) -> f64 {
    let grid = state.grid();
    let mut acc = 0.0;
    for k in 0..grid.len() {
        let h = hamiltonian(grid.value(k), params);
        let s = state.spinor_at(k);
        let hs = super::dynamics::apply(&h, &s);
        acc += grid.weight(k) * spinor::inner(&s, &hs).re;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::super::dynamics::{evolve, positive_branch_state};
    use super::super::state::MomentumGrid;
    use super::*;
    use crate::linalg::c;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn packet(p0: f64, dp: f64, x0: f64, s: Spinor) -> SpinorMomentumState {
        SpinorMomentumState::gaussian(MomentumGrid::around(p0, dp).unwrap(), p0, dp, x0, s).unwrap()
    }

    #[test]
    fn density_validation() {
        let z = c(0.0, 0.0);
        assert!(PseudospinDensity::new([[c(0.6, 0.0), z], [z, c(0.4, 0.0)]]).is_ok());
        assert!(PseudospinDensity::new([[c(0.6, 0.0), z], [z, c(0.5, 0.0)]]).is_err());
        assert!(PseudospinDensity::new([[c(0.5, 0.0), c(0.1, 0.0)], [c(0.2, 0.0), c(0.5, 0.0)]]).is_err());
        assert!(PseudospinDensity::new([[c(1.2, 0.0), z], [z, c(-0.2, 0.0)]]).is_err());
    }

    #[test]
    fn product_state_is_pure() {
        let s = packet(1.0, 1.0, 0.3, spinor::plus_x());
        let rho = reduced_pseudospin(&s);
        assert!((rho.purity() - 1.0).abs() < 1e-10);
        assert!(rho.max_abs_diff(&PseudospinDensity::from_spinor(&spinor::plus_x())) < 1e-10);
        assert!(entanglement_entropy(&rho) < 1e-6);
    }

    #[test]
    fn two_peak_state_is_maximally_mixed() {
        let grid = MomentumGrid::new(-1.0, 1.0, 3).unwrap();
        // trapezoid weights at the two ends are dp/2 = 0.5
        let a = c(1.0, 0.0);
        let z = c(0.0, 0.0);
        let s = SpinorMomentumState::from_components(grid, vec![a, z, z], vec![z, z, a]).unwrap();
        let rho = reduced_pseudospin(&s);
        assert!(rho.max_abs_diff(&PseudospinDensity::maximally_mixed()) < 1e-15);
        assert!((entanglement_entropy(&rho) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_limits() {
        assert_eq!(entanglement_entropy(&PseudospinDensity::from_spinor(&spinor::excited())), 0.0);
        assert_eq!(entanglement_entropy(&PseudospinDensity::maximally_mixed()), 1.0);
    }

    #[test]
    fn positive_branch_entropy_reference_values() {
        // independent fine-grid quadrature of ∫|ξ|²|φ₊⟩⟨φ₊|
        let params = DiracParams::new(1.0, 1.0).unwrap();
        for &(dp, expected) in
            &[(1.0, 0.36587836700264237), (0.5, 0.135207219717082), (2.0, 0.6451615339263265)]
        {
            let grid = MomentumGrid::around(1.0, dp).unwrap();
            let s = positive_branch_state(1.0, dp, |_| 0.0, grid, &params).unwrap();
            let got = entanglement_entropy(&reduced_pseudospin(&s));
            assert!((got - expected).abs() < 1e-8, "δp={dp}: {got} vs {expected}");
        }
    }

    #[test]
    fn plane_wave_limit_is_pure() {
        let params = DiracParams::new(1.0, 1.0).unwrap();
        let grid = MomentumGrid::new(0.98, 1.02, 4096).unwrap();
        let s = positive_branch_state(1.0, 1e-3, |_| 0.0, grid, &params).unwrap();
        assert!(entanglement_entropy(&reduced_pseudospin(&s)) < 1e-4);
    }

    #[test]
    fn positive_branch_density_time_invariant() {
        let params = DiracParams::new(1.0, 1.0).unwrap();
        let grid = MomentumGrid::around(1.0, 1.0).unwrap();
        let s0 = positive_branch_state(1.0, 1.0, |_| 0.0, grid, &params).unwrap();
        let r0 = reduced_pseudospin(&s0);
        for t in [0.5, 3.0, 40.0, 1234.5] {
            assert!(reduced_pseudospin(&evolve(&s0, t, &params)).max_abs_diff(&r0) < 1e-12);
        }
    }

    #[test]
    fn long_time_entropy_tends_to_one() {
        // ω = √2 η p0 with c = √2 η
        let eta = 1.0;
        let p0 = 2.0;
        let params = DiracParams::from_rest_energy(2f64.sqrt() * eta, 2f64.sqrt() * eta * p0).unwrap();
        let s0 = packet(p0, FRAC_1_SQRT_2, 0.0, spinor::plus_x());
        let s = entanglement_entropy(&reduced_pseudospin(&evolve(&s0, 200.0, &params)));
        assert!(s > 0.99, "{s}");
    }

    #[test]
    fn translation_phase_sets_position() {
        let s = packet(1.0, 1.0, 0.7, spinor::plus_x());
        let x = mean_position_numeric(&s).unwrap();
        assert!((x.mean - 0.7).abs() < 1e-6);
        assert!(x.imag_residue.abs() < 1e-6);
        let real = packet(0.0, 1.0, 0.0, spinor::excited());
        assert!(mean_position_numeric(&real).unwrap().mean.abs() < 1e-8);
    }

    #[test]
    fn edge_leakage_detected() {
        let grid = MomentumGrid::new(-2.0, 2.0, 512).unwrap();
        let s = SpinorMomentumState::gaussian(grid, 0.0, 1.0, 0.0, spinor::plus_x()).unwrap();
        assert!(matches!(mean_position_numeric(&s), Err(DiracError::EdgeLeakage { .. })));
    }

    #[test]
    fn zb_period_for_circuit_constants() {
        // c* = √2 η, m* c*² = ω with η/2π = 0.78 MHz, ω/2π = 2.2 MHz, p0 = 2
        let eta = 2.0 * PI * 0.78e-3;
        let omega = 2.0 * PI * 2.2e-3;
        let params = DiracParams::from_rest_energy(2f64.sqrt() * eta, omega).unwrap();
        let period = PI / params.energy(2.0);
        assert!((period - 160.0).abs() < 10.0, "{period}");
    }

    #[test]
    fn analytic_matches_numeric_for_x_spinor() {
        let params = DiracParams::new(1.0, 1.0).unwrap();
        let s0 = packet(1.0, 1.0, 0.25, spinor::plus_x());
        let terms = MeanPositionTerms::new(&s0, &params).unwrap();
        assert!(terms.drift_velocity.abs() < 1e-12);
        assert!((terms.at(0.0) - 0.25).abs() < 1e-6);
        let mut worst: f64 = 0.0;
        for i in 0..20 {
            let t = 0.37 * i as f64;
            let num = mean_position_numeric(&evolve(&s0, t, &params)).unwrap().mean;
            worst = worst.max((num - terms.at(t)).abs());
        }
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn analytic_matches_numeric_for_general_spinor() {
        let params = DiracParams::new(1.3, 0.6).unwrap();
        let s = [c(0.6, 0.0), c(0.0, 0.8)];
        let s0 = packet(-0.5, 0.8, -1.0, s);
        let terms = MeanPositionTerms::new(&s0, &params).unwrap();
        for t in [0.0, 0.9, 2.5, 7.0] {
            let num = mean_position_numeric(&evolve(&s0, t, &params)).unwrap().mean;
            assert!((num - terms.at(t)).abs() < 1e-6, "t={t}: {num} vs {}", terms.at(t));
        }
        // the early-time slope is ⟨c σ_y⟩, not the drift alone
        let h = 1e-4;
        let slope = (terms.at(h) - terms.at(-h)) / (2.0 * h);
        assert!((slope - initial_velocity(&s0, &params)).abs() < 1e-6);
    }

    #[test]
    fn massless_motion_is_linear() {
        let params = DiracParams::new(1.0, 0.0).unwrap();
        let s = [c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)];
        let s0 = packet(1.0, 1.0, 0.0, s);
        let terms = MeanPositionTerms::new(&s0, &params).unwrap();
        assert_eq!(terms.zitterbewegung(3.0), 0.0);
        assert!((terms.drift_velocity - initial_velocity(&s0, &params)).abs() < 1e-10);
        let t = 2.0;
        let num = mean_position_numeric(&evolve(&s0, t, &params)).unwrap().mean;
        assert!((num / t - initial_velocity(&s0, &params)).abs() < 1e-5);
        let xs = packet(1.0, 1.0, 0.4, spinor::plus_x());
        assert!((mean_position_analytic(&xs, 5.0, &params).unwrap() - 0.4).abs() < 1e-6);
    }

    #[test]
    fn entangled_initial_state_rejected() {
        let params = DiracParams::new(1.0, 1.0).unwrap();
        let grid = MomentumGrid::around(1.0, 1.0).unwrap();
        let s = positive_branch_state(1.0, 1.0, |_| 0.0, grid, &params).unwrap();
        assert!(matches!(MeanPositionTerms::new(&s, &params), Err(DiracError::NotProductState { .. })));
    }

    fn arb_spinor() -> impl Strategy<Value = Spinor> {
        (0.0..PI, 0.0..2.0 * PI).prop_map(|(th, ph)| [c((th / 2.0).cos(), 0.0), C64::from_polar((th / 2.0).sin(), ph)])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn evolution_is_unitary_and_composes(
            p0 in -3.0..3.0f64, dp in 0.3..1.5f64, m in 0.0..2.0f64, cc in 0.2..2.0f64,
            t1 in -20.0..20.0f64, t2 in -20.0..20.0f64, s in arb_spinor()
        ) {
            let params = DiracParams::new(cc, m).unwrap();
            let s0 = packet(p0, dp, 0.0, s);
            let a = evolve(&s0, t1, &params);
            prop_assert!((a.norm_sqr() - s0.norm_sqr()).abs() < 1e-10);
            let ab = evolve(&a, t2, &params);
            let direct = evolve(&s0, t1 + t2, &params);
            prop_assert!(ab.max_abs_diff(&direct) < 1e-9);
            let e0 = energy_expectation(&s0, &params);
            prop_assert!((energy_expectation(&ab, &params) - e0).abs() < 1e-9);
        }

        #[test]
        fn reduced_density_is_valid(
            p0 in -3.0..3.0f64, dp in 0.3..1.5f64, m in 0.0..2.0f64, t in 0.0..50.0f64, s in arb_spinor()
        ) {
            let params = DiracParams::new(1.0, m).unwrap();
            let rho = reduced_pseudospin(&evolve(&packet(p0, dp, 0.0, s), t, &params));
            prop_assert!(PseudospinDensity::new(rho.matrix()).is_ok());
            let e = entanglement_entropy(&rho);
            prop_assert!((0.0..=1.0).contains(&e));
        }
    }
}
