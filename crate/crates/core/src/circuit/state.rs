use super::{CircuitError, TAIL_LIMIT};
use crate::dirac::{DiracError, MomentumGrid, PseudospinDensity, Spinor, SpinorMomentumState};
use crate::fock::{coherent_amplitudes, momentum, momentum_wavefunction, position};
use crate::linalg::{c, expectation, kron, CMatrix, CVector};
use crate::C64;
use serde::{Deserialize, Serialize};

/// Joint qubit–resonator pure state, index `q·(n_max+1) + n` with `q = 0 ↔ |e⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitResonatorState {
    n_max: usize,
    amplitudes: CVector,
}

impl QubitResonatorState {
    pub fn from_vector(n_max: usize, amplitudes: CVector) -> Result<Self, CircuitError> {
        if amplitudes.len() != 2 * (n_max + 1) {
            return Err(CircuitError::InvalidParameter {
                name: "amplitudes",
                reason: format!("expected {} entries, got {}", 2 * (n_max + 1), amplitudes.len()),
            });
        }
        Ok(Self { n_max, amplitudes })
    }

    /// `qubit ⊗ field`, with `field` padded or cut to `n_max + 1` levels.
    pub fn product(qubit: Spinor, field: &[C64], n_max: usize) -> Self {
        let nf = n_max + 1;
        let amplitudes = CVector::from_fn(2 * nf, |i, _| {
            let (q, n) = (i / nf, i % nf);
            field.get(n).copied().unwrap_or(c(0.0, 0.0)) * qubit[q]
        });
        Self { n_max, amplitudes }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, q: usize, n: usize) -> C64 {
        self.amplitudes[q * (self.n_max + 1) + n]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// Unnormalised field amplitudes `⟨q, n|ψ⟩`; `q = 0` for `|e⟩`, `1` for `|g⟩`.
    pub fn branch(&self, q: usize) -> Vec<C64> {
        (0..=self.n_max).map(|n| self.amplitude(q, n)).collect()
    }

    pub fn population_e(&self) -> f64 {
        self.branch(0).iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn population_g(&self) -> f64 {
        self.branch(1).iter().map(|z| z.norm_sqr()).sum()
    }

    /// Population of the top Fock level, summed over the qubit.
    pub fn tail_population(&self) -> f64 {
        self.amplitude(0, self.n_max).norm_sqr() + self.amplitude(1, self.n_max).norm_sqr()
    }

    pub fn check_tail(&self) -> Result<(), CircuitError> {
        let tail = self.tail_population();
        if tail >= TAIL_LIMIT {
            return Err(CircuitError::TruncationError { tail });
        }
        Ok(())
    }

    pub fn reduced_qubit(&self) -> PseudospinDensity {
        let e = self.branch(0);
        let g = self.branch(1);
        let ee: f64 = e.iter().map(|z| z.norm_sqr()).sum();
        let gg: f64 = g.iter().map(|z| z.norm_sqr()).sum();
        let ge: C64 = g.iter().zip(&e).map(|(a, b)| a * b.conj()).sum();
        let tr = ee + gg;
        PseudospinDensity::new([[c(ee / tr, 0.0), ge.conj() / tr], [ge / tr, c(gg / tr, 0.0)]])
            .unwrap_or_else(|_| PseudospinDensity::maximally_mixed())
    }

    /// Resonator density matrix with the qubit traced out.
    pub fn field_density(&self) -> CMatrix {
        let nf = self.n_max + 1;
        let mut rho = CMatrix::zeros(nf, nf);
        for q in 0..2 {
            let b = self.branch(q);
            for i in 0..nf {
                for j in 0..nf {
                    rho[(i, j)] += b[i] * b[j].conj();
                }
            }
        }
        rho
    }

    /// Field density conditioned on qubit level `q`, normalised, with the branch population.
    pub fn conditional_field(&self, q: usize) -> Option<(CMatrix, f64)> {
        let b = self.branch(q);
        let pop: f64 = b.iter().map(|z| z.norm_sqr()).sum();
        if pop < 1e-12 {
            return None;
        }
        let v = CVector::from_vec(b);
        Some(((&v * v.adjoint()).unscale(pop), pop))
    }

    pub fn joint_density(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn mean_x(&self) -> f64 {
        let nf = self.n_max + 1;
        expectation(&kron(&CMatrix::identity(2, 2), &position(nf)), &self.amplitudes).re / self.norm_sqr()
    }

    pub fn mean_p(&self) -> f64 {
        let nf = self.n_max + 1;
        expectation(&kron(&CMatrix::identity(2, 2), &momentum(nf)), &self.amplitudes).re / self.norm_sqr()
    }

    /// Momentum-representation spinor wavefunction `⟨p|ψ⟩` on `grid`.
    pub fn to_momentum_state(&self, grid: MomentumGrid) -> Result<SpinorMomentumState, DiracError> {
        let ps = grid.values();
        let up = momentum_wavefunction(&self.branch(0), &ps);
        let down = momentum_wavefunction(&self.branch(1), &ps);
        SpinorMomentumState::from_components(grid, up, down)
    }

    /// Applies `U ⊗ I` for a qubit unitary `U` in `(e, g)` ordering.
    pub fn apply_qubit(&self, u: &[[C64; 2]; 2]) -> Self {
        let nf = self.n_max + 1;
        let mut out = self.amplitudes.clone();
        for n in 0..nf {
            let (e, g) = (self.amplitudes[n], self.amplitudes[nf + n]);
            out[n] = u[0][0] * e + u[0][1] * g;
            out[nf + n] = u[1][0] * e + u[1][1] * g;
        }
        Self { n_max: self.n_max, amplitudes: out }
    }

    /// Applies `exp(−i φ_q a†a)` to branch `q` with `φ = [φ_e, φ_g]`.
    pub fn rotate_branches(&self, angles: [f64; 2]) -> Self {
        let nf = self.n_max + 1;
        let amplitudes = CVector::from_fn(2 * nf, |i, _| {
            let (q, n) = (i / nf, i % nf);
            self.amplitudes[i] * C64::from_polar(1.0, -angles[q] * n as f64)
        });
        Self { n_max: self.n_max, amplitudes }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationAxis {
    X,
    Y,
    Z,
}

/// Qubit rotation `exp(−i angle n·σ/2)` in the laboratory convention where
/// `|g⟩` is the north pole of the Bloch sphere, so a `+π/2` turn about `y`
/// takes `|g⟩` to `|X⟩ = (|e⟩ + |g⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitRotation {
    pub axis: RotationAxis,
    pub angle: f64,
}

impl QubitRotation {
    pub fn identity() -> Self {
        Self { axis: RotationAxis::Z, angle: 0.0 }
    }

    pub fn y(angle: f64) -> Self {
        Self { axis: RotationAxis::Y, angle }
    }

    pub fn x(angle: f64) -> Self {
        Self { axis: RotationAxis::X, angle }
    }

    /// 2×2 unitary in `(e, g)` ordering.
    pub fn unitary(&self) -> [[C64; 2]; 2] {
        let (s, co) = (0.5 * self.angle).sin_cos();
        let z = c(0.0, 0.0);
        // laboratory Paulis: σ'_x = σ_x, σ'_y = −σ_y, σ'_z = −σ_z
        match self.axis {
            RotationAxis::X => [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]],
            RotationAxis::Y => [[c(co, 0.0), c(s, 0.0)], [c(-s, 0.0), c(co, 0.0)]],
            RotationAxis::Z => [[C64::from_polar(1.0, 0.5 * self.angle), z], [z, C64::from_polar(1.0, -0.5 * self.angle)]],
        }
    }

    pub fn apply_to_ground(&self) -> Spinor {
        let u = self.unitary();
        [u[0][1], u[1][1]]
    }
}

/// `R|g⟩ ⊗ D(i p0/√2)|0⟩`: the field is a coherent state with `⟨p̂⟩ = p0`, `⟨x̂⟩ = 0`.
pub fn prepare_initial(p0_displacement: f64, rotation: QubitRotation, n_max: usize) -> Result<QubitResonatorState, CircuitError> {
    if !p0_displacement.is_finite() {
        return Err(CircuitError::InvalidParameter { name: "p0_displacement", reason: "must be finite".into() });
    }
    let alpha = C64::new(0.0, p0_displacement / std::f64::consts::SQRT_2);
    if alpha.norm_sqr() >= n_max as f64 / 4.0 && p0_displacement != 0.0 {
        return Err(CircuitError::InvalidParameter {
            name: "p0_displacement",
            reason: format!("|α|² = {} must stay below n_max/4 = {}", alpha.norm_sqr(), n_max as f64 / 4.0),
        });
    }
    let mut field = coherent_amplitudes(alpha, n_max + 1);
    let norm = field.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    field.iter_mut().for_each(|z| *z /= norm);
    let state = QubitResonatorState::product(rotation.apply_to_ground(), &field, n_max);
    state.check_tail()?;
    Ok(state)
}
