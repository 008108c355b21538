use super::params::{CircuitParams, EffectiveParams};
use crate::fock::{annihilation, creation, position};
use crate::linalg::{c, kron, CMatrix};
use crate::C64;

/// Possibly time-dependent Hamiltonian on the joint qubit–resonator space.
pub trait Hamiltonian: Sync {
    fn dim(&self) -> usize;

    /// `out = H(t) psi`.
    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]);

    fn matrix(&self, t: f64) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        let mut e = vec![C64::new(0.0, 0.0); d];
        let mut col = vec![C64::new(0.0, 0.0); d];
        for j in 0..d {
            e[j] = c(1.0, 0.0);
            self.apply(t, &e, &mut col);
            for i in 0..d {
                m[(i, j)] = col[i];
            }
            e[j] = c(0.0, 0.0);
        }
        m
    }
}

/// Time-independent Hamiltonian.
#[derive(Debug, Clone)]
pub struct StaticHamiltonian {
    matrix: CMatrix,
}

impl StaticHamiltonian {
    pub fn new(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

impl Hamiltonian for StaticHamiltonian {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, _t: f64, psi: &[C64], out: &mut [C64]) {
        let d = self.dim();
        for (i, o) in out.iter_mut().enumerate().take(d) {
            let mut acc = C64::new(0.0, 0.0);
            for (j, p) in psi.iter().enumerate() {
                acc += self.matrix[(i, j)] * p;
            }
            *o = acc;
        }
    }

    fn matrix(&self, _t: f64) -> CMatrix {
        self.matrix.clone()
    }
}

/// Interaction-picture Hamiltonian of the modulated, driven circuit:
///
/// `(ε₂ cos(ν₂t+φ₂) + δ)|e⟩⟨e| + e^{−iμ sin(ν₁t+φ₁)} (−λ e^{i(ω_r−ω₀)t} a† + Ω e^{iθ}) |g⟩⟨e| + h.c.`
/// plus the resonator drive `ε (a e^{iΔt} + a† e^{−iΔt})`.
#[derive(Debug, Clone)]
pub struct FullHamiltonian {
    params: CircuitParams,
    n_max: usize,
    sqrt: Vec<f64>,
}

impl FullHamiltonian {
    pub fn new(params: CircuitParams, n_max: usize) -> Self {
        let sqrt = (0..=n_max + 1).map(|n| (n as f64).sqrt()).collect();
        Self { params, n_max, sqrt }
    }

    pub fn params(&self) -> &CircuitParams {
        &self.params
    }
}

impl Hamiltonian for FullHamiltonian {
    fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        let p = &self.params;
        let nf = self.n_max + 1;
        let modulation = C64::from_polar(1.0, -p.mu() * (p.nu_1 * t + p.phi_1).sin());
        let sideband = modulation * C64::from_polar(-p.lambda, (p.omega_r - p.omega_0) * t);
        let carrier = modulation * C64::from_polar(p.omega_drive, p.theta);
        let diag_e = p.eps_2 * (p.nu_2 * t + p.phi_2).cos() + p.delta;
        let drive = C64::from_polar(p.eps_drive, p.drive_detuning * t);
        let (sb_c, car_c, drv_c) = (sideband.conj(), carrier.conj(), drive.conj());
        let s = &self.sqrt;
        let (psi_e, psi_g) = psi.split_at(nf);
        for n in 0..nf {
            let next = |v: &[C64]| if n + 1 < nf { v[n + 1] * s[n + 1] } else { C64::new(0.0, 0.0) };
            let prev = |v: &[C64]| if n > 0 { v[n - 1] * s[n] } else { C64::new(0.0, 0.0) };
            let mut e = psi_e[n] * diag_e + car_c * psi_g[n] + sb_c * next(psi_g);
            let mut g = carrier * psi_e[n] + sideband * prev(psi_e);
            if p.eps_drive != 0.0 {
                e += drive * next(psi_e) + drv_c * prev(psi_e);
                g += drive * next(psi_g) + drv_c * prev(psi_g);
            }
            out[n] = e;
            out[nf + n] = g;
        }
    }
}

pub fn interaction_hamiltonian(t: f64, p: &CircuitParams, n_max: usize) -> CMatrix {
    FullHamiltonian::new(*p, n_max).matrix(t)
}

/// Qubit operators in `(e, g)` ordering.
pub mod qubit_ops {
    use crate::linalg::{c, CMatrix};
    use crate::C64;

    pub fn sigma_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    pub fn sigma_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
    }

    pub fn sigma_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    /// `σ⁻ = |g⟩⟨e|`.
    pub fn lowering() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    /// `|e⟩⟨e|`.
    pub fn excited_projector() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
    }

    /// `σ_θ = e^{iθ}|g⟩⟨e| + e^{−iθ}|e⟩⟨g|`; equals `σ_y` at `θ = π/2`.
    pub fn sigma_theta(theta: f64) -> CMatrix {
        let z = c(0.0, 0.0);
        CMatrix::from_row_slice(2, 2, &[z, C64::from_polar(1.0, -theta), C64::from_polar(1.0, theta), z])
    }
}

/// `−η e^{−iθ} σ_θ a† − η e^{iθ} σ_θ a + ω σ_z + √2 ε x̂`.
pub fn effective_hamiltonian(ep: &EffectiveParams, theta: f64, eps_drive: f64, n_max: usize) -> CMatrix {
    let dim = n_max + 1;
    let st = qubit_ops::sigma_theta(theta);
    let coupling = C64::from_polar(-ep.eta, -theta);
    let mut h = kron(&st, &creation(dim)).map(|z| z * coupling) + kron(&st, &annihilation(dim)).map(|z| z * coupling.conj());
    h += kron(&qubit_ops::sigma_z(), &CMatrix::identity(dim, dim)).map(|z| z * ep.omega);
    if eps_drive != 0.0 {
        h += kron(&CMatrix::identity(2, 2), &position(dim)).map(|z| z * (std::f64::consts::SQRT_2 * eps_drive));
    }
    h
}
