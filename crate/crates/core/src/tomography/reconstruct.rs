use super::conditional::displaced_distribution;
use super::{PhotonDistribution, TomographyError};
use crate::fock::{displacement_block, gamma_from_xp, momentum, position};
use crate::linalg::{hermitian_eigen, hermitize, trace, CMatrix, CVector};
use crate::C64;
use serde::{Deserialize, Serialize};

/// Photon statistics recorded after one displacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacedSample {
    #[serde(with = "complex_object")]
    pub gamma: C64,
    pub distribution: PhotonDistribution,
    /// `(P_e, P_g)` of the test qubit.
    pub qubit_populations: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampleSetDocument", into = "SampleSetDocument")]
pub struct DisplacedSampleSet {
    samples: Vec<DisplacedSample>,
}

#[derive(Serialize, Deserialize)]
struct SampleSetDocument {
    samples: Vec<DisplacedSample>,
}

impl DisplacedSampleSet {
    pub fn new(samples: Vec<DisplacedSample>) -> Result<Self, TomographyError> {
        for s in &samples {
            let (pe, pg) = s.qubit_populations;
            if !(pe >= 0.0 && pg >= 0.0 && (pe + pg - 1.0).abs() <= 1e-6) {
                return Err(TomographyError::InvalidParameter {
                    name: "qubit_populations",
                    reason: format!("({pe}, {pg}) at γ = {} does not sum to 1", s.gamma),
                });
            }
            if !(s.gamma.re.is_finite() && s.gamma.im.is_finite()) {
                return Err(TomographyError::InvalidParameter { name: "gamma", reason: "must be finite".into() });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[DisplacedSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Number of scalar data points `P_n(γ_j)`.
    pub fn data_points(&self) -> usize {
        self.samples.iter().map(|s| s.distribution.probs().len()).sum()
    }
}

impl TryFrom<SampleSetDocument> for DisplacedSampleSet {
    type Error = TomographyError;

    fn try_from(doc: SampleSetDocument) -> Result<Self, Self::Error> {
        Self::new(doc.samples)
    }
}

impl From<DisplacedSampleSet> for SampleSetDocument {
    fn from(s: DisplacedSampleSet) -> Self {
        Self { samples: s.samples }
    }
}

mod complex_object {
    use crate::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Parts {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        Parts { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let p = Parts::deserialize(d)?;
        Ok(C64::new(p.re, p.im))
    }
}

/// `n × n` displacements `γ = (x + ip)/√2` on the square `x, p ∈ [−extent, extent]`,
/// ordered with `x` as the slow index.
pub fn gamma_lattice(extent: f64, n: usize) -> Vec<C64> {
    let coord = |k: usize| if n == 1 { 0.0 } else { -extent + 2.0 * extent * k as f64 / (n - 1) as f64 };
    (0..n).flat_map(|i| (0..n).map(move |j| gamma_from_xp(coord(i), coord(j)))).collect()
}

/// Noiseless samples of `rho` at each displacement, tagged with fixed qubit populations.
pub fn synthesize_samples(
    rho: &CMatrix,
    gammas: &[C64],
    qubit_populations: (f64, f64),
) -> Result<DisplacedSampleSet, TomographyError> {
    let samples = gammas
        .iter()
        .map(|&gamma| {
            Ok(DisplacedSample { gamma, distribution: displaced_distribution(rho, gamma)?, qubit_populations })
        })
        .collect::<Result<Vec<_>, TomographyError>>()?;
    DisplacedSampleSet::new(samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub max_iters: usize,
    /// Stop once the projected-gradient step, divided by the step size, has
    /// Frobenius norm below this.
    pub tolerance: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self { max_iters: 5000, tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub rho: CMatrix,
    pub iterations: usize,
    /// `Σ_j Σ_n (P_n^model − P_n^data)²` at `rho`.
    pub objective: f64,
    pub step_norm: f64,
}

impl Reconstruction {
    pub fn mean_x(&self) -> f64 {
        trace(&(position(self.rho.nrows()) * &self.rho)).re
    }

    pub fn mean_p(&self) -> f64 {
        trace(&(momentum(self.rho.nrows()) * &self.rho)).re
    }
}

struct Forward {
    /// `D(γ_j)` restricted to rows `0..=n_max` and the sample's output levels.
    blocks: Vec<CMatrix>,
    data: Vec<Vec<f64>>,
}

impl Forward {
    fn new(samples: &DisplacedSampleSet, n_max: usize) -> Self {
        let blocks = samples
            .samples()
            .iter()
            .map(|s| displacement_block(s.gamma, n_max, s.distribution.n_max()))
            .collect();
        let data = samples.samples().iter().map(|s| s.distribution.probs().to_vec()).collect();
        Self { blocks, data }
    }

    fn predict(&self, rho: &CMatrix) -> Vec<Vec<f64>> {
        self.blocks
            .iter()
            .map(|d| {
                let rd = rho * d;
                (0..d.ncols()).map(|n| d.column(n).dotc(&rd.column(n)).re).collect()
            })
            .collect()
    }

    /// `Σ_j D_j diag(w_j) D_j†`, the adjoint of the forward map.
    fn adjoint(&self, weights: &[Vec<f64>]) -> CMatrix {
        let dim = self.blocks[0].nrows();
        let mut out = CMatrix::zeros(dim, dim);
        for (d, w) in self.blocks.iter().zip(weights) {
            let scaled = CMatrix::from_fn(dim, d.ncols(), |a, n| d[(a, n)] * w[n]);
            out += scaled * d.adjoint();
        }
        out
    }

    fn residuals(&self, rho: &CMatrix) -> (Vec<Vec<f64>>, f64) {
        let r: Vec<Vec<f64>> = self
            .predict(rho)
            .into_iter()
            .zip(&self.data)
            .map(|(m, d)| m.iter().zip(d).map(|(a, b)| a - b).collect())
            .collect();
        let obj = r.iter().flatten().map(|x| x * x).sum();
        (r, obj)
    }

    fn gradient(&self, rho: &CMatrix) -> (CMatrix, f64) {
        let (r, obj) = self.residuals(rho);
        (self.adjoint(&r).map(|z| z * 2.0), obj)
    }

    /// Upper estimate of the gradient's Lipschitz constant by power iteration.
    fn lipschitz(&self) -> f64 {
        let dim = self.blocks[0].nrows();
        let mut x = hermitize(&CMatrix::from_fn(dim, dim, |a, b| C64::new(1.0 + (a * 7 + b * 3) as f64 % 5.0, 0.0)));
        let mut est = 0.0;
        for _ in 0..50 {
            let y = self.adjoint(&self.predict(&x));
            est = y.norm() / x.norm();
            x = y.unscale(y.norm());
        }
        2.0 * est * 1.05
    }
}

/// Least-squares density matrix on `n_max + 1` Fock levels from displaced
/// photon statistics, constrained to be positive semidefinite with unit trace.
/// Solved by accelerated projected gradient with adaptive restart.
pub fn reconstruct_density(
    samples: &DisplacedSampleSet,
    n_max: usize,
    opts: &ReconstructOptions,
) -> Result<Reconstruction, TomographyError> {
    let dim = n_max + 1;
    let need = dim * dim;
    if samples.is_empty() || samples.data_points() < need {
        return Err(TomographyError::InsufficientSamples { have: samples.data_points(), need });
    }
    let fwd = Forward::new(samples, n_max);
    let step = 1.0 / fwd.lipschitz();
    let mut x = CMatrix::identity(dim, dim).unscale(dim as f64);
    let mut y = x.clone();
    let mut momentum_t = 1.0f64;
    let mut best = (f64::INFINITY, x.clone());
    let mut prev_obj = f64::INFINITY;
    let mut step_norm = f64::INFINITY;
    for iter in 1..=opts.max_iters {
        let (g, _) = fwd.gradient(&y);
        let x_next = project_density(&(&y - g.map(|z| z * step)));
        step_norm = (&x_next - &y).norm() / step;
        let obj = fwd.residuals(&x_next).1;
        if obj < best.0 {
            best = (obj, x_next.clone());
        }
        if step_norm < opts.tolerance {
            return Ok(Reconstruction { rho: x_next, iterations: iter, objective: obj, step_norm });
        }
        if obj > prev_obj {
            momentum_t = 1.0;
            y = x.clone();
            prev_obj = f64::INFINITY;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum_t * momentum_t).sqrt());
        y = &x_next + (&x_next - &x).map(|z| z * ((momentum_t - 1.0) / t_next));
        x = x_next;
        momentum_t = t_next;
        prev_obj = obj;
    }
    Err(TomographyError::NotConverged { iterations: opts.max_iters, step_norm, best: Box::new(best.1) })
}

/// Euclidean projection onto `{ρ ⪰ 0, tr ρ = 1}`: eigenvalues projected onto the simplex.
fn project_density(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let projected = project_simplex(&values);
    let d = CVector::from_iterator(projected.len(), projected.iter().map(|&v| C64::new(v, 0.0)));
    hermitize(&(&vectors * CMatrix::from_diagonal(&d) * vectors.adjoint()))
}

fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            shift = candidate;
        }
    }
    v.iter().map(|&x| (x - shift).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::coherent_amplitudes;
    use crate::linalg::{c, fidelity, outer};

    fn coherent(alpha: C64, dim: usize) -> CMatrix {
        let v = CVector::from_vec(coherent_amplitudes(alpha, dim));
        let v = v.unscale(v.norm());
        outer(&v)
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(project_simplex(&[2.0, -1.0, 0.0]), vec![1.0, 0.0, 0.0]);
        let p = project_simplex(&[0.2, 0.3, -0.1]);
        assert!((p[2] - 0.1).abs() < 1e-15 && (p[0] - 0.4).abs() < 1e-15);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projection_yields_valid_density() {
        let m = CMatrix::from_fn(4, 4, |a, b| c((a + 2 * b) as f64 - 3.0, a as f64 - b as f64));
        let rho = project_density(&hermitize(&m));
        assert!((trace(&rho).re - 1.0).abs() < 1e-12);
        assert!(hermitian_eigen(&rho).0[0] > -1e-10);
        assert!((&rho - rho.adjoint()).norm() < 1e-14);
    }

    #[test]
    fn vacuum_reconstruction() {
        let rho = coherent(c(0.0, 0.0), 8);
        let samples = synthesize_samples(&rho, &gamma_lattice(2.0, 5), (1.0, 0.0)).unwrap();
        let rec = reconstruct_density(&samples, 7, &ReconstructOptions::default()).unwrap();
        assert!(fidelity(&rec.rho, &rho) > 0.999);
    }

    #[test]
    fn coherent_state_reconstruction() {
        let truth = coherent(c(0.0, std::f64::consts::SQRT_2), 16);
        let samples = synthesize_samples(&truth, &gamma_lattice(2.5, 9), (1.0, 0.0)).unwrap();
        let rec = match reconstruct_density(&samples, 15, &ReconstructOptions::default()) {
            Ok(r) => r.rho,
            Err(TomographyError::NotConverged { best, .. }) => *best,
            Err(e) => panic!("{e}"),
        };
        assert!(fidelity(&rec, &truth) > 0.99);
        let r = Reconstruction { rho: rec, iterations: 0, objective: 0.0, step_norm: 0.0 };
        assert!((r.mean_p() - 2.0).abs() < 0.02);
        assert!(r.mean_x().abs() < 0.02);
        assert!(hermitian_eigen(&r.rho).0[0] > -1e-10);
    }

    #[test]
    fn sample_set_json_round_trip() {
        let samples = synthesize_samples(&coherent(c(0.3, 0.1), 6), &gamma_lattice(1.0, 2), (0.25, 0.75)).unwrap();
        let text = serde_json::to_string(&samples).unwrap();
        assert!(text.contains("\"re\"") && text.contains("\"im\""));
        let back: DisplacedSampleSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, samples);
        let bad = text.replace("0.75", "0.5");
        assert!(serde_json::from_str::<DisplacedSampleSet>(&bad).is_err());
    }

    #[test]
    fn too_few_points() {
        let samples = synthesize_samples(&coherent(c(0.0, 0.0), 4), &[c(0.0, 0.0)], (1.0, 0.0)).unwrap();
        assert!(matches!(
            reconstruct_density(&samples, 20, &ReconstructOptions::default()),
            Err(TomographyError::InsufficientSamples { .. })
        ));
    }
}
