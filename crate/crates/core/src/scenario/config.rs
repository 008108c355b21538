use crate::circuit::{
    effective_params, CircuitParams, FrameAngles, IntegratorOptions, PhaseSearchGrid, QubitRotation,
};
use crate::dirac::{DiracParams, MomentumGrid};
use crate::tomography::{ProbeParams, RabiTrace};
use crate::units::Frequency;
use crate::wigner::PhaseSpaceGrid;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;
use std::path::{Path, PathBuf};

const MAX_N_MAX: usize = 200;

/// A configuration problem, naming the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self { field: field.into(), reason: reason.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    Zitterbewegung,
    PositiveBranch,
    Klein,
    Compare,
}

impl ScenarioId {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::Zitterbewegung => "zitterbewegung",
            ScenarioId::PositiveBranch => "positive_branch",
            ScenarioId::Klein => "klein",
            ScenarioId::Compare => "compare",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Continuum,
    EffectiveCircuit,
    FullCircuit,
    TomographyPipeline,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Continuum => "continuum",
            Model::EffectiveCircuit => "effective_circuit",
            Model::FullCircuit => "full_circuit",
            Model::TomographyPipeline => "tomography_pipeline",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Model {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "continuum" => Ok(Model::Continuum),
            "effective_circuit" => Ok(Model::EffectiveCircuit),
            "full_circuit" => Ok(Model::FullCircuit),
            "tomography_pipeline" => Ok(Model::TomographyPipeline),
            other => Err(ConfigError::new("model", format!("unknown model `{other}`"))),
        }
    }
}

/// The configuration file as written. Every section is optional; missing
/// values take scenario-specific defaults in [`ScenarioConfig::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Option<ScenarioId>,
    pub model: Option<Model>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub circuit: Option<CircuitSection>,
    pub continuum: Option<ContinuumSection>,
    pub initial: Option<InitialSection>,
    pub times: Option<TimesSection>,
    pub grid: Option<GridSection>,
    pub momentum: Option<MomentumSection>,
    pub frame: Option<FrameSection>,
    pub integrator: Option<IntegratorSection>,
    pub positive_branch: Option<PositiveBranchSection>,
    pub compare: Option<CompareSection>,
    pub tomography: Option<TomographySection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    pub omega_r: Option<Frequency>,
    /// Defaults to `ω_r − 2ν₁`, the first-sideband resonance.
    pub omega_0: Option<Frequency>,
    pub lambda: Option<Frequency>,
    pub eps_1: Option<Frequency>,
    pub nu_1: Option<Frequency>,
    /// Radians.
    pub phi_1: Option<f64>,
    pub eps_2: Option<Frequency>,
    pub nu_2: Option<Frequency>,
    pub phi_2: Option<f64>,
    pub omega_drive: Option<Frequency>,
    pub theta: Option<f64>,
    pub delta: Option<Frequency>,
    pub eps_drive: Option<Frequency>,
    pub drive_detuning: Option<Frequency>,
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumSection {
    pub c: Option<f64>,
    pub m: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub p0: Option<f64>,
    pub delta_p: Option<f64>,
    pub x0: Option<f64>,
    pub rotation: Option<QubitRotation>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesSection {
    /// End of the traces (ns for circuit scenarios, natural units for the positive branch).
    pub end: Option<f64>,
    pub step: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub n_x: Option<usize>,
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub n_p: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumSection {
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub n_points: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    pub theta_e0: Option<f64>,
    pub theta_g0: Option<f64>,
    pub theta_e: Option<f64>,
    pub theta_g: Option<f64>,
    pub t_f: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub rel_tol: Option<f64>,
    pub max_step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositiveBranchSection {
    pub delta_p_sweep: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub phase_search: Option<bool>,
    pub search_grid: Option<PhaseSearchGridSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSearchGridSection {
    pub phi_1: Option<Vec<f64>>,
    pub phi_2: Option<Vec<f64>>,
    pub delta: Option<Vec<Frequency>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographySection {
    /// Pass every displaced distribution through a simulated probe Rabi trace and fit.
    pub through_rabi: Option<bool>,
    pub rabi_noise_sigma: Option<f64>,
    pub fit_n_max: Option<usize>,
    pub lambda_2: Option<Frequency>,
    pub t1_p: Option<f64>,
    /// Reconstruct the field density from displaced samples (Klein scenario).
    pub reconstruct: Option<bool>,
    pub reconstruct_n_max: Option<usize>,
    pub gamma_extent: Option<f64>,
    pub gamma_points: Option<usize>,
}

/// Fully specified run parameters after defaults and validation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub scenario: ScenarioId,
    pub model: Model,
    pub seed: u64,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub circuit: CircuitParams,
    pub n_max: usize,
    /// Continuum Dirac parameters; present only for the continuum model.
    pub continuum: Option<DiracParams>,
    pub p0: f64,
    pub delta_p: f64,
    pub x0: f64,
    pub rotation: QubitRotation,
    pub end: f64,
    pub step: f64,
    pub snapshots: Vec<f64>,
    pub grid: PhaseSpaceGrid,
    pub momentum: MomentumGrid,
    pub frame: FrameAngles,
    pub integrator: ResolvedIntegrator,
    pub delta_p_sweep: Vec<f64>,
    pub phase_search: Option<PhaseSearchGrid>,
    pub tomography: ResolvedTomography,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedIntegrator {
    pub rel_tol: f64,
    pub max_step: f64,
}

impl ResolvedIntegrator {
    pub fn options(&self) -> IntegratorOptions {
        IntegratorOptions { rel_tol: self.rel_tol, max_step: self.max_step, ..IntegratorOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedTomography {
    pub through_rabi: bool,
    pub rabi_noise_sigma: f64,
    pub fit_n_max: usize,
    pub probe: ProbeParams,
    pub reconstruct: bool,
    pub reconstruct_n_max: usize,
    pub gamma_extent: f64,
    pub gamma_points: usize,
}

impl ResolvedConfig {
    /// Trace sample times `0, step, …` up to and including `end`.
    pub fn trace_times(&self) -> Vec<f64> {
        let n = (self.end / self.step + 1e-9).floor() as usize;
        let mut ts: Vec<f64> = (0..=n).map(|k| k as f64 * self.step).collect();
        if (ts[n] - self.end).abs() > 1e-9 * self.end.max(1.0) {
            ts.push(self.end);
        }
        ts
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let field = e.span().map(|s| locate_key(text, s.start)).unwrap_or_else(|| "<file>".into());
            ConfigError::new(field, e.message().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// Fills in scenario defaults and checks every field.
    pub fn resolve(&self) -> Result<ResolvedConfig, ConfigError> {
        let scenario = self.scenario.ok_or_else(|| ConfigError::new("scenario", "missing"))?;
        let model = self.model.unwrap_or(match scenario {
            ScenarioId::PositiveBranch => Model::Continuum,
            ScenarioId::Compare => Model::FullCircuit,
            _ => Model::EffectiveCircuit,
        });
        let allowed: &[Model] = match scenario {
            ScenarioId::Zitterbewegung => {
                &[Model::Continuum, Model::EffectiveCircuit, Model::FullCircuit, Model::TomographyPipeline]
            }
            ScenarioId::PositiveBranch => &[Model::Continuum],
            ScenarioId::Klein => &[Model::EffectiveCircuit, Model::FullCircuit],
            ScenarioId::Compare => &[Model::FullCircuit, Model::EffectiveCircuit],
        };
        if !allowed.contains(&model) {
            return Err(ConfigError::new("model", format!("`{model}` is not available for scenario `{scenario}`")));
        }

        let (circuit, n_max) = resolve_circuit(scenario, self.circuit.as_ref())?;
        let cont = self.continuum.unwrap_or_default();
        let continuum = if model == Model::Continuum {
            let params = match (scenario, cont.c, cont.m) {
                (_, Some(c), Some(m)) => DiracParams::new(c, m),
                (ScenarioId::PositiveBranch, c, m) => DiracParams::new(c.unwrap_or(1.0), m.unwrap_or(1.0)),
                (_, None, None) => {
                    let ep = effective_params(&circuit);
                    DiracParams::from_rest_energy(ep.c_star, ep.omega)
                }
                _ => return Err(ConfigError::new("continuum", "give both c and m, or neither")),
            };
            Some(params.map_err(|e| ConfigError::new("continuum", e.to_string()))?)
        } else if self.continuum.is_some() {
            return Err(ConfigError::new("continuum", format!("only used by the continuum model, not `{model}`")));
        } else {
            None
        };

        let init = self.initial.unwrap_or_default();
        let (p0_default, dp_default, rot_default) = match scenario {
            ScenarioId::Zitterbewegung => (2.0, FRAC_1_SQRT_2, QubitRotation::y(FRAC_PI_2)),
            ScenarioId::PositiveBranch => (1.0, 1.0, QubitRotation::identity()),
            ScenarioId::Klein => (0.0, FRAC_1_SQRT_2, QubitRotation::identity()),
            ScenarioId::Compare => (0.0, FRAC_1_SQRT_2, QubitRotation::y(FRAC_PI_2)),
        };
        let p0 = finite("initial.p0", init.p0.unwrap_or(p0_default))?;
        let delta_p = positive("initial.delta_p", init.delta_p.unwrap_or(dp_default))?;
        let x0 = finite("initial.x0", init.x0.unwrap_or(0.0))?;
        let rotation = init.rotation.unwrap_or(rot_default);
        finite("initial.rotation.angle", rotation.angle)?;
        if model != Model::Continuum && (x0 != 0.0 || (delta_p - FRAC_1_SQRT_2).abs() > 1e-12) {
            return Err(ConfigError::new(
                "initial",
                "circuit models start from a coherent state; x0 and delta_p are fixed at 0 and 1/√2",
            ));
        }
        if model != Model::Continuum && (p0 / std::f64::consts::SQRT_2).powi(2) >= n_max as f64 / 4.0 && p0 != 0.0 {
            return Err(ConfigError::new("initial.p0", format!("|α|² must stay below n_max/4 = {}", n_max as f64 / 4.0)));
        }

        let times = self.times.clone().unwrap_or_default();
        let (end_default, step_default, snaps_default): (f64, f64, Vec<f64>) = match scenario {
            ScenarioId::Zitterbewegung => (330.0, 2.0, vec![0.0, 90.0, 178.0, 240.0, 330.0]),
            ScenarioId::PositiveBranch => (4.0, 0.05, vec![0.0, 2.0, 4.0]),
            ScenarioId::Klein => (288.0, 2.0, vec![0.0, 76.0, 140.0, 216.0, 288.0]),
            ScenarioId::Compare => (330.0, 2.0, vec![]),
        };
        let end = positive("times.end", times.end.unwrap_or(end_default))?;
        let step = positive("times.step", times.step.unwrap_or(step_default))?;
        if step > end {
            return Err(ConfigError::new("times.step", "exceeds times.end"));
        }
        let snapshots = times.snapshots.unwrap_or(snaps_default);
        if snapshots.iter().any(|t| !(t.is_finite() && *t >= 0.0 && *t <= end)) {
            return Err(ConfigError::new("times.snapshots", format!("must lie within [0, {end}]")));
        }
        if snapshots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::new("times.snapshots", "must be strictly increasing"));
        }

        let g = self.grid.unwrap_or_default();
        let (gx, gp) = match scenario {
            ScenarioId::PositiveBranch => ((-4.0, 8.0), (-3.0, 5.0)),
            _ => ((-4.5, 4.5), (-4.5, 4.5)),
        };
        let grid = PhaseSpaceGrid::new(
            g.x_min.unwrap_or(gx.0),
            g.x_max.unwrap_or(gx.1),
            g.n_x.unwrap_or(121),
            g.p_min.unwrap_or(gp.0),
            g.p_max.unwrap_or(gp.1),
            g.n_p.unwrap_or(121),
        )
        .map_err(|e| ConfigError::new("grid", e.to_string()))?;

        let m = self.momentum.unwrap_or_default();
        let reach = 10.0 * delta_p;
        let momentum = MomentumGrid::new(
            m.p_min.unwrap_or((p0 - reach).min(grid.p_range().0 - 2.0)),
            m.p_max.unwrap_or((p0 + reach).max(grid.p_range().1 + 2.0)),
            m.n_points.unwrap_or(MomentumGrid::DEFAULT_POINTS),
        )
        .map_err(|e| ConfigError::new("momentum", e.to_string()))?;

        let f = self.frame.unwrap_or_default();
        let base = match scenario {
            ScenarioId::Klein => FrameAngles::klein(),
            _ => FrameAngles::zitterbewegung(),
        };
        let frame = FrameAngles {
            theta_e0: f.theta_e0.unwrap_or(base.theta_e0),
            theta_g0: f.theta_g0.unwrap_or(base.theta_g0),
            theta_e: f.theta_e.unwrap_or(base.theta_e),
            theta_g: f.theta_g.unwrap_or(base.theta_g),
            t_f: f.t_f.unwrap_or(base.t_f),
        };
        frame.validate().map_err(|e| ConfigError::new("frame", e.to_string()))?;

        let ig = self.integrator.unwrap_or_default();
        let integrator = ResolvedIntegrator {
            rel_tol: ig.rel_tol.unwrap_or(1e-9),
            max_step: positive("integrator.max_step", ig.max_step.unwrap_or(5.0))?,
        };
        if !(1e-12..=1e-4).contains(&integrator.rel_tol) {
            return Err(ConfigError::new("integrator.rel_tol", "must lie in [1e-12, 1e-4]"));
        }

        let delta_p_sweep = self
            .positive_branch
            .as_ref()
            .and_then(|s| s.delta_p_sweep.clone())
            .unwrap_or_else(|| (1..=12).map(|k| 0.25 * k as f64).collect());
        if delta_p_sweep.is_empty() || delta_p_sweep.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(ConfigError::new("positive_branch.delta_p_sweep", "needs positive widths"));
        }

        let cmp = self.compare.clone().unwrap_or_default();
        let phase_search = if cmp.phase_search.unwrap_or(scenario == ScenarioId::Compare) {
            let coarse = PhaseSearchGrid::coarse();
            let sg = cmp.search_grid.unwrap_or_default();
            let grid = PhaseSearchGrid {
                phi_1: sg.phi_1.unwrap_or(coarse.phi_1),
                phi_2: sg.phi_2.unwrap_or(coarse.phi_2),
                delta: sg.delta.map(|v| v.iter().map(Frequency::rad_per_ns).collect()).unwrap_or(coarse.delta),
            };
            for (name, v) in [("phi_1", &grid.phi_1), ("phi_2", &grid.phi_2), ("delta", &grid.delta)] {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(ConfigError::new(format!("compare.search_grid.{name}"), "needs finite values"));
                }
            }
            Some(grid)
        } else {
            None
        };

        let t = self.tomography.unwrap_or_default();
        let device = ProbeParams::device();
        let tomography = ResolvedTomography {
            through_rabi: t.through_rabi.unwrap_or(false),
            rabi_noise_sigma: t.rabi_noise_sigma.unwrap_or(0.0),
            fit_n_max: t.fit_n_max.unwrap_or(20),
            probe: ProbeParams {
                lambda_2: t.lambda_2.map(|f| f.rad_per_ns()).unwrap_or(device.lambda_2),
                t1_p: t.t1_p.unwrap_or(device.t1_p),
                ..device
            },
            reconstruct: t.reconstruct.unwrap_or(false),
            reconstruct_n_max: t.reconstruct_n_max.unwrap_or(20),
            gamma_extent: positive("tomography.gamma_extent", t.gamma_extent.unwrap_or(3.5))?,
            gamma_points: t.gamma_points.unwrap_or(11),
        };
        tomography.probe.validate().map_err(|e| ConfigError::new("tomography", e.to_string()))?;
        if !(tomography.rabi_noise_sigma >= 0.0 && tomography.rabi_noise_sigma.is_finite()) {
            return Err(ConfigError::new("tomography.rabi_noise_sigma", "must be finite and ≥ 0"));
        }
        if tomography.gamma_points < 2 {
            return Err(ConfigError::new("tomography.gamma_points", "need at least 2"));
        }
        let max_fit = RabiTrace::default_taus().len() / 2 - 1;
        if !(1..=max_fit).contains(&tomography.fit_n_max) {
            return Err(ConfigError::new("tomography.fit_n_max", format!("must lie in [1, {max_fit}]")));
        }
        if !(1..=MAX_N_MAX).contains(&tomography.reconstruct_n_max) {
            return Err(ConfigError::new("tomography.reconstruct_n_max", format!("must lie in [1, {MAX_N_MAX}]")));
        }

        Ok(ResolvedConfig {
            scenario,
            model,
            seed: self.seed.unwrap_or(0),
            output_dir: self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(scenario.as_str())),
            circuit,
            n_max,
            continuum,
            p0,
            delta_p,
            x0,
            rotation,
            end,
            step,
            snapshots,
            grid,
            momentum,
            frame,
            integrator,
            delta_p_sweep,
            phase_search,
            tomography,
        })
    }
}

fn resolve_circuit(scenario: ScenarioId, s: Option<&CircuitSection>) -> Result<(CircuitParams, usize), ConfigError> {
    let base = match scenario {
        ScenarioId::Klein => CircuitParams::klein(),
        _ => CircuitParams::zitterbewegung(),
    };
    let s = s.cloned().unwrap_or_default();
    let f = |v: Option<Frequency>, d: f64| v.map(|f| f.rad_per_ns()).unwrap_or(d);
    let nu_1 = f(s.nu_1, base.nu_1);
    let omega_r = f(s.omega_r, base.omega_r);
    let p = CircuitParams {
        omega_r,
        omega_0: f(s.omega_0, omega_r - 2.0 * nu_1),
        lambda: f(s.lambda, base.lambda),
        eps_1: f(s.eps_1, base.eps_1),
        nu_1,
        phi_1: s.phi_1.unwrap_or(base.phi_1),
        eps_2: f(s.eps_2, base.eps_2),
        nu_2: f(s.nu_2, base.nu_2),
        phi_2: s.phi_2.unwrap_or(base.phi_2),
        omega_drive: f(s.omega_drive, base.omega_drive),
        theta: s.theta.unwrap_or(base.theta),
        delta: f(s.delta, base.delta),
        eps_drive: f(s.eps_drive, base.eps_drive),
        drive_detuning: f(s.drive_detuning, base.drive_detuning),
    };
    p.validate().map_err(|e| match e {
        crate::circuit::CircuitError::InvalidParameter { name, reason } => ConfigError::new(format!("circuit.{name}"), reason),
        other => ConfigError::new("circuit", other.to_string()),
    })?;
    if scenario == ScenarioId::Klein && p.eps_2 != 0.0 {
        return Err(ConfigError::new("circuit.eps_2", "the Klein scenario is massless; eps_2 must be 0"));
    }
    let n_max = s.n_max.unwrap_or(if scenario == ScenarioId::Compare { 12 } else { 30 });
    if !(4..=MAX_N_MAX).contains(&n_max) {
        return Err(ConfigError::new("circuit.n_max", format!("must lie in [4, {MAX_N_MAX}]")));
    }
    Ok((p, n_max))
}

fn finite(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(field, "must be finite"))
    }
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be finite and positive, got {v}")))
    }
}

/// Dotted key path of the TOML entry covering byte offset `pos`.
fn locate_key(text: &str, pos: usize) -> String {
    let mut table = String::new();
    let mut key = String::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            table = trimmed.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            key.clear();
        } else if let Some((k, _)) = trimmed.split_once('=') {
            key = k.trim().to_string();
        }
        offset += line.len();
        if offset > pos {
            break;
        }
    }
    match (table.is_empty(), key.is_empty()) {
        (true, true) => "<file>".into(),
        (true, false) => key,
        (false, true) => table,
        (false, false) => format!("{table}.{key}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = ScenarioConfig::from_toml_str("scenario = \"zitterbewegung\"").unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.model, Model::EffectiveCircuit);
        assert_eq!(r.circuit, CircuitParams::zitterbewegung());
        assert_eq!(r.snapshots, vec![0.0, 90.0, 178.0, 240.0, 330.0]);
        assert_eq!(r.n_max, 30);
        assert_eq!(r.trace_times().len(), 166);
        assert_eq!(r.frame, FrameAngles::zitterbewegung());
    }

    #[test]
    fn frequencies_need_units() {
        let err = ScenarioConfig::from_toml_str("scenario = \"klein\"\n[circuit]\nlambda = \"19.91\"\n").unwrap_err();
        assert_eq!(err.field, "circuit.lambda");
        let cfg = ScenarioConfig::from_toml_str("scenario = \"klein\"\n[circuit]\nlambda = \"0.1 rad_per_ns\"\n").unwrap();
        assert_eq!(cfg.resolve().unwrap().circuit.lambda, 0.1);
    }

    #[test]
    fn klein_defaults_and_mass_check() {
        let r = ScenarioConfig::from_toml_str("scenario = \"klein\"").unwrap().resolve().unwrap();
        assert_eq!(r.circuit.eps_2, 0.0);
        assert!((r.circuit.eps_drive - mhz(0.39)).abs() < 1e-15);
        assert_eq!(r.frame.t_f, 280.0);
        assert_eq!(*r.snapshots.last().unwrap(), 288.0);
        let err = ScenarioConfig::from_toml_str("scenario = \"klein\"\n[circuit]\neps_2 = \"8.8 MHz\"\n")
            .unwrap()
            .resolve()
            .unwrap_err();
        assert_eq!(err.field, "circuit.eps_2");
    }

    #[test]
    fn rejections_name_the_field() {
        let cases = [
            ("scenario = \"positive_branch\"\nmodel = \"full_circuit\"", "model"),
            ("scenario = \"zitterbewegung\"\n[times]\nsnapshots = [0.0, 400.0]", "times.snapshots"),
            ("scenario = \"zitterbewegung\"\n[grid]\nn_x = 1", "grid"),
            ("scenario = \"zitterbewegung\"\n[integrator]\nrel_tol = 0.1", "integrator.rel_tol"),
            ("scenario = \"zitterbewegung\"\n[circuit]\nn_max = 2", "circuit.n_max"),
            ("scenario = \"zitterbewegung\"\n[initial]\np0 = 9.0", "initial.p0"),
            ("model = \"continuum\"", "scenario"),
        ];
        for (text, field) in cases {
            let err = ScenarioConfig::from_toml_str(text).and_then(|c| c.resolve()).unwrap_err();
            assert_eq!(err.field, field, "{text}");
        }
        let err = ScenarioConfig::from_toml_str("scenario = \"zitterbewegung\"\nbogus = 1").unwrap_err();
        assert!(err.reason.contains("bogus"));
    }

    #[test]
    fn continuum_follows_effective_constants() {
        let r = ScenarioConfig::from_toml_str("scenario = \"zitterbewegung\"\nmodel = \"continuum\"").unwrap().resolve().unwrap();
        let ep = effective_params(&r.circuit);
        assert!((r.continuum.unwrap().c() - ep.c_star).abs() < 1e-15);
        assert!((r.continuum.unwrap().rest_energy() - ep.omega).abs() < 1e-15);
        let r = ScenarioConfig::from_toml_str("scenario = \"positive_branch\"").unwrap().resolve().unwrap();
        assert_eq!((r.continuum.unwrap().c(), r.continuum.unwrap().m()), (1.0, 1.0));
        assert_eq!((r.p0, r.delta_p), (1.0, 1.0));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ScenarioConfig::from_toml_str(
            "scenario = \"compare\"\nseed = 3\n[circuit]\nnu_1 = \"20 MHz\"\n[compare]\nphase_search = false\n",
        )
        .unwrap();
        let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
        let r = back.resolve().unwrap();
        assert!(r.phase_search.is_none());
        assert!((r.circuit.omega_0 - (r.circuit.omega_r - 2.0 * mhz(20.0))).abs() < 1e-12);
    }
}
