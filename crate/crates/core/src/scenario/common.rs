use super::config::{Model, ResolvedConfig};
use super::output::{time_tag, RunRecorder};
use super::ScenarioError;
use crate::circuit::{
    dirac_frame, dirac_frame_rate, effective_hamiltonian, effective_params, integrate, FullHamiltonian,
    QubitResonatorState, StaticPropagator, TAIL_LIMIT,
};
use crate::dirac::{reduced_pseudospin, spinor, SpinorMomentumState};
use crate::wigner::{
    combine_conditional, conditional_wigner, count_modes, marginal_x, wigner_from_fock_density, PhaseSpaceGrid,
    WignerError, WignerGrid,
};
use rayon::prelude::*;

/// Evolves `state0` with the configured circuit model and returns the states
/// at `times` (sorted), in the frame where the effective Dirac Hamiltonian applies.
pub(crate) fn circuit_states(
    cfg: &ResolvedConfig,
    state0: &QubitResonatorState,
    times: &[f64],
) -> Result<Vec<QubitResonatorState>, ScenarioError> {
    let states = match cfg.model {
        Model::FullCircuit => full_states(cfg, state0, times)?,
        _ => effective_states(cfg, state0, times),
    };
    for (t, s) in times.iter().zip(&states) {
        let tail = s.tail_population();
        if tail > TAIL_LIMIT {
            return Err(ScenarioError::Numeric(format!(
                "Fock truncation at t = {t} ns: top-level population {tail:e} exceeds {TAIL_LIMIT:e}; raise n_max"
            )));
        }
    }
    Ok(states)
}

pub(crate) fn effective_states(cfg: &ResolvedConfig, state0: &QubitResonatorState, times: &[f64]) -> Vec<QubitResonatorState> {
    let ep = effective_params(&cfg.circuit);
    let h = effective_hamiltonian(&ep, cfg.circuit.theta, cfg.circuit.eps_drive, state0.n_max());
    let u = StaticPropagator::new(&h);
    times.par_iter().map(|&t| u.evolve_state(state0, t)).collect()
}

pub(crate) fn full_states(
    cfg: &ResolvedConfig,
    state0: &QubitResonatorState,
    times: &[f64],
) -> Result<Vec<QubitResonatorState>, ScenarioError> {
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let h = FullHamiltonian::new(cfg.circuit, state0.n_max());
    let traj = integrate(state0, &h, (0.0, t_end), times, &cfg.integrator.options())?;
    let rate = dirac_frame_rate(&cfg.circuit);
    Ok(traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| dirac_frame(s, rate, cfg.circuit.theta, t))
        .collect())
}

pub(crate) fn record_validity(cfg: &ResolvedConfig, rec: &mut RunRecorder) {
    rec.warnings.extend(effective_params(&cfg.circuit).diagnostics.warnings());
}

/// Unit-weight conditional Wigner functions with their branch populations.
/// A branch with vanishing population carries no Wigner function.
pub(crate) struct Branches {
    pub e: Option<WignerGrid>,
    pub g: Option<WignerGrid>,
    pub p_e: f64,
    pub p_g: f64,
}

impl Branches {
    pub fn unconditional(&self) -> Result<WignerGrid, WignerError> {
        match (&self.e, &self.g) {
            (Some(e), Some(g)) => combine_conditional(e, g, self.p_e, self.p_g),
            (Some(w), None) | (None, Some(w)) => Ok(w.clone()),
            (None, None) => Err(WignerError::ZeroWeight { weight: 0.0 }),
        }
    }
}

const MIN_POPULATION: f64 = 1e-12;

pub(crate) fn continuum_branches(state: &SpinorMomentumState, grid: &PhaseSpaceGrid) -> Result<Branches, ScenarioError> {
    let rho = reduced_pseudospin(state).matrix();
    let total = rho[0][0].re + rho[1][1].re;
    let (p_e, p_g) = (rho[0][0].re / total, rho[1][1].re / total);
    let branch = |s, pop: f64| -> Result<Option<WignerGrid>, ScenarioError> {
        if pop < MIN_POPULATION {
            return Ok(None);
        }
        Ok(Some(conditional_wigner(state, &s, grid)?.normalized()?))
    };
    Ok(Branches { e: branch(spinor::excited(), p_e)?, g: branch(spinor::ground(), p_g)?, p_e, p_g })
}

pub(crate) fn circuit_branches(state: &QubitResonatorState, grid: &PhaseSpaceGrid) -> Result<Branches, ScenarioError> {
    let total = state.norm_sqr();
    let branch = |q: usize| -> Result<(Option<WignerGrid>, f64), ScenarioError> {
        match state.conditional_field(q) {
            Some((rho, pop)) => Ok((Some(wigner_from_fock_density(&rho, grid)?.normalized()?), pop / total)),
            None => Ok((None, 0.0)),
        }
    };
    let (e, p_e) = branch(0)?;
    let (g, p_g) = branch(1)?;
    Ok(Branches { e, g, p_e, p_g })
}

/// Writes the conditional and unconditional Wigner functions and the
/// position marginal of one snapshot; returns the unconditional function.
pub(crate) fn write_snapshot(rec: &mut RunRecorder, t: f64, b: &Branches) -> Result<WignerGrid, ScenarioError> {
    let tag = time_tag(t);
    if let Some(w) = &b.e {
        rec.write_wigner(&format!("wigner_e_t{tag}"), w, t, "e")?;
        rec.metric(format!("min_w_e_t{tag}"), w.min_value());
    }
    if let Some(w) = &b.g {
        rec.write_wigner(&format!("wigner_g_t{tag}"), w, t, "g")?;
        rec.metric(format!("min_w_g_t{tag}"), w.min_value());
    }
    let w = b.unconditional()?;
    rec.write_wigner(&format!("wigner_t{tag}"), &w, t, "none")?;
    rec.metric(format!("min_w_t{tag}"), w.min_value());
    let marginal = marginal_x(&w);
    rec.metric(format!("marginal_modes_t{tag}"), count_modes(&marginal) as f64);
    let rows: Vec<Vec<f64>> = w.grid().xs().into_iter().zip(&marginal).map(|(x, &m)| vec![x, m]).collect();
    rec.write_table(&format!("marginal_t{tag}"), &["x", "p_x"], &rows)?;
    rec.metric(format!("p_e_t{tag}"), b.p_e);
    Ok(w)
}

/// Records a snapshot failure; the run continues and ends as partial.
pub(crate) fn snapshot_failed(rec: &mut RunRecorder, t: f64, e: ScenarioError) -> Result<(), ScenarioError> {
    match e {
        ScenarioError::Io(_) | ScenarioError::Config(_) => Err(e),
        ScenarioError::Numeric(msg) => {
            log::warn!("snapshot t = {t} ns failed: {msg}");
            rec.failures.push(format!("snapshot t = {t} ns: {msg}"));
            Ok(())
        }
    }
}

pub(crate) fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Least-squares slope of `ys` against `xs`.
pub(crate) fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
