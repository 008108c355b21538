use super::common::{effective_states, full_states, record_validity};
use super::config::ResolvedConfig;
use super::output::RunRecorder;
use super::ScenarioError;
use crate::circuit::{optimize_phases, prepare_initial, CircuitParams, QubitResonatorState};
use crate::dirac::entanglement_entropy;

/// Aligned `P_e`, `⟨x⟩` and entropy traces of the effective and full circuit
/// models, with deviation statistics. With a phase search configured, the
/// full model first has its modulation phases and detuning fitted to the
/// effective `P_e` trace.
pub fn compare_full_vs_effective(cfg: &ResolvedConfig, rec: &mut RunRecorder) -> Result<(), ScenarioError> {
    record_validity(cfg, rec);
    let s0 = prepare_initial(cfg.p0, cfg.rotation, cfg.n_max)?;
    let times = cfg.trace_times();
    let effective = effective_states(cfg, &s0, &times);
    let reference: Vec<f64> = effective.iter().map(QubitResonatorState::population_e).collect();

    let mut full_cfg = cfg.clone();
    if let Some(grid) = &cfg.phase_search {
        let baseline = full_states(cfg, &s0, &times)?;
        rec.metric("max_dpe_unoptimized", max_dev(&baseline, &effective, QubitResonatorState::population_e));
        let best = optimize_phases(&cfg.circuit, &s0, &reference, &times, grid, &cfg.integrator.options())?;
        log::info!("phase search optimum: phi_1 = {}, phi_2 = {}, delta = {}", best.phi_1, best.phi_2, best.delta);
        rec.metric("opt_phi_1", best.phi_1);
        rec.metric("opt_phi_2", best.phi_2);
        rec.metric("opt_delta", best.delta);
        rec.metric("opt_residual", best.residual);
        full_cfg.circuit = CircuitParams { phi_1: best.phi_1, phi_2: best.phi_2, delta: best.delta, ..cfg.circuit };
    }
    let full = full_states(&full_cfg, &s0, &times)?;
    let tail = full.iter().map(QubitResonatorState::tail_population).fold(0.0, f64::max);
    if tail > crate::circuit::TAIL_LIMIT {
        rec.warnings.push(format!("full-model top Fock level population reached {tail:e}"));
    }

    let entropy = |s: &QubitResonatorState| entanglement_entropy(&s.reduced_qubit());
    let rows: Vec<Vec<f64>> = times
        .iter()
        .zip(effective.iter().zip(&full))
        .map(|(&t, (e, f))| vec![t, e.population_e(), f.population_e(), e.mean_x(), f.mean_x(), entropy(e), entropy(f)])
        .collect();
    rec.write_table("compare", &["t", "p_e_effective", "p_e_full", "mean_x_effective", "mean_x_full", "entropy_effective", "entropy_full"], &rows)?;
    rec.metric("max_dpe", max_dev(&full, &effective, QubitResonatorState::population_e));
    rec.metric("max_dx", max_dev(&full, &effective, QubitResonatorState::mean_x));
    rec.metric("max_dentropy", max_dev(&full, &effective, entropy));
    let n = rows.len() as f64;
    rec.metric("rms_dpe", (rows.iter().map(|r| (r[2] - r[1]).powi(2)).sum::<f64>() / n).sqrt());
    Ok(())
}

fn max_dev(a: &[QubitResonatorState], b: &[QubitResonatorState], f: impl Fn(&QubitResonatorState) -> f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (f(x) - f(y)).abs()).fold(0.0, f64::max)
}
