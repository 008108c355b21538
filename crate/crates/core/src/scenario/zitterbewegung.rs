use super::common::{circuit_branches, circuit_states, continuum_branches, record_validity, snapshot_failed, write_snapshot, Branches};
use super::config::{Model, ResolvedConfig};
use super::output::RunRecorder;
use super::ScenarioError;
use crate::circuit::{prepare_initial, QubitResonatorState};
use crate::dirac::{
    entanglement_entropy, evolve, mean_position_numeric, reduced_pseudospin, MeanPositionTerms, SpinorMomentumState,
};
use crate::tomography::{
    conditional_distribution, fit_photon_distribution, pipeline_conditional_wigner, simulate_rabi,
    wigner_from_distributions, FitOptions, Outcome, RabiTrace, TomographyError,
};
use crate::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Zitterbewegung run: `⟨x⟩(t)` and entropy traces plus conditional and
/// unconditional Wigner snapshots.
pub fn run_zitterbewegung(cfg: &ResolvedConfig, rec: &mut RunRecorder) -> Result<(), ScenarioError> {
    match cfg.model {
        Model::Continuum => continuum(cfg, rec),
        _ => circuit(cfg, rec),
    }
}

fn continuum(cfg: &ResolvedConfig, rec: &mut RunRecorder) -> Result<(), ScenarioError> {
    let params = cfg.continuum.expect("continuum model carries Dirac parameters");
    let s0 = SpinorMomentumState::gaussian(cfg.momentum, cfg.p0, cfg.delta_p, cfg.x0, cfg.rotation.apply_to_ground())?;
    let terms = MeanPositionTerms::new(&s0, &params)?;
    let times = cfg.trace_times();
    let rows: Result<Vec<Vec<f64>>, ScenarioError> = times
        .par_iter()
        .map(|&t| {
            let st = evolve(&s0, t, &params);
            let x = mean_position_numeric(&st)?.mean;
            let rho = reduced_pseudospin(&st);
            Ok(vec![t, x, terms.at(t), entanglement_entropy(&rho), rho.matrix()[0][0].re])
        })
        .collect();
    let rows = rows?;
    rec.write_table("trace", &["t", "mean_x", "mean_x_analytic", "entropy", "p_e"], &rows)?;
    trace_metrics(rec, &rows, 3);
    let dev = rows.iter().map(|r| (r[1] - r[2]).abs()).fold(0.0, f64::max);
    rec.metric("max_analytic_deviation", dev);

    for &t in &cfg.snapshots {
        let result = continuum_branches(&evolve(&s0, t, &params), &cfg.grid).and_then(|b| write_snapshot(rec, t, &b));
        if let Err(e) = result {
            snapshot_failed(rec, t, e)?;
        }
    }
    Ok(())
}

fn circuit(cfg: &ResolvedConfig, rec: &mut RunRecorder) -> Result<(), ScenarioError> {
    record_validity(cfg, rec);
    let s0 = prepare_initial(cfg.p0, cfg.rotation, cfg.n_max)?;
    let times = cfg.trace_times();
    let states = circuit_states(cfg, &s0, &times)?;
    let rows: Vec<Vec<f64>> = times
        .iter()
        .zip(&states)
        .map(|(&t, s)| vec![t, s.mean_x(), entanglement_entropy(&s.reduced_qubit()), s.population_e()])
        .collect();
    rec.write_table("trace", &["t", "mean_x", "entropy", "p_e"], &rows)?;
    trace_metrics(rec, &rows, 2);

    let snaps = circuit_states(cfg, &s0, &cfg.snapshots)?;
    for (&t, state) in cfg.snapshots.iter().zip(&snaps) {
        let result = if cfg.model == Model::TomographyPipeline {
            pipeline_branches(cfg, state, t)
        } else {
            circuit_branches(state, &cfg.grid)
        };
        if let Err(e) = result.and_then(|b| write_snapshot(rec, t, &b)) {
            snapshot_failed(rec, t, e)?;
        }
    }
    Ok(())
}

fn trace_metrics(rec: &mut RunRecorder, rows: &[Vec<f64>], entropy_col: usize) {
    let last = rows.last().expect("trace has at least one sample");
    rec.metric("final_entropy", last[entropy_col]);
    rec.metric("max_entropy", rows.iter().map(|r| r[entropy_col]).fold(0.0, f64::max));
    rec.metric("max_abs_mean_x", rows.iter().map(|r| r[1].abs()).fold(0.0, f64::max));
}

/// Conditional Wigner functions obtained as in the measurement chain: the
/// conditioned field is rotated by the branch frame angle, then read out by
/// displaced photon statistics, optionally passed through a simulated and
/// refitted Rabi trace.
fn pipeline_branches(cfg: &ResolvedConfig, state: &QubitResonatorState, t: f64) -> Result<Branches, ScenarioError> {
    let joint = state.joint_density();
    let total = state.norm_sqr();
    let (p_e, p_g) = (state.population_e() / total, state.population_g() / total);
    let mut out = Branches { e: None, g: None, p_e, p_g };
    if !cfg.tomography.through_rabi {
        for (outcome, pop) in [(Outcome::Excited, p_e), (Outcome::Ground, p_g)] {
            if pop < 1e-12 {
                continue;
            }
            let (w, _) = pipeline_conditional_wigner(&joint, outcome, &cfg.frame, t, &cfg.grid)?;
            match outcome {
                Outcome::Excited => out.e = Some(w),
                Outcome::Ground => out.g = Some(w),
            }
        }
        return Ok(out);
    }
    let rotated = state
        .rotate_branches([cfg.frame.angle(0, t), cfg.frame.angle(1, t)])
        .joint_density();
    let tomo = cfg.tomography;
    let taus = RabiTrace::default_taus();
    let fit = FitOptions::new(tomo.fit_n_max);
    for (outcome, pop) in [(Outcome::Excited, p_e), (Outcome::Ground, p_g)] {
        if pop < 1e-12 {
            continue;
        }
        let dist = |gamma: C64| {
            let (d, _) = conditional_distribution(&rotated, outcome, gamma)?;
            let mut trace = simulate_rabi(&d, tomo.probe, &taus)?;
            if tomo.rabi_noise_sigma > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(point_seed(cfg.seed, t, outcome, gamma));
                trace = trace.with_noise(tomo.rabi_noise_sigma, &mut rng)?;
            }
            Ok::<_, TomographyError>(fit_photon_distribution(&trace, &fit)?.distribution)
        };
        let w = wigner_from_distributions(&cfg.grid, 1.0, dist)?;
        match outcome {
            Outcome::Excited => out.e = Some(w),
            Outcome::Ground => out.g = Some(w),
        }
    }
    Ok(out)
}

/// Per-point noise seed, so results do not depend on scheduling order.
fn point_seed(seed: u64, t: f64, outcome: Outcome, gamma: C64) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for v in [t.to_bits(), outcome.index() as u64, gamma.re.to_bits(), gamma.im.to_bits()] {
        h = (h ^ v).wrapping_mul(0x1000_0000_01b3).rotate_left(29);
    }
    h
}
