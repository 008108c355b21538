use super::common::{circuit_branches, circuit_states, record_validity, slope, snapshot_failed, write_snapshot};
use super::config::ResolvedConfig;
use super::output::{time_tag, RunRecorder};
use super::ScenarioError;
use crate::circuit::prepare_initial;
use crate::dirac::entanglement_entropy;
use crate::tomography::{gamma_lattice, reconstruct_density, synthesize_samples, ReconstructOptions};
use crate::wigner::{count_modes, discriminate_wavepackets, marginal_x, WignerError, DEFAULT_INDISTINCT_THRESHOLD};

/// Klein tunnelling: traces, Wigner snapshots and the discriminated
/// `(⟨x⟩±, ⟨p⟩±)` of the two wavepackets.
pub fn run_klein(cfg: &ResolvedConfig, rec: &mut RunRecorder) -> Result<(), ScenarioError> {
    record_validity(cfg, rec);
    let s0 = prepare_initial(cfg.p0, cfg.rotation, cfg.n_max)?;
    let times = cfg.trace_times();
    let states = circuit_states(cfg, &s0, &times)?;
    let rows: Vec<Vec<f64>> = times
        .iter()
        .zip(&states)
        .map(|(&t, s)| vec![t, s.mean_x(), s.mean_p(), entanglement_entropy(&s.reduced_qubit()), s.population_e()])
        .collect();
    rec.write_table("trace", &["t", "mean_x", "mean_p", "entropy", "p_e"], &rows)?;
    let p_init = s0.mean_p();

    let snaps = circuit_states(cfg, &s0, &cfg.snapshots)?;
    let mut packets = Vec::new();
    for (&t, state) in cfg.snapshots.iter().zip(&snaps) {
        let w = match circuit_branches(state, &cfg.grid).and_then(|b| write_snapshot(rec, t, &b)) {
            Ok(w) => w,
            Err(e) => {
                snapshot_failed(rec, t, e)?;
                continue;
            }
        };
        let bimodal = count_modes(&marginal_x(&w)) >= 2;
        let row = match discriminate_wavepackets(&w, DEFAULT_INDISTINCT_THRESHOLD) {
            Ok(s) if bimodal => {
                vec![t, s.pos.mean_x, s.pos.mean_p, s.pos.weight, s.neg.mean_x, s.neg.mean_p, s.neg.weight, 1.0]
            }
            Ok(_) | Err(WignerError::Indistinct { .. }) => {
                let m = crate::wigner::moments(&w)?;
                vec![t, m.mean_x, m.mean_p, w.weight(), f64::NAN, f64::NAN, 0.0, 0.0]
            }
            Err(e) => return Err(e.into()),
        };
        packets.push(row);
    }
    rec.write_table("packets", &["t", "x_pos", "p_pos", "w_pos", "x_neg", "p_neg", "w_neg", "distinct"], &packets)?;
    packet_metrics(cfg, rec, &packets, p_init);

    if cfg.tomography.reconstruct {
        reconstruct(cfg, rec, &snaps)?;
    }
    Ok(())
}

/// Drag of each packet's `⟨p⟩` against `√2 ε t`, and the `⟨x⟩` slopes over the distinct snapshots.
fn packet_metrics(cfg: &ResolvedConfig, rec: &mut RunRecorder, packets: &[Vec<f64>], p_init: f64) {
    let distinct: Vec<&Vec<f64>> = packets.iter().filter(|r| r[7] == 1.0).collect();
    rec.metric("distinct_snapshots", distinct.len() as f64);
    let Some(last) = distinct.last() else {
        rec.warnings.push("no snapshot resolved two wavepackets".into());
        return;
    };
    let expected = std::f64::consts::SQRT_2 * cfg.circuit.eps_drive * last[0];
    rec.metric("drag_expected", expected);
    for (name, col) in [("pos", 2), ("neg", 5)] {
        let drag = p_init - last[col];
        rec.metric(format!("drag_{name}"), drag);
        if expected != 0.0 {
            rec.metric(format!("drag_rel_error_{name}"), (drag - expected).abs() / expected.abs());
        }
    }
    if distinct.len() >= 2 {
        let ts: Vec<f64> = distinct.iter().map(|r| r[0]).collect();
        for (name, col) in [("pos", 1), ("neg", 4)] {
            let xs: Vec<f64> = distinct.iter().map(|r| r[col]).collect();
            rec.metric(format!("x_slope_{name}"), slope(&ts, &xs));
        }
    }
}

/// Reconstructs the field density of each snapshot from noiseless displaced
/// photon statistics and compares its moments with the simulated state.
fn reconstruct(
    cfg: &ResolvedConfig,
    rec: &mut RunRecorder,
    snaps: &[crate::circuit::QubitResonatorState],
) -> Result<(), ScenarioError> {
    let tomo = cfg.tomography;
    let gammas = gamma_lattice(tomo.gamma_extent, tomo.gamma_points);
    let mut rows = Vec::new();
    for (&t, state) in cfg.snapshots.iter().zip(snaps) {
        let pops = (state.population_e(), state.population_g());
        let attempt = synthesize_samples(&state.field_density(), &gammas, pops)
            .and_then(|s| reconstruct_density(&s, tomo.reconstruct_n_max, &ReconstructOptions::default()));
        match attempt {
            Ok(r) => {
                rows.push(vec![t, state.mean_x(), r.mean_x(), state.mean_p(), r.mean_p(), r.iterations as f64]);
                rec.metric(format!("reconstruct_objective_t{}", time_tag(t)), r.objective);
            }
            Err(e) => snapshot_failed(rec, t, e.into())?,
        }
    }
    rec.write_table("reconstruct", &["t", "mean_x", "mean_x_reconstructed", "mean_p", "mean_p_reconstructed", "iterations"], &rows)?;
    Ok(())
}
