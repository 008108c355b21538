use super::common::{continuum_branches, pearson, snapshot_failed, write_snapshot};
use super::config::ResolvedConfig;
use super::output::RunRecorder;
use super::ScenarioError;
use crate::dirac::{
    entanglement_entropy, evolve, mean_position_numeric, positive_branch_state, reduced_pseudospin, MomentumGrid,
};
use rayon::prelude::*;

/// Positive-energy wavepacket: `⟨x⟩(t)` and entropy traces, the
/// entropy-vs-`δp` sweep and Wigner snapshots.
pub fn run_positive_branch(cfg: &ResolvedConfig, rec: &mut RunRecorder) -> Result<(), ScenarioError> {
    let params = cfg.continuum.expect("continuum model carries Dirac parameters");
    let s0 = positive_branch_state(cfg.p0, cfg.delta_p, |_| 0.0, cfg.momentum, &params)?;
    let times = cfg.trace_times();
    let rows: Result<Vec<Vec<f64>>, ScenarioError> = times
        .par_iter()
        .map(|&t| {
            let st = evolve(&s0, t, &params);
            Ok(vec![t, mean_position_numeric(&st)?.mean, entanglement_entropy(&reduced_pseudospin(&st))])
        })
        .collect();
    let rows = rows?;
    rec.write_table("trace", &["t", "mean_x", "entropy"], &rows)?;
    let s_init = rows[0][2];
    rec.metric("entropy_drift", rows.iter().map(|r| (r[2] - s_init).abs()).fold(0.0, f64::max));
    let ts: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let xs: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    rec.metric("mean_x_correlation", pearson(&ts, &xs));

    let sweep: Result<Vec<Vec<f64>>, ScenarioError> = cfg
        .delta_p_sweep
        .par_iter()
        .map(|&dp| {
            let st = positive_branch_state(cfg.p0, dp, |_| 0.0, MomentumGrid::around(cfg.p0, dp)?, &params)?;
            Ok(vec![dp, entanglement_entropy(&reduced_pseudospin(&st))])
        })
        .collect();
    rec.write_table("entropy_vs_delta_p", &["delta_p", "entropy"], &sweep?)?;

    for &t in &cfg.snapshots {
        let result = continuum_branches(&evolve(&s0, t, &params), &cfg.grid).and_then(|b| write_snapshot(rec, t, &b));
        if let Err(e) = result {
            snapshot_failed(rec, t, e)?;
        }
    }
    Ok(())
}
