//! Configuration-driven experiment runners. Each run resolves a TOML
//! configuration, computes traces and phase-space snapshots, and writes CSV
//! and JSON artifacts plus a `manifest.json` into the output directory.

mod common;
mod compare;
mod config;
mod klein;
mod output;
mod positive;
mod zitterbewegung;

pub use compare::compare_full_vs_effective;
pub use config::{
    CircuitSection, CompareSection, ConfigError, ContinuumSection, FrameSection, GridSection, InitialSection,
    IntegratorSection, Model, MomentumSection, PhaseSearchGridSection, PositiveBranchSection, ResolvedConfig,
    ResolvedIntegrator, ResolvedTomography, ScenarioConfig, ScenarioId, TimesSection, TomographySection,
};
pub use klein::run_klein;
pub use output::{time_tag, FileRecord, Manifest, Provenance, RunRecorder, RunStatus, CODE_VERSION};
pub use positive::run_positive_branch;
pub use zitterbewegung::run_zitterbewegung;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl ScenarioError {
    /// Process exit code: 2 for configuration errors, 3 for numerical
    /// failures, 1 for output errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) => 2,
            ScenarioError::Numeric(_) => 3,
            ScenarioError::Io(_) => 1,
        }
    }
}

macro_rules! numeric_from {
    ($($t:ty),*) => {$(
        impl From<$t> for ScenarioError {
            fn from(e: $t) -> Self {
                ScenarioError::Numeric(e.to_string())
            }
        }
    )*};
}
numeric_from!(
    crate::circuit::CircuitError,
    crate::dirac::DiracError,
    crate::wigner::WignerError,
    crate::tomography::TomographyError
);

/// Runs the configured scenario. On a numerical failure the artifacts written
/// so far are kept and a manifest with status `failed` is flushed.
pub fn run(cfg: &ResolvedConfig) -> Result<Manifest, ScenarioError> {
    let mut rec = RunRecorder::new(cfg)?;
    let result = match cfg.scenario {
        ScenarioId::Zitterbewegung => run_zitterbewegung(cfg, &mut rec),
        ScenarioId::PositiveBranch => run_positive_branch(cfg, &mut rec),
        ScenarioId::Klein => run_klein(cfg, &mut rec),
        ScenarioId::Compare => compare_full_vs_effective(cfg, &mut rec),
    };
    match result {
        Ok(()) => {
            let status = if rec.failures.is_empty() { RunStatus::Success } else { RunStatus::Partial };
            Ok(rec.finish(status)?)
        }
        Err(e) => {
            rec.failures.push(e.to_string());
            rec.finish(RunStatus::Failed)?;
            Err(e)
        }
    }
}
