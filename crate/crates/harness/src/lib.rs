//! Sweep orchestration for the alternating-boundary eigenvalue studies: configs, per-point
//! pipelines, convergence fits, theorem checks and reports. The `freqbc` binary wraps it.

pub mod checks;
pub mod config;
pub mod fit;
pub mod layer;
pub mod report;
pub mod study;

pub use checks::{appendix_slope_check, check_monotonicity, CheckSummary, MonotonicityReport, SlopeReport};
pub use config::{BaseSpec, ConfigError, CurveSpec, EtaRule, MeshSpec, Regime, StudyConfig, Tolerances};
pub use fit::{fit_rate, FitError, RateFit};
pub use report::{emit_report, results_csv, StudyOutput};
pub use study::{run_point, run_sweep, ModeRecord, Status, StudyRecord};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Numerical(String),
    #[error("theorem check failed: {0}")]
    Violation(String),
    #[error(transparent)]
    Report(#[from] report::ReportError),
}

impl HarnessError {
    /// Process exit code: 2 config, 3 numerical, 4 theorem violation; I/O maps to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numerical(_) => 3,
            HarnessError::Violation(_) => 4,
            HarnessError::Report(_) => 1,
        }
    }
}

/// Runs the sweep and derives fits and checks; violations are reported, not raised.
pub fn run_study(cfg: &StudyConfig, jobs: usize) -> Result<StudyOutput, HarnessError> {
    let records = run_sweep(cfg, jobs)?;
    let fits = checks::remainder_fits(cfg, &records)
        .into_iter()
        .map(|(mode, fit)| report::ModeFit { mode, fit })
        .collect();
    let checks = checks::theorem_checks(cfg, &records);
    Ok(StudyOutput {
        config: cfg.clone(),
        records,
        fits,
        checks,
    })
}

impl StudyOutput {
    /// Failed theorem checks and flagged records, as one message.
    pub fn violations(&self) -> Option<String> {
        let mut v: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        v.extend(self.records.iter().filter(|r| r.status == Status::Flagged).map(|r| format!("N={} flagged", r.n)));
        (!v.is_empty()).then(|| v.join("; "))
    }
}
