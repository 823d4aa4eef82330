//! Experiment configuration, the verification suite and result records.

pub mod config;
pub mod experiments;
pub mod record;

use std::path::Path;

pub use config::{ExperimentConfig, Probe, DEFAULT_SUITE};
pub use experiments::{
    capacity_deficiency_trend, conditional_capacity, laplace_sweep, probe_pairings, reference_box_capacity, run_experiment,
    sample_seed, verify_census, verify_intersection_identity, verify_laplace, verify_vacancy, EXPERIMENTS,
};
pub use record::{read_records, save_records, write_records, Format, ResultRecord};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub records: Vec<ResultRecord>,
}

impl SuiteOutcome {
    pub fn hard_failures(&self) -> usize {
        self.records.iter().filter(|r| r.hard && !r.pass).count()
    }

    /// 0 when every hard check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.hard_failures() == 0 { 0 } else { 1 }
    }
}

/// Runs the experiments listed in `cfg.suite` in order.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteOutcome> {
    cfg.validate()?;
    if let Some(bad) = cfg.suite.iter().find(|s| !EXPERIMENTS.contains(&s.as_str())) {
        return Err(Error::InvalidParameter(format!("unknown experiment '{bad}'")));
    }
    let mut records = Vec::new();
    for name in &cfg.suite {
        records.extend(run_experiment(name, cfg)?);
    }
    Ok(SuiteOutcome { records })
}

/// Parses a config file and runs its suite.
pub fn run_suite_file(path: &Path) -> Result<SuiteOutcome> {
    run_suite(&ExperimentConfig::from_file(path)?)
}

/// Records equal up to wall-clock time.
pub fn records_match(a: &[ResultRecord], b: &[ResultRecord]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.without_timing() == y.without_timing())
}
