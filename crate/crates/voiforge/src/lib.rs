//! File formats, synthetic cohorts and experiment orchestration on top of
//! `voiforge-core`.

pub mod config;
pub mod dataset;
pub mod error;
pub mod nrrd;
pub mod phantom;
pub mod pipeline;
pub mod report;
pub mod stl;
pub mod svg;
pub mod tables;

pub use config::{ExperimentConfig, Scenario};
pub use error::{Result, VfError};
pub use pipeline::{ExperimentRecord, Pipeline};

use std::path::Path;

/// Loads the cohort, runs every configured scenario and writes the reports.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let subjects = dataset::load_subjects(cfg)?;
    let record = Pipeline::default().run(cfg, &subjects)?;
    report::emit_reports(&record, &cfg.output_dir)?;
    Ok(record)
}

/// Convenience for callers holding a config path.
pub fn run_config_file(path: &Path) -> Result<ExperimentRecord> {
    run_experiment(&ExperimentConfig::load(path)?)
}
