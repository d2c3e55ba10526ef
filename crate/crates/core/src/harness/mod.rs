//! Experiment configuration, execution, verification and reports.

mod config;
mod report;
mod run;
mod verify;

pub use config::{ExperimentConfig, Format, GraphSource, Mode, Questions};
pub use report::{
    emit_report, Aggregate, ComponentStats, GraphInfo, NamedVerdict, ProbeStats, Report, RunReport,
    Timing,
};
pub use run::{
    certify, complete_globally, least_squares_slope, question_list, residual_components,
    run_experiment,
};
pub use verify::{verify_mis, verify_region, MisVerdict, MisViolation, Verdict};
