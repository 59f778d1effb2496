//! Scenario orchestration: configuration loading, the check/run pipelines,
//! convergence studies, parameter sweeps, and artifact emission.

mod config;
mod converge;
mod report;
mod run;
mod sweep;

pub use config::{
    load_config, parse_config, DriftSpec, DynamicsConfig, GridConfig, InitialStateConfig,
    InitialStateSpec, OutputConfig, PotentialSpec, ScenarioConfig, SweepAxis, VerificationConfig,
};
pub use converge::{convergence_study, ConvergenceRung, ConvergenceStudy};
pub use report::{p_label, render_report_json, render_series_csv, write_artifacts};
pub use run::{
    check_pipeline, exit_code, run_pipeline, MeasuredInitial, RunOutcome, RunReport,
    Verifications, UNITARITY_TOL,
};
pub use sweep::{apply_axis, render_sweep_csv, sweep, SweepRow, SweepTable};
