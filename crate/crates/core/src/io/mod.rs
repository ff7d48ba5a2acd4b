//! Run configuration, canonical scenarios, and artifact export.

mod config;
mod export;
mod scenario;

pub use config::{parse_config, AnalysisOptions, AxisSpec, ScenarioSpec};
pub use export::{
    emit_plot_script, export_json, export_trajectory, import_summary, import_trajectory, sci17,
    to_json_bytes, write_atomic,
};
pub use scenario::{builtin_scenario, default_t_end, run_scenario, RunSummary, BUILTIN_IDS};
