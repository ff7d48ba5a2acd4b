//! Simulation toolkit for piecewise-smooth torsional drive trains: exact
//! event-driven integration across dry-friction switching surfaces, steady
//! state analysis, and attractor classification, with a small CLI on top.

pub mod analysis;
pub mod error;
pub mod friction;
pub mod integrator;
pub mod io;
pub mod model;
pub mod models;
pub mod state;

#[cfg(test)]
pub(crate) mod testutil;

pub use analysis::{
    basin_scan, classify_attractor, find_equilibria, sommerfeld_ratio, steady_state_metrics,
    AttractorKind, AttractorReport, BasinMap, Classification, ClassifyConfig, Equilibrium,
    GridSpec, SearchConfig,
};
pub use error::{Error, Result};
pub use integrator::{integrate, Event, EventKind, IntegrationConfig, Trajectory};
pub use io::{builtin_scenario, parse_config, run_scenario, RunSummary, ScenarioSpec};
pub use model::{SurfaceMode, SystemModel};
pub use models::{build_model, Model};
pub use state::{State, TorqueInterval};
