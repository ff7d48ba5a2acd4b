//! Post-processing: equilibria, steady-state metrics, hidden/self-excited
//! classification, and basin-of-attraction scans.

mod basin;
mod classify;
mod equilibria;
mod metrics;

pub use basin::{basin_scan, AttractorClass, BasinMap, GridSpec};
pub use classify::{classify_attractor, ClassifyConfig};
pub use equilibria::{
    find_equilibria, jacobian, jacobian_with_modes, Equilibrium, RestFamily, SearchConfig,
};
pub use metrics::{
    sommerfeld_ratio, steady_state_metrics, AttractorKind, AttractorReport, Classification,
    ProbeOutcome, ProbeRecord,
};
