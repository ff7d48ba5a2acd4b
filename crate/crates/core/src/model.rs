//! Common contract for piecewise-smooth systems: smooth dynamics away from
//! switching surfaces plus set-valued torque slots for sliding resolution.

use crate::error::Result;
use crate::state::TorqueInterval;

/// Per-surface branch selection handed to the right-hand side.
///
/// `Free` picks the smooth extension with friction sign `sigma`; `Stuck`
/// pins the surface's velocity coordinate and supplies the reconstructed
/// holding torque (which must lie inside the holding interval).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceMode {
    Free { sigma: f64 },
    Stuck { torque: f64 },
}

impl SurfaceMode {
    pub fn is_stuck(&self) -> bool {
        matches!(self, SurfaceMode::Stuck { .. })
    }
}

/// A dynamical system with optional switching surfaces.
///
/// Implementations must be pure: `rhs` may not mutate shared state, so one
/// model instance can serve any number of concurrent integrations.
pub trait SystemModel: Sync {
    fn dim(&self) -> usize;

    fn names(&self) -> &[&'static str];

    /// Derivative of the active smooth branch. `modes.len()` must equal
    /// `n_surfaces()`; the derivative of a stuck coordinate is exactly zero.
    fn rhs(&self, y: &[f64], modes: &[SurfaceMode], out: &mut [f64]) -> Result<()>;

    fn n_surfaces(&self) -> usize {
        0
    }

    /// Zero exactly when the surface's velocity coordinate sits at its
    /// reference value. Continuously differentiable in the state.
    fn guard(&self, surface: usize, y: &[f64]) -> f64 {
        let _ = y;
        panic!("model has no switching surface {surface}");
    }

    /// Index of the velocity coordinate pinned while sliding.
    fn stuck_coordinate(&self, surface: usize) -> usize {
        panic!("model has no switching surface {surface}");
    }

    /// Value the stuck coordinate holds during sliding.
    fn reference_velocity(&self, surface: usize) -> f64 {
        panic!("model has no switching surface {surface}");
    }

    /// Friction interval available to hold the stick.
    fn holding_interval(&self, surface: usize, y: &[f64]) -> TorqueInterval {
        let _ = y;
        panic!("model has no switching surface {surface}");
    }

    /// Net non-friction torque on the stuck body; sliding persists while
    /// this stays strictly inside the holding interval.
    fn balance_torque(&self, surface: usize, y: &[f64]) -> f64 {
        let _ = y;
        panic!("model has no switching surface {surface}");
    }

    /// Coordinates nothing in the right-hand side depends on (drifting
    /// angles). Excluded from equilibrium residuals and stability analysis.
    fn cyclic_coords(&self) -> &[usize] {
        &[]
    }

    /// Indices of the angular-velocity coordinates used for steady-state
    /// metrics (per disc / rotor).
    fn velocity_indices(&self) -> &[usize];

    /// No-load reference speed, where the model defines one; used to tell
    /// resonance capture from full-speed rotation.
    fn no_load_velocity(&self) -> Option<f64> {
        None
    }
}

/// Slack factor for validating a supplied stuck torque against the holding
/// interval: root-finding legitimately samples slightly past the release
/// boundary mid-step, so the check only rejects clear contract violations.
pub(crate) fn torque_within_slack(iv: TorqueInterval, torque: f64) -> bool {
    let slack = 0.25 * (iv.hi - iv.lo) + 1e-9;
    torque >= iv.lo - slack && torque <= iv.hi + slack
}
