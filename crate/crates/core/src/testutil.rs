//! Tiny reference systems with known closed-form behaviour, shared by the
//! unit tests of several modules.

use crate::error::Result;
use crate::model::{SurfaceMode, SystemModel};
use crate::state::TorqueInterval;

/// x'' = -x. Exact solution cos/sin, period 2 pi.
pub(crate) struct Harmonic;

impl SystemModel for Harmonic {
    fn dim(&self) -> usize {
        2
    }
    fn names(&self) -> &[&'static str] {
        &["x", "v"]
    }
    fn rhs(&self, y: &[f64], _modes: &[SurfaceMode], out: &mut [f64]) -> Result<()> {
        out[0] = y[1];
        out[1] = -y[0];
        Ok(())
    }
    fn velocity_indices(&self) -> &[usize] {
        &[1]
    }
}

/// Unit-mass spring block with Coulomb friction mu: x'' = -x - mu sign(v).
/// Sticks wherever |x| <= mu at v = 0; amplitude drops by 2 mu per half
/// swing.
pub(crate) struct CoulombBlock {
    pub mu: f64,
}

impl SystemModel for CoulombBlock {
    fn dim(&self) -> usize {
        2
    }
    fn names(&self) -> &[&'static str] {
        &["x", "v"]
    }
    fn rhs(&self, y: &[f64], modes: &[SurfaceMode], out: &mut [f64]) -> Result<()> {
        out[0] = y[1];
        out[1] = match modes[0] {
            SurfaceMode::Free { sigma } => -y[0] - self.mu * sigma,
            SurfaceMode::Stuck { .. } => 0.0,
        };
        Ok(())
    }
    fn n_surfaces(&self) -> usize {
        1
    }
    fn guard(&self, _surface: usize, y: &[f64]) -> f64 {
        y[1]
    }
    fn stuck_coordinate(&self, _surface: usize) -> usize {
        1
    }
    fn reference_velocity(&self, _surface: usize) -> f64 {
        0.0
    }
    fn holding_interval(&self, _surface: usize, _y: &[f64]) -> TorqueInterval {
        TorqueInterval::new(-self.mu, self.mu)
    }
    fn balance_torque(&self, _surface: usize, y: &[f64]) -> f64 {
        -y[0]
    }
    fn velocity_indices(&self) -> &[usize] {
        &[1]
    }
}

/// Van der Pol oscillator: x'' = mu (1 - x^2) x' - x. Every nonzero start
/// converges to a self-excited limit cycle around the unstable origin.
pub(crate) struct VanDerPol {
    pub mu: f64,
}

impl SystemModel for VanDerPol {
    fn dim(&self) -> usize {
        2
    }
    fn names(&self) -> &[&'static str] {
        &["x", "v"]
    }
    fn rhs(&self, y: &[f64], _modes: &[SurfaceMode], out: &mut [f64]) -> Result<()> {
        out[0] = y[1];
        out[1] = self.mu * (1.0 - y[0] * y[0]) * y[1] - y[0];
        Ok(())
    }
    fn velocity_indices(&self) -> &[usize] {
        &[1]
    }
}
