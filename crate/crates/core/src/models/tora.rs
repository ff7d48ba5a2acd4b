//! Translational oscillator with a rotational actuator: a spring-mounted
//! cart carrying an eccentric rotor driven by a constant torque. Smooth
//! (no switching surfaces); the interesting behaviour is resonance capture
//! of the rotor by the cart oscillation.

use crate::error::{Error, Result};
use crate::model::{SurfaceMode, SystemModel};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ToraParams {
    /// Rotor inertia about its own axis.
    pub j: f64,
    /// Cart mass.
    pub m_cart: f64,
    /// Eccentric mass.
    pub m_ecc: f64,
    /// Eccentricity arm length.
    pub l: f64,
    /// Rotor viscous damping.
    pub k_theta: f64,
    /// Cart spring stiffness.
    pub k: f64,
    /// Cart viscous damping.
    pub k1: f64,
    /// Constant drive torque on the rotor.
    pub u: f64,
}

impl ToraParams {
    pub fn default_rig() -> Self {
        ToraParams {
            j: 0.014,
            m_cart: 10.5,
            m_ecc: 1.5,
            l: 0.04,
            k_theta: 0.005,
            k: 5300.0,
            k1: 5.0,
            u: 0.48,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("J", self.j),
            ("M", self.m_cart),
            ("m", self.m_ecc),
            ("l", self.l),
            ("k", self.k),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "tora parameter {name} must be positive, got {v}"
                )));
            }
        }
        if !self.k1.is_finite() || !self.k_theta.is_finite() || !self.u.is_finite() {
            return Err(Error::InvalidParams(
                "tora damping and drive parameters must be finite".into(),
            ));
        }
        // The mass matrix must stay positive definite for every rotor angle.
        let coupling = self.m_ecc * self.l;
        if (self.m_cart + self.m_ecc) * self.j <= coupling * coupling {
            return Err(Error::InvalidParams(format!(
                "tora mass matrix is singular: (M+m)*J = {} <= (m*l)^2 = {}",
                (self.m_cart + self.m_ecc) * self.j,
                coupling * coupling
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ToraModel {
    p: ToraParams,
}

impl ToraModel {
    pub fn new(p: ToraParams) -> Result<Self> {
        p.validate()?;
        Ok(ToraModel { p })
    }

    pub fn params(&self) -> &ToraParams {
        &self.p
    }

    /// Total mechanical energy. Conserved when u = k1 = k_theta = 0.
    pub fn energy(&self, y: &[f64]) -> f64 {
        let p = &self.p;
        let (x, xd, theta, thetad) = (y[0], y[1], y[2], y[3]);
        0.5 * (p.m_cart + p.m_ecc) * xd * xd
            + p.m_ecc * p.l * xd * thetad * theta.cos()
            + 0.5 * p.j * thetad * thetad
            + 0.5 * p.k * x * x
    }
}

impl SystemModel for ToraModel {
    fn dim(&self) -> usize {
        4
    }

    fn names(&self) -> &[&'static str] {
        &["x", "x_dot", "theta", "theta_dot"]
    }

    fn rhs(&self, y: &[f64], _modes: &[SurfaceMode], out: &mut [f64]) -> Result<()> {
        let p = &self.p;
        let (x, xd, theta, thetad) = (y[0], y[1], y[2], y[3]);
        let ml = p.m_ecc * p.l;
        let c = theta.cos();
        // Coupled cart/rotor accelerations from the 2x2 mass matrix
        //   [M+m     ml cos] [x..    ]   [ml w^2 sin - k1 x. - k x]
        //   [ml cos  J     ] [theta..] = [u - k_theta w           ]
        let f1 = ml * thetad * thetad * theta.sin() - p.k1 * xd - p.k * x;
        let f2 = p.u - p.k_theta * thetad;
        let det = (p.m_cart + p.m_ecc) * p.j - (ml * c) * (ml * c);
        out[0] = xd;
        out[1] = (p.j * f1 - ml * c * f2) / det;
        out[2] = thetad;
        out[3] = ((p.m_cart + p.m_ecc) * f2 - ml * c * f1) / det;
        Ok(())
    }

    fn velocity_indices(&self) -> &[usize] {
        &[3]
    }

    fn no_load_velocity(&self) -> Option<f64> {
        if self.p.k_theta > 0.0 {
            Some(self.p.u / self.p.k_theta)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rig() -> ToraModel {
        ToraModel::new(ToraParams::default_rig()).unwrap()
    }

    #[test]
    fn acceleration_at_origin() {
        // At rest with theta = 0 the drive torque splits through the full
        // mass matrix: det = (M+m)J - (ml)^2 = 0.1644.
        let m = rig();
        let mut out = [0.0; 4];
        m.rhs(&[0.0; 4], &[], &mut out).unwrap();
        assert_relative_eq!(out[3], 35.036496350364956, max_relative = 1e-14);
        assert_relative_eq!(out[1], -0.1751824817518248, max_relative = 1e-14);
        assert_eq!(out[0], 0.0);
        assert_eq!(out[2], 0.0);
    }

    #[test]
    fn rest_is_equilibrium_without_drive() {
        let mut p = ToraParams::default_rig();
        p.u = 0.0;
        let m = ToraModel::new(p).unwrap();
        let mut out = [0.0; 4];
        m.rhs(&[0.0; 4], &[], &mut out).unwrap();
        assert_eq!(out, [0.0; 4]);
    }

    #[test]
    fn mass_matrix_determinant_bounds() {
        // det(theta) = (M+m)J - (ml cos theta)^2 ranges over [0.1644, 0.168].
        let p = ToraParams::default_rig();
        let ml = p.m_ecc * p.l;
        let full = (p.m_cart + p.m_ecc) * p.j;
        for i in 0..=100 {
            let theta = i as f64 * 2.0 * std::f64::consts::PI / 100.0;
            let det = full - (ml * theta.cos()).powi(2);
            assert!(det >= 0.1644 - 1e-12 && det <= 0.168 + 1e-12, "det = {det}");
        }
    }

    #[test]
    fn no_load_speed() {
        assert_relative_eq!(rig().no_load_velocity().unwrap(), 96.0, max_relative = 1e-15);
    }

    #[test]
    fn energy_drift_matches_dissipation_sign() {
        // dE/dt = u w - k1 xd^2 - k_theta w^2 along trajectories; spot-check
        // the gradient identity at one state.
        let m = rig();
        let y = [0.01, -0.3, 0.7, 2.0];
        let mut f = [0.0; 4];
        m.rhs(&y, &[], &mut f).unwrap();
        let h = 1e-7;
        let mut de = 0.0;
        for i in 0..4 {
            let mut yp = y;
            let mut ym = y;
            yp[i] += h;
            ym[i] -= h;
            de += (m.energy(&yp) - m.energy(&ym)) / (2.0 * h) * f[i];
        }
        let p = m.params();
        let expect = p.u * y[3] - p.k1 * y[1] * y[1] - p.k_theta * y[3] * y[3];
        assert_relative_eq!(de, expect, max_relative = 1e-6);
    }

    #[test]
    fn singular_mass_matrix_rejected() {
        let mut p = ToraParams::default_rig();
        p.j = 1e-5; // (M+m)J = 1.2e-4 < (ml)^2 = 3.6e-3
        assert!(ToraModel::new(p).is_err());
    }
}
