//! Two-disc torsional drill string driven by a speed-controlled DC motor.
//! Both discs carry dry friction, so either can stick; the lower disc's
//! stick-slip limit cycle coexists with the smooth operating equilibrium.

use crate::error::{Error, Result};
use crate::friction::{
    friction_lower, friction_upper, lower_branch, upper_branch, LowerFrictionParams,
    UpperFrictionParams,
};
use crate::model::{torque_within_slack, SurfaceMode, SystemModel};
use crate::state::TorqueInterval;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DrillDcParams {
    /// Upper (rotary table) inertia.
    pub j_u: f64,
    /// Lower (bit) inertia.
    pub j_l: f64,
    /// Torsional stiffness of the string.
    pub k_theta: f64,
    /// Torsional damping of the string.
    pub b: f64,
    /// Motor constant: drive torque = k_m * (v - omega_u) with the speed
    /// feedback folded in, i.e. torque on the upper disc is k_m*v plus the
    /// upper viscous term inside the friction law.
    pub k_m: f64,
    /// Speed-controller setpoint input.
    pub v: f64,
    pub upper: UpperFrictionParams,
    pub lower: LowerFrictionParams,
}

impl DrillDcParams {
    /// Bench rig calibrated so the smooth equilibrium sits at 6.1 rad/s:
    /// k_m * v = T_fu(6.1) + T_fl(6.1), which pins v ~= 3.5207.
    pub fn default_rig() -> Self {
        let upper = UpperFrictionParams {
            t_su: 0.37975,
            dt_su: -0.00575,
            b_u: 2.4245,
            db_u: -0.0084,
        };
        let lower = LowerFrictionParams {
            t_0: 0.26,
            t_sl: 0.26,
            t_pl: 0.05,
            omega_sl: 2.2,
            delta_sl: 1.5,
            b_l: 0.009,
        };
        let k_m = 4.3228;
        let omega_op = 6.1;
        let v = (upper_branch(omega_op, 1.0, &upper) + lower_branch(omega_op, 1.0, &lower)) / k_m;
        DrillDcParams {
            j_u: 0.4765,
            j_l: 0.035,
            k_theta: 0.075,
            b: 0.0,
            k_m,
            v,
            upper,
            lower,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("J_u", self.j_u), ("J_l", self.j_l), ("k_theta", self.k_theta), ("k_m", self.k_m)] {
            if !(v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "drill_dc parameter {name} must be positive, got {v}"
                )));
            }
        }
        if !(self.b >= 0.0) || !self.v.is_finite() {
            return Err(Error::InvalidParams(
                "drill_dc requires b >= 0 and finite v".into(),
            ));
        }
        self.upper.validate()?;
        self.lower.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DrillDcModel {
    p: DrillDcParams,
}

impl DrillDcModel {
    pub fn new(p: DrillDcParams) -> Result<Self> {
        p.validate()?;
        Ok(DrillDcModel { p })
    }

    pub fn params(&self) -> &DrillDcParams {
        &self.p
    }
}

impl SystemModel for DrillDcModel {
    fn dim(&self) -> usize {
        4
    }

    fn names(&self) -> &[&'static str] {
        &["alpha", "omega_u", "omega_l", "theta_u"]
    }

    fn rhs(&self, y: &[f64], modes: &[SurfaceMode], out: &mut [f64]) -> Result<()> {
        let p = &self.p;
        let (alpha, wu, wl) = (y[0], y[1], y[2]);
        out[0] = wu - wl;
        out[3] = wu;
        let twist = p.k_theta * alpha + p.b * (wu - wl);
        match modes[0] {
            SurfaceMode::Free { sigma } => {
                let t_fu = upper_branch(wu, sigma, &p.upper);
                out[1] = (p.k_m * p.v - twist - t_fu) / p.j_u;
            }
            SurfaceMode::Stuck { torque } => {
                let iv = self.holding_interval(0, y);
                if !torque_within_slack(iv, torque) {
                    return Err(Error::TorqueOutsideInterval {
                        surface: 0,
                        torque,
                        lo: iv.lo,
                        hi: iv.hi,
                    });
                }
                out[1] = 0.0;
            }
        }
        match modes[1] {
            SurfaceMode::Free { sigma } => {
                let t_fl = lower_branch(wl, sigma, &p.lower);
                out[2] = (twist - t_fl) / p.j_l;
            }
            SurfaceMode::Stuck { torque } => {
                let iv = self.holding_interval(1, y);
                if !torque_within_slack(iv, torque) {
                    return Err(Error::TorqueOutsideInterval {
                        surface: 1,
                        torque,
                        lo: iv.lo,
                        hi: iv.hi,
                    });
                }
                out[2] = 0.0;
            }
        }
        Ok(())
    }

    fn n_surfaces(&self) -> usize {
        2
    }

    fn guard(&self, surface: usize, y: &[f64]) -> f64 {
        match surface {
            0 => y[1],
            1 => y[2],
            _ => panic!("drill_dc has no switching surface {surface}"),
        }
    }

    fn stuck_coordinate(&self, surface: usize) -> usize {
        match surface {
            0 => 1,
            1 => 2,
            _ => panic!("drill_dc has no switching surface {surface}"),
        }
    }

    fn reference_velocity(&self, _surface: usize) -> f64 {
        0.0
    }

    fn holding_interval(&self, surface: usize, _y: &[f64]) -> TorqueInterval {
        // Friction params are validated finite, so the set-valued law cannot
        // fail at the rest velocity.
        match surface {
            0 => friction_upper(0.0, &self.p.upper).expect("rest interval"),
            1 => friction_lower(0.0, &self.p.lower).expect("rest interval"),
            _ => panic!("drill_dc has no switching surface {surface}"),
        }
    }

    fn balance_torque(&self, surface: usize, y: &[f64]) -> f64 {
        let p = &self.p;
        let (alpha, wu, wl) = (y[0], y[1], y[2]);
        match surface {
            // Upper disc pinned at 0: torque the friction must cancel.
            0 => p.k_m * p.v - p.k_theta * alpha + p.b * wl,
            // Lower disc pinned at 0.
            1 => p.k_theta * alpha + p.b * wu,
            _ => panic!("drill_dc has no switching surface {surface}"),
        }
    }

    fn cyclic_coords(&self) -> &[usize] {
        &[3]
    }

    fn velocity_indices(&self) -> &[usize] {
        &[1, 2]
    }
}
