//! Two-disc torsional drill string driven by a three-phase induction motor
//! with explicit stator current states. Written in the frame co-rotating
//! with the supply field: velocity states are deviations from synchronous
//! speed, so the physical bit speed is omega_l + omega_field and the bit
//! sticks at omega_l = -omega_field.

use crate::error::{Error, Result};
use crate::friction::{friction_lower, lower_branch, LowerFrictionParams};
use crate::model::{torque_within_slack, SurfaceMode, SystemModel};
use crate::state::TorqueInterval;

const PHASES: [f64; 3] = [
    0.0,
    2.0 * std::f64::consts::PI / 3.0,
    4.0 * std::f64::consts::PI / 3.0,
];

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DrillInductionParams {
    /// Upper (rotor) inertia.
    pub j_u: f64,
    /// Lower (bit) inertia.
    pub j_l: f64,
    /// Torsional stiffness of the string.
    pub k_theta: f64,
    /// Torsional damping of the string.
    pub b: f64,
    /// Electromechanical coupling (per-phase torque/back-EMF constant).
    pub a: f64,
    /// Stator current decay rate R/L.
    pub c: f64,
    /// Synchronous field speed.
    pub omega_field: f64,
    pub lower: LowerFrictionParams,
}

impl DrillInductionParams {
    /// Bench rig sized so the no-slip branch loses to stick-slip when the
    /// bit starts at rest, while a spin-up from synchronous speed settles
    /// onto the steady slip equilibrium.
    pub fn default_rig() -> Self {
        DrillInductionParams {
            j_u: 0.4765,
            j_l: 0.035,
            k_theta: 0.075,
            b: 0.0,
            a: 1.0,
            c: 10.0,
            omega_field: 8.0,
            lower: LowerFrictionParams {
                t_0: 0.25,
                t_sl: 0.26,
                t_pl: 0.05,
                omega_sl: 2.2,
                delta_sl: 1.5,
                b_l: 0.009,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("J_u", self.j_u),
            ("J_l", self.j_l),
            ("k_theta", self.k_theta),
            ("a", self.a),
            ("c", self.c),
            ("omega", self.omega_field),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "drill_induction parameter {name} must be positive, got {v}"
                )));
            }
        }
        if !(self.b >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "drill_induction requires b >= 0, got {}",
                self.b
            )));
        }
        self.lower.validate()?;
        Ok(())
    }
}

/// A steady-slip solution: both discs turning together below synchronous
/// speed, with the current vector rotating in lockstep.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveEquilibrium {
    /// Synchronous speed minus disc speed (positive: motoring).
    pub slip: f64,
    /// Representative full state at rotor angle zero.
    pub state: Vec<f64>,
    /// Residual of the co-rotating reduced system at this solution.
    pub residual_norm: f64,
}

#[derive(Debug, Clone)]
pub struct DrillInductionModel {
    p: DrillInductionParams,
}

impl DrillInductionModel {
    pub fn new(p: DrillInductionParams) -> Result<Self> {
        p.validate()?;
        Ok(DrillInductionModel { p })
    }

    pub fn params(&self) -> &DrillInductionParams {
        &self.p
    }

    /// Reduced dynamics in direct/quadrature current coordinates
    /// z = (alpha, omega_u, omega_l, i_d, i_q) with
    /// i_d = sum_k i_k sin(theta_u + phi_k), i_q = sum_k i_k cos(theta_u + phi_k).
    /// The angle dependence cancels (sum sin^2 = 3/2, sum sin cos = 0), so
    /// steady slip states are true equilibria here.
    pub fn dq_rhs(&self, z: &[f64; 5], out: &mut [f64; 5]) {
        let p = &self.p;
        let (alpha, wu, wl, id, iq) = (z[0], z[1], z[2], z[3], z[4]);
        let twist = p.k_theta * alpha + p.b * (wu - wl);
        let bit_speed = wl + p.omega_field;
        let sigma = if bit_speed >= 0.0 { 1.0 } else { -1.0 };
        out[0] = wu - wl;
        out[1] = (-twist + p.a * id) / p.j_u;
        out[2] = (twist - lower_branch(bit_speed, sigma, &p.lower)) / p.j_l;
        out[3] = -p.c * id - 1.5 * p.a * wu + wu * iq;
        out[4] = -p.c * iq - wu * id;
    }

    /// All steady-slip equilibria with slip in (0, omega_field), found by
    /// bracketing sign changes of the torque balance
    /// 1.5 a^2 s c / (c^2 + s^2) = T_fl(omega_field - s) and bisecting.
    pub fn wave_equilibria(&self) -> Vec<WaveEquilibrium> {
        let p = &self.p;
        let balance = |s: f64| {
            1.5 * p.a * p.a * s * p.c / (p.c * p.c + s * s)
                - lower_branch(p.omega_field - s, 1.0, &p.lower)
        };
        let n = 4000;
        let mut roots = Vec::new();
        let mut s_prev = p.omega_field * 1e-9;
        let mut f_prev = balance(s_prev);
        for i in 1..n {
            let s = p.omega_field * i as f64 / n as f64;
            let f = balance(s);
            if f == 0.0 {
                roots.push(s);
            } else if f_prev * f < 0.0 {
                let (mut lo, mut hi) = (s_prev, s);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if balance(lo) * balance(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            s_prev = s;
            f_prev = f;
        }
        roots
            .into_iter()
            .map(|s| {
                let id = 1.5 * p.a * s * p.c / (p.c * p.c + s * s);
                let iq = s * id / p.c;
                let alpha = lower_branch(p.omega_field - s, 1.0, &p.lower) / p.k_theta;
                let z = [alpha, -s, -s, id, iq];
                let mut res = [0.0; 5];
                self.dq_rhs(&z, &mut res);
                let residual_norm = res.iter().map(|r| r * r).sum::<f64>().sqrt();
                // Representative state at theta_u = 0: theta_l carries the
                // full torsion, phase currents from the inverse projection.
                let mut state = vec![0.0, -s, -alpha, -s, 0.0, 0.0, 0.0];
                for (k, phi) in PHASES.iter().enumerate() {
                    state[4 + k] = 2.0 / 3.0 * (id * phi.sin() + iq * phi.cos());
                }
                WaveEquilibrium {
                    slip: s,
                    state,
                    residual_norm,
                }
            })
            .collect()
    }
}

impl SystemModel for DrillInductionModel {
    fn dim(&self) -> usize {
        7
    }

    fn names(&self) -> &[&'static str] {
        &["theta_u", "omega_u", "theta_l", "omega_l", "i_1", "i_2", "i_3"]
    }

    fn rhs(&self, y: &[f64], modes: &[SurfaceMode], out: &mut [f64]) -> Result<()> {
        let p = &self.p;
        let (theta_u, wu, theta_l, wl) = (y[0], y[1], y[2], y[3]);
        let twist = p.k_theta * (theta_u - theta_l) + p.b * (wu - wl);
        let mut torque = 0.0;
        for (k, phi) in PHASES.iter().enumerate() {
            let s = (theta_u + phi).sin();
            torque += p.a * y[4 + k] * s;
            out[4 + k] = -p.c * y[4 + k] - p.a * wu * s;
        }
        out[0] = wu;
        out[1] = (-twist + torque) / p.j_u;
        out[2] = wl;
        match modes[0] {
            SurfaceMode::Free { sigma } => {
                let bit_speed = wl + p.omega_field;
                out[3] = (twist - lower_branch(bit_speed, sigma, &p.lower)) / p.j_l;
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
                out[3] = 0.0;
            }
        }
        Ok(())
    }

    fn n_surfaces(&self) -> usize {
        1
    }

    fn guard(&self, surface: usize, y: &[f64]) -> f64 {
        assert_eq!(surface, 0, "drill_induction has a single switching surface");
        y[3] + self.p.omega_field
    }

    fn stuck_coordinate(&self, _surface: usize) -> usize {
        3
    }

    fn reference_velocity(&self, _surface: usize) -> f64 {
        -self.p.omega_field
    }

    fn holding_interval(&self, _surface: usize, _y: &[f64]) -> TorqueInterval {
        friction_lower(0.0, &self.p.lower).expect("rest interval")
    }

    fn balance_torque(&self, _surface: usize, y: &[f64]) -> f64 {
        let p = &self.p;
        // Bit pinned at physical rest: string torque plus damping against
        // the synchronous frame.
        p.k_theta * (y[0] - y[2]) + p.b * (y[1] + p.omega_field)
    }

    fn velocity_indices(&self) -> &[usize] {
        &[1, 3]
    }
}
