//! The two experimentally fitted set-valued friction laws shared by the
//! drill models. Both return a torque interval: degenerate while sliding,
//! the full holding interval at zero velocity.

use crate::error::{Error, Result};
use crate::state::TorqueInterval;
use serde::{Deserialize, Serialize};

/// Upper-disc (motor-side) dry+viscous friction with directional asymmetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperFrictionParams {
    pub t_su: f64,
    pub dt_su: f64,
    pub b_u: f64,
    pub db_u: f64,
}

impl UpperFrictionParams {
    pub fn validate(&self) -> Result<()> {
        // Breakaway interval must have positive width on both sides and the
        // viscous slope must stay positive in both rotation directions.
        if !(self.t_su > 0.0 && self.t_su + self.dt_su > 0.0 && self.t_su - self.dt_su > 0.0) {
            return Err(Error::InvalidParams(
                "upper friction: need t_su > 0 and t_su +/- dt_su > 0".into(),
            ));
        }
        if !(self.b_u + self.db_u > 0.0 && self.b_u - self.db_u > 0.0) {
            return Err(Error::InvalidParams(
                "upper friction: need b_u +/- db_u > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Lower-disc (bit-side) friction: Stribeck velocity weakening plus a
/// viscous term, all inside the magnitude branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerFrictionParams {
    pub t_0: f64,
    pub t_sl: f64,
    pub t_pl: f64,
    pub omega_sl: f64,
    pub delta_sl: f64,
    pub b_l: f64,
}

impl LowerFrictionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_0 > 0.0) {
            return Err(Error::InvalidParams("lower friction: need t_0 > 0".into()));
        }
        if !(self.t_sl > self.t_pl && self.t_pl > 0.0) {
            return Err(Error::InvalidParams(
                "lower friction: need t_sl > t_pl > 0".into(),
            ));
        }
        if !(self.omega_sl > 0.0 && self.delta_sl > 0.0) {
            return Err(Error::InvalidParams(
                "lower friction: need omega_sl > 0 and delta_sl > 0".into(),
            ));
        }
        if !(self.b_l >= 0.0) {
            return Err(Error::InvalidParams("lower friction: need b_l >= 0".into()));
        }
        Ok(())
    }
}

/// Smooth single-branch extension of the upper law with the sign function
/// replaced by a fixed branch sign `sigma`. Agrees with the set-valued law
/// for sigma = sign(omega); used between switching events.
pub fn upper_branch(omega: f64, sigma: f64, p: &UpperFrictionParams) -> f64 {
    (p.t_su + p.dt_su * sigma + p.b_u * sigma * omega + p.db_u * omega) * sigma
}

/// Smooth single-branch extension of the lower law. The Stribeck magnitude
/// stays inside the exponential so the branch is differentiable at 0.
pub fn lower_branch(omega: f64, sigma: f64, p: &LowerFrictionParams) -> f64 {
    let stribeck = (p.t_sl - p.t_pl) * (-(omega / p.omega_sl).abs().powf(p.delta_sl)).exp();
    (p.t_0 / p.t_sl) * (p.t_pl + stribeck + p.b_l * sigma * omega) * sigma
}

/// Set-valued upper friction torque.
pub fn friction_upper(omega: f64, p: &UpperFrictionParams) -> Result<TorqueInterval> {
    if !omega.is_finite() {
        return Err(Error::Domain("friction_upper: non-finite velocity".into()));
    }
    if omega == 0.0 {
        Ok(TorqueInterval::new(-p.t_su + p.dt_su, p.t_su + p.dt_su))
    } else {
        Ok(TorqueInterval::point(upper_branch(omega, omega.signum(), p)))
    }
}

/// Set-valued lower friction torque.
pub fn friction_lower(omega: f64, p: &LowerFrictionParams) -> Result<TorqueInterval> {
    if !omega.is_finite() {
        return Err(Error::Domain("friction_lower: non-finite velocity".into()));
    }
    if omega == 0.0 {
        Ok(TorqueInterval::new(-p.t_0, p.t_0))
    } else {
        Ok(TorqueInterval::point(lower_branch(omega, omega.signum(), p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn upper_dc() -> UpperFrictionParams {
        UpperFrictionParams {
            t_su: 0.37975,
            dt_su: -0.00575,
            b_u: 2.4245,
            db_u: -0.0084,
        }
    }

    fn lower_dc() -> LowerFrictionParams {
        LowerFrictionParams {
            t_0: 0.26,
            t_sl: 0.26,
            t_pl: 0.05,
            omega_sl: 2.2,
            delta_sl: 1.5,
            b_l: 0.09,
        }
    }

    #[test]
    fn upper_interval_at_rest() {
        let iv = friction_upper(0.0, &upper_dc()).unwrap();
        assert_relative_eq!(iv.lo, -0.38550, max_relative = 1e-12);
        assert_relative_eq!(iv.hi, 0.37400, max_relative = 1e-12);
    }

    #[test]
    fn upper_sliding_value_at_one() {
        let iv = friction_upper(1.0, &upper_dc()).unwrap();
        assert_eq!(iv.lo, iv.hi);
        // 0.37975 - 0.00575 + 2.4245 - 0.0084
        assert_relative_eq!(iv.hi, 2.79010, max_relative = 1e-12);
    }

    #[test]
    fn upper_odd_without_asymmetry() {
        let p = UpperFrictionParams {
            dt_su: 0.0,
            db_u: 0.0,
            ..upper_dc()
        };
        for w in [0.3, 1.0, 5.7] {
            let pos = friction_upper(w, &p).unwrap().hi;
            let neg = friction_upper(-w, &p).unwrap().hi;
            assert_relative_eq!(neg, -pos, max_relative = 1e-14);
        }
    }

    #[test]
    fn upper_asymmetry_relation() {
        // v(+w) - (-v(-w)) = 2 (dt_su + db_u w)
        let p = upper_dc();
        for w in [0.1, 1.0, 6.1] {
            let pos = friction_upper(w, &p).unwrap().hi;
            let neg = friction_upper(-w, &p).unwrap().hi;
            assert_relative_eq!(pos + neg, 2.0 * (p.dt_su + p.db_u * w), epsilon = 1e-13);
        }
    }

    #[test]
    fn lower_interval_at_rest_is_breakaway() {
        let iv = friction_lower(0.0, &lower_dc()).unwrap();
        assert_eq!(iv.lo, -0.26);
        assert_eq!(iv.hi, 0.26);
    }

    #[test]
    fn lower_branch_continuous_at_zero() {
        // exp(0) = 1 collapses the law to (t_0/t_sl) * t_sl = t_0.
        let p = lower_dc();
        assert_relative_eq!(lower_branch(0.0, 1.0, &p), p.t_0, max_relative = 1e-14);
        assert_relative_eq!(
            friction_lower(1e-13, &p).unwrap().hi,
            p.t_0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn lower_value_at_stribeck_velocity() {
        // At omega = omega_sl the exponent is exactly 1; the factor relative
        // to t_0 is (0.05 + 0.21 e^{-1} + 0.09 * 2.2) / 0.26.
        let p = lower_dc();
        let v = friction_lower(2.2, &p).unwrap().hi;
        let expected = (0.05 + 0.21 * (-1.0f64).exp() + 0.09 * 2.2) / 0.26;
        assert_relative_eq!(v / p.t_0, expected, max_relative = 1e-14);
        assert_relative_eq!(v / p.t_0, 1.2509795486384727, max_relative = 1e-13);
    }

    #[test]
    fn lower_value_at_six_point_one() {
        let v = friction_lower(6.1, &lower_dc()).unwrap().hi;
        assert_relative_eq!(v, 0.601075284852893, max_relative = 1e-12);
    }

    #[test]
    fn lower_sliding_magnitude_never_vanishes() {
        let p = lower_dc();
        let floor = p.t_pl * p.t_0 / p.t_sl;
        for w in [1e-8, 0.01, 2.2, 6.1, 40.0, -3.3] {
            let v = friction_lower(w, &p).unwrap().hi;
            assert!(v.abs() >= floor, "sliding torque {v} below floor {floor}");
        }
    }

    #[test]
    fn non_finite_velocity_is_domain_error() {
        assert!(friction_upper(f64::NAN, &upper_dc()).is_err());
        assert!(friction_lower(f64::INFINITY, &lower_dc()).is_err());
    }

    #[test]
    fn invariants_rejected() {
        let mut p = upper_dc();
        p.dt_su = 0.5; // breaks t_su - dt_su > 0
        assert!(p.validate().is_err());

        let mut q = lower_dc();
        q.t_pl = 0.3; // breaks t_sl > t_pl
        assert!(q.validate().is_err());
        q = lower_dc();
        q.b_l = -0.01;
        assert!(q.validate().is_err());
    }
}
