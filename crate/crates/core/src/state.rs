use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point in phase space. Coordinate names live on the owning model;
/// here we only keep the ordered values and the time stamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub coords: Vec<f64>,
}

impl State {
    pub fn new(t: f64, coords: Vec<f64>) -> Result<Self> {
        if !t.is_finite() || coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("state entries must be finite".into()));
        }
        Ok(State { t, coords })
    }
}

/// Closed torque interval; degenerate (lo == hi) while sliding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorqueInterval {
    pub lo: f64,
    pub hi: f64,
}

impl TorqueInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval endpoints out of order");
        TorqueInterval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        TorqueInterval { lo: v, hi: v }
    }

    /// Inclusive containment.
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Strict containment, the Filippov sliding condition.
    pub fn contains_strictly(&self, v: f64) -> bool {
        self.lo < v && v < self.hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_rejects_non_finite() {
        assert!(State::new(0.0, vec![1.0, f64::NAN]).is_err());
        assert!(State::new(f64::INFINITY, vec![1.0]).is_err());
        assert!(State::new(0.0, vec![0.0; 4]).is_ok());
    }

    #[test]
    fn interval_containment_is_inclusive() {
        let iv = TorqueInterval::new(-0.26, 0.26);
        assert!(iv.contains(0.26));
        assert!(iv.contains(-0.26));
        assert!(!iv.contains_strictly(0.26));
        assert!(iv.contains_strictly(0.0));
        assert!(!iv.contains(0.2600001));
    }
}
