//! Steady-state characterisation of a trajectory tail.
//!
//! All statistics are time-weighted (trapezoidal) so they stay meaningful
//! on the integrator's non-uniform sample grid.

use crate::integrator::Trajectory;
use crate::model::SystemModel;
use crate::state::State;

/// Shortest tail window considered long enough to judge steady state.
const MIN_TAIL: f64 = 10.0;
/// Relative spread of successive periods accepted as one clean cycle.
const PERIOD_CV_MAX: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttractorKind {
    Equilibrium,
    LimitCycle,
    /// Rotor trapped well below its no-load speed, feeding the resonance.
    CapturedRotation,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// No probe around any equilibrium reached this attractor.
    Hidden,
    SelfExcited,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeOutcome {
    /// Converged to the attractor under classification.
    Matched,
    /// Converged somewhere else.
    Other,
    /// Integration failed or the tail defied characterisation.
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProbeRecord {
    /// Index into the equilibrium list the probe was seeded around.
    pub equilibrium: usize,
    /// State-space offset added to that equilibrium.
    pub offset: Vec<f64>,
    pub outcome: ProbeOutcome,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AttractorReport {
    pub kind: AttractorKind,
    /// Time-weighted tail mean of each velocity coordinate.
    pub tail_mean_velocities: Vec<f64>,
    /// Peak-to-peak tail range of the dominant oscillating velocity.
    pub amplitude: f64,
    pub period_estimate: Option<f64>,
    pub classification: Classification,
    pub probes: Vec<ProbeRecord>,
}

pub(crate) fn first_tail_index(samples: &[State], window: f64) -> usize {
    let t_end = samples[samples.len() - 1].t;
    samples
        .iter()
        .position(|s| s.t >= t_end - window - 1e-12)
        .unwrap_or(0)
}

fn trap_mean(samples: &[State], coord: usize) -> f64 {
    let span = samples[samples.len() - 1].t - samples[0].t;
    if span <= 0.0 {
        return samples[0].coords[coord];
    }
    let mut acc = 0.0;
    for w in samples.windows(2) {
        acc += 0.5 * (w[0].coords[coord] + w[1].coords[coord]) * (w[1].t - w[0].t);
    }
    acc / span
}

fn trap_variance(samples: &[State], coord: usize, mean: f64) -> f64 {
    let span = samples[samples.len() - 1].t - samples[0].t;
    if span <= 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for w in samples.windows(2) {
        let a = w[0].coords[coord] - mean;
        let b = w[1].coords[coord] - mean;
        acc += 0.5 * (a * a + b * b) * (w[1].t - w[0].t);
    }
    acc / span
}

pub(crate) fn ptp(samples: &[State], coord: usize) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in samples {
        lo = lo.min(s.coords[coord]);
        hi = hi.max(s.coords[coord]);
    }
    hi - lo
}

/// Mean period of rising crossings through the tail midline, accepted only
/// when at least two consecutive periods agree to [`PERIOD_CV_MAX`]. Two
/// periods fit inside the minimum tail window even for the slowest cycle
/// the rigs produce; the amplitude-steadiness check upstream guards the
/// short-sample cases this cannot.
fn crossing_period(samples: &[State], coord: usize) -> Option<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in samples {
        lo = lo.min(s.coords[coord]);
        hi = hi.max(s.coords[coord]);
    }
    let mid = 0.5 * (lo + hi);
    let mut crossings = Vec::new();
    for w in samples.windows(2) {
        let (a, b) = (w[0].coords[coord], w[1].coords[coord]);
        if a < mid && b >= mid {
            crossings.push(w[0].t + (mid - a) / (b - a) * (w[1].t - w[0].t));
        }
    }
    if crossings.len() < 3 {
        return None;
    }
    let periods: Vec<f64> = crossings.windows(2).map(|c| c[1] - c[0]).collect();
    let mean = periods.iter().sum::<f64>() / periods.len() as f64;
    let var = periods.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / periods.len() as f64;
    if var.sqrt() > PERIOD_CV_MAX * mean {
        return None;
    }
    Some(mean)
}

/// Ratio of the captured rotor's tail-mean speed to the full-speed run's:
/// how deep the resonance traps the drive. Meaningful only against a
/// normal-operation run actually spinning forward.
pub fn sommerfeld_ratio(
    captured: &AttractorReport,
    normal: &AttractorReport,
) -> crate::error::Result<f64> {
    let c = captured.tail_mean_velocities.first().ok_or_else(|| {
        crate::error::Error::Domain("captured report carries no rotor velocity".into())
    })?;
    let n = normal.tail_mean_velocities.first().ok_or_else(|| {
        crate::error::Error::Domain("normal report carries no rotor velocity".into())
    })?;
    if !(*n > 0.0) {
        return Err(crate::error::Error::Domain(format!(
            "normal-operation rotor mean must be positive, got {n}"
        )));
    }
    Ok(c / n)
}

/// Whether a probe's tail velocity means agree with the reference
/// attractor's to 2%, with a floor tied to the attractor's own oscillation
/// amplitude so near-zero means on a large cycle still compare sanely.
pub(crate) fn velocity_means_match(reference: &[f64], probe: &[f64], amplitude: f64) -> bool {
    reference.len() == probe.len()
        && reference.iter().zip(probe).all(|(r, p)| {
            (r - p).abs() <= 0.02 * r.abs().max(0.05 * amplitude).max(1e-6)
        })
}

/// Characterise the trajectory's steady state from its tail: the last
/// `tail_fraction` of the run, never less than [`MIN_TAIL`] seconds. The
/// decision cascades: settled velocities mean an equilibrium; a rotor
/// holding well under its no-load speed is a captured rotation; a clean
/// repeating oscillation of steady amplitude is a limit cycle; anything
/// else stays unresolved, as does any tail shorter than the minimum.
///
/// `classification` always starts as `NotApplicable`; non-equilibrium kinds
/// get their hidden / self-excited verdict from the probe pass in
/// [`super::classify_attractor`].
pub fn steady_state_metrics<M: SystemModel + ?Sized>(
    model: &M,
    traj: &Trajectory,
    tail_fraction: f64,
) -> AttractorReport {
    let samples = &traj.samples;
    let duration = traj.duration();
    let window = (tail_fraction.clamp(0.01, 1.0) * duration).max(MIN_TAIL);
    let tail = &samples[first_tail_index(samples, window)..];
    let velocities = model.velocity_indices();

    let means: Vec<f64> = velocities.iter().map(|&v| trap_mean(tail, v)).collect();
    let (osc_coord, amplitude) = velocities
        .iter()
        .map(|&v| (v, ptp(tail, v)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("models expose at least one velocity coordinate");

    if duration < window || tail.len() < 2 {
        return AttractorReport {
            kind: AttractorKind::Unresolved,
            tail_mean_velocities: means,
            amplitude,
            period_estimate: None,
            classification: Classification::NotApplicable,
            probes: Vec::new(),
        };
    }

    // Velocity variance at the integration noise floor means the run sits
    // on an equilibrium (possibly a spinning one; means carry the speed).
    let settle = (10.0 * traj.config.abs_tol).powi(2);
    let settled = velocities
        .iter()
        .zip(&means)
        .all(|(&v, &m)| trap_variance(tail, v, m) < settle);
    if settled {
        return AttractorReport {
            kind: AttractorKind::Equilibrium,
            tail_mean_velocities: means,
            amplitude,
            period_estimate: None,
            classification: Classification::NotApplicable,
            probes: Vec::new(),
        };
    }

    let period = crossing_period(tail, osc_coord);

    // A mean taken over a fractional number of periods carries an O(T/W)
    // phase bias, enough to defeat the 2% matching used by probe and basin
    // comparisons. Once a period is known, trim the window to whole cycles.
    let means = match period {
        Some(p) if tail[tail.len() - 1].t - tail[0].t > p => {
            let span = tail[tail.len() - 1].t - tail[0].t;
            let whole = (span / p).floor() * p;
            let trimmed = &tail[first_tail_index(tail, whole)..];
            velocities.iter().map(|&v| trap_mean(trimmed, v)).collect()
        }
        _ => means,
    };

    if let Some(no_load) = model.no_load_velocity() {
        // The first velocity coordinate is the driven rotor wherever a
        // no-load speed exists.
        let rotor_mean = means[0];
        let toward_drive = rotor_mean * no_load.signum();
        if toward_drive > 0.0 && toward_drive < 0.6 * no_load.abs() {
            return AttractorReport {
                kind: AttractorKind::CapturedRotation,
                tail_mean_velocities: means,
                amplitude,
                period_estimate: period,
                classification: Classification::NotApplicable,
                probes: Vec::new(),
            };
        }
    }

    // Steady amplitude check: the two halves of the tail must span the
    // same range, else the oscillation is still growing or dying.
    let t_mid = 0.5 * (tail[0].t + tail[tail.len() - 1].t);
    let split = tail.partition_point(|s| s.t < t_mid);
    let steady = if split >= 2 && tail.len() - split >= 2 {
        let first = ptp(&tail[..split], osc_coord);
        let second = ptp(&tail[split..], osc_coord);
        first > 0.0 && (0.9..=1.1).contains(&(second / first))
    } else {
        false
    };

    if let (Some(p), true) = (period, steady) {
        return AttractorReport {
            kind: AttractorKind::LimitCycle,
            tail_mean_velocities: means,
            amplitude,
            period_estimate: Some(p),
            classification: Classification::NotApplicable,
            probes: Vec::new(),
        };
    }

    AttractorReport {
        kind: AttractorKind::Unresolved,
        tail_mean_velocities: means,
        amplitude,
        period_estimate: period,
        classification: Classification::NotApplicable,
        probes: Vec::new(),
    }
}
