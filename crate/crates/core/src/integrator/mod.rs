//! Event-driven integration of piecewise-smooth systems: adaptive
//! Dormand-Prince steps inside each smooth branch, dense-output root
//! finding at the switching surfaces, and exact pinning while sliding.

mod dopri5;

pub use dopri5::DenseStep;

use crate::error::{Error, Result};
use crate::model::{SurfaceMode, SystemModel};
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IntegrationConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Surface-hit tolerance: events commit with |guard| no larger than this.
    pub event_tol: f64,
    pub max_step: f64,
    /// A release is provisional until the freed velocity exceeds this; a
    /// re-stick before that cancels the release (chattering suppression).
    pub stick_epsilon: f64,
    /// Absolute end time of the run.
    pub t_end: f64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            event_tol: 1e-10,
            max_step: 0.01,
            stick_epsilon: 1e-6,
            t_end: 150.0,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("event_tol", self.event_tol),
            ("max_step", self.max_step),
            ("stick_epsilon", self.stick_epsilon),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "integration setting {name} must be positive and finite, got {v}"
                )));
            }
        }
        if !self.t_end.is_finite() {
            return Err(Error::Config("t_end must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    StickOnset,
    Release,
    Crossing,
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::StickOnset => "stick_onset",
            EventKind::Release => "release",
            EventKind::Crossing => "crossing",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "stick_onset" => Some(EventKind::StickOnset),
            "release" => Some(EventKind::Release),
            "crossing" => Some(EventKind::Crossing),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub t: f64,
    pub surface: usize,
    pub kind: EventKind,
    /// State at the event, before any continuation nudge: the guard of the
    /// affected surface is within event_tol of zero here.
    pub state: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Strictly increasing in time; first entry is the (resolved) initial
    /// state, last entry the state at t_end.
    pub samples: Vec<State>,
    pub events: Vec<Event>,
    /// Mode vector in force from each listed time onward.
    pub mode_history: Vec<(f64, Vec<SurfaceMode>)>,
    pub config: IntegrationConfig,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    pub fn duration(&self) -> f64 {
        self.final_state().t - self.samples[0].t
    }

    /// Mode vector in force at time t.
    pub fn modes_at(&self, t: f64) -> &[SurfaceMode] {
        let idx = self
            .mode_history
            .partition_point(|(tm, _)| *tm <= t)
            .saturating_sub(1);
        &self.mode_history[idx].1
    }
}

/// One fixed fifth-order step of the underlying tableau on a frozen branch;
/// no error control, no events. For convergence studies.
pub fn fixed_step_rk<M: SystemModel + ?Sized>(
    model: &M,
    modes: &[SurfaceMode],
    y: &[f64],
    h: f64,
    out: &mut [f64],
) -> Result<()> {
    let mut scratch = modes.to_vec();
    let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
        refresh_stuck(model, &mut scratch, y);
        model.rhs(y, &scratch, dy)
    };
    dopri5::fixed_step(&mut f, 0.0, y, h, out)
}

/// Reconstruct the holding torque of every stuck surface at the current
/// state, so the friction value tracks the balance torque while sliding.
fn refresh_stuck<M: SystemModel + ?Sized>(model: &M, modes: &mut [SurfaceMode], y: &[f64]) {
    for (k, mode) in modes.iter_mut().enumerate() {
        if mode.is_stuck() {
            *mode = SurfaceMode::Stuck {
                torque: model.balance_torque(k, y),
            };
        }
    }
}

struct Watch {
    event_idx: usize,
    hist_idx: usize,
    peak: f64,
}

const SCAN_POINTS: usize = 9; // 8 subdivisions of each accepted step

pub fn integrate<M: SystemModel + ?Sized>(
    model: &M,
    y0: &[f64],
    t0: f64,
    cfg: &IntegrationConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let n = model.dim();
    if y0.len() != n {
        return Err(Error::InvalidParams(format!(
            "initial state has {} coordinates, model needs {n}",
            y0.len()
        )));
    }
    if let Some(i) = y0.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "initial value of {} is not finite",
            model.names()[i]
        )));
    }
    let t_end = cfg.t_end;
    if !(t_end > t0) {
        return Err(Error::Config(format!("t_end = {t_end} must exceed t0 = {t0}")));
    }

    let ns = model.n_surfaces();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut events: Vec<Event> = Vec::new();
    let mut samples: Vec<State> = Vec::new();
    let mut mode_history: Vec<(f64, Vec<SurfaceMode>)> = Vec::new();
    let mut watches: Vec<Option<Watch>> = (0..ns).map(|_| None).collect();

    // Resolve surfaces the initial condition already sits on: slide only if
    // the balance torque is strictly inside the holding interval, otherwise
    // take the smooth branch the excess pushes toward.
    let mut modes: Vec<SurfaceMode> = Vec::with_capacity(ns);
    let mut initial_sticks: Vec<usize> = Vec::new();
    for k in 0..ns {
        let g = model.guard(k, &y);
        if g.abs() <= cfg.event_tol {
            let bal = model.balance_torque(k, &y);
            let iv = model.holding_interval(k, &y);
            if iv.contains_strictly(bal) {
                y[model.stuck_coordinate(k)] = model.reference_velocity(k);
                modes.push(SurfaceMode::Stuck { torque: bal });
                initial_sticks.push(k);
            } else {
                let sigma = if bal >= iv.hi { 1.0 } else { -1.0 };
                modes.push(SurfaceMode::Free { sigma });
            }
        } else {
            modes.push(SurfaceMode::Free { sigma: g.signum() });
        }
    }
    for &k in &initial_sticks {
        events.push(Event {
            t,
            surface: k,
            kind: EventKind::StickOnset,
            state: y.clone(),
        });
    }
    mode_history.push((t, modes.clone()));
    samples.push(State { t, coords: y.clone() });

    let mut ws = dopri5::Workspace::new(n);
    let mut dense = DenseStep::new(n);
    let mut scan_y = vec![0.0; n];
    let mut h_prop: Option<f64> = None;

    'segments: loop {
        if t_end - t <= time_floor(t_end) {
            break;
        }
        // Fixed-branch segment: wrap the model with the current mode vector,
        // refreshing stuck torques so the derivative stays consistent.
        let mut scratch = modes.clone();
        let mut f = |_t: f64, yy: &[f64], out: &mut [f64]| -> Result<()> {
            refresh_stuck(model, &mut scratch, yy);
            model.rhs(yy, &scratch, out)
        };

        ws.prime(&mut f, t, &y)?;
        if let Some(i) = ws.k[0].iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteDerivative {
                coord: model.names()[i].to_string(),
                t,
            });
        }
        let mut h = match h_prop {
            Some(h) => h,
            None => dopri5::initial_step(&mut f, t, &y, &ws.k[0], cfg.rel_tol, cfg.abs_tol, cfg.max_step)?,
        };
        let mut last_rejected = false;

        loop {
            if t_end - t <= time_floor(t_end) {
                break 'segments;
            }
            let h_eff = h.min(cfg.max_step).min(t_end - t);
            if h_eff < time_floor(t) {
                return Err(Error::StepSizeUnderflow { t, state: y.clone() });
            }
            let report = dopri5::try_step(
                &mut f,
                t,
                &y,
                h_eff,
                cfg.rel_tol,
                cfg.abs_tol,
                last_rejected,
                &mut ws,
                &mut dense,
            )?;
            if !report.accepted {
                last_rejected = true;
                h = report.h_next;
                if h < time_floor(t) {
                    return Err(Error::StepSizeUnderflow { t, state: y.clone() });
                }
                continue;
            }
            last_rejected = false;

            let hit = scan_for_event(model, &modes, &dense, cfg, &mut scan_y)?;

            // Advance the chattering watches using the guard magnitudes seen
            // up to the event (or the whole step if none).
            let t_cut = hit.as_ref().map_or(dense.t_end(), |h| h.t);
            for k in 0..ns {
                if let (Some(w), SurfaceMode::Free { sigma }) = (&mut watches[k], modes[k]) {
                    for j in 0..SCAN_POINTS {
                        let tj = dense.t0 + dense.h * j as f64 / (SCAN_POINTS - 1) as f64;
                        if tj > t_cut {
                            break;
                        }
                        dense.eval(tj, &mut scan_y);
                        let e = sigma * model.guard(k, &scan_y);
                        w.peak = w.peak.max(e.abs());
                    }
                    if w.peak > cfg.stick_epsilon {
                        watches[k] = None;
                    }
                }
            }

            match hit {
                None => {
                    t = dense.t_end();
                    if t_end - t <= time_floor(t_end) {
                        t = t_end;
                    }
                    y.copy_from_slice(&ws.y_new);
                    samples.push(State { t, coords: y.clone() });
                    h = report.h_next;
                }
                Some(hit) => {
                    t = hit.t;
                    dense.eval(t, &mut y);
                    // Re-pin every already-stuck coordinate exactly.
                    for k in 0..ns {
                        if modes[k].is_stuck() {
                            y[model.stuck_coordinate(k)] = model.reference_velocity(k);
                        }
                    }
                    let k = hit.surface;
                    match hit.kind {
                        TriggerKind::SurfaceHit => {
                            let bal = model.balance_torque(k, &y);
                            let iv = model.holding_interval(k, &y);
                            if iv.contains_strictly(bal) {
                                // Stick. Cancel the whole episode if this is
                                // a chattering re-stick of a fresh release.
                                y[model.stuck_coordinate(k)] = model.reference_velocity(k);
                                modes[k] = SurfaceMode::Stuck { torque: bal };
                                if let Some(w) = watches[k].take() {
                                    events.remove(w.event_idx);
                                    mode_history.remove(w.hist_idx);
                                    for other in watches.iter_mut().flatten() {
                                        if other.event_idx > w.event_idx {
                                            other.event_idx -= 1;
                                        }
                                        if other.hist_idx > w.hist_idx {
                                            other.hist_idx -= 1;
                                        }
                                    }
                                } else {
                                    events.push(Event {
                                        t,
                                        surface: k,
                                        kind: EventKind::StickOnset,
                                        state: y.clone(),
                                    });
                                    mode_history.push((t, modes.clone()));
                                }
                            } else {
                                // Crossing (ties cross too): flip the branch
                                // and nudge just past the surface.
                                let SurfaceMode::Free { sigma } = modes[k] else {
                                    unreachable!("surface hit on a stuck surface")
                                };
                                events.push(Event {
                                    t,
                                    surface: k,
                                    kind: EventKind::Crossing,
                                    state: y.clone(),
                                });
                                let g = model.guard(k, &y);
                                let sigma_new = -sigma;
                                y[model.stuck_coordinate(k)] = model.reference_velocity(k)
                                    + sigma_new * g.abs().max(cfg.event_tol);
                                modes[k] = SurfaceMode::Free { sigma: sigma_new };
                                mode_history.push((t, modes.clone()));
                                watches[k] = None;
                            }
                        }
                        TriggerKind::ReleaseExit { sigma } => {
                            events.push(Event {
                                t,
                                surface: k,
                                kind: EventKind::Release,
                                state: y.clone(),
                            });
                            modes[k] = SurfaceMode::Free { sigma };
                            mode_history.push((t, modes.clone()));
                            watches[k] = Some(Watch {
                                event_idx: events.len() - 1,
                                hist_idx: mode_history.len() - 1,
                                peak: 0.0,
                            });
                        }
                    }
                    match samples.last_mut() {
                        Some(last) if last.t == t => last.coords.clone_from(&y),
                        _ => samples.push(State { t, coords: y.clone() }),
                    }
                    h_prop = Some(report.h_next);
                    continue 'segments;
                }
            }
        }
    }

    Ok(Trajectory {
        samples,
        events,
        mode_history,
        config: *cfg,
    })
}

/// Smallest meaningful time increment near t.
fn time_floor(t: f64) -> f64 {
    1e-13 * t.abs().max(1.0)
}

enum TriggerKind {
    /// A free surface's guard reached zero.
    SurfaceHit,
    /// A stuck surface's balance torque left the holding interval toward
    /// the branch with this sign.
    ReleaseExit { sigma: f64 },
}

struct Hit {
    t: f64,
    surface: usize,
    kind: TriggerKind,
}

/// Scan the accepted step for the earliest surface event. Ties between
/// surfaces go to the lower index.
fn scan_for_event<M: SystemModel + ?Sized>(
    model: &M,
    modes: &[SurfaceMode],
    dense: &DenseStep,
    cfg: &IntegrationConfig,
    scan_y: &mut [f64],
) -> Result<Option<Hit>> {
    let ns = modes.len();
    if ns == 0 {
        return Ok(None);
    }
    let mut best: Option<Hit> = None;
    let step_times: Vec<f64> = (0..SCAN_POINTS)
        .map(|j| dense.t0 + dense.h * j as f64 / (SCAN_POINTS - 1) as f64)
        .collect();

    for k in 0..ns {
        let cand = match modes[k] {
            SurfaceMode::Free { sigma } => {
                let mut prev_t = step_times[0];
                let mut found = None;
                for w in step_times.windows(2) {
                    dense.eval(w[1], scan_y);
                    let e1 = sigma * model.guard(k, scan_y);
                    if e1 < -cfg.event_tol {
                        found = Some(bisect_surface(model, k, sigma, dense, prev_t, w[1], cfg, scan_y));
                        break;
                    }
                    prev_t = w[1];
                }
                found.map(|t| Hit {
                    t,
                    surface: k,
                    kind: TriggerKind::SurfaceHit,
                })
            }
            SurfaceMode::Stuck { .. } => {
                let mut prev_t = step_times[0];
                let mut found = None;
                for w in step_times.windows(2) {
                    dense.eval(w[1], scan_y);
                    let (ex, sig) = excess(model, k, scan_y);
                    if ex > 0.0 {
                        found = Some(bisect_release(model, k, dense, prev_t, w[1], sig, scan_y));
                        break;
                    }
                    prev_t = w[1];
                }
                found.map(|(t, sigma)| Hit {
                    t,
                    surface: k,
                    kind: TriggerKind::ReleaseExit { sigma },
                })
            }
        };
        if let Some(c) = cand {
            if best.as_ref().map_or(true, |b| c.t < b.t) {
                best = Some(c);
            }
        }
    }
    Ok(best)
}

/// How far the balance torque sits outside the holding interval (negative
/// inside), plus the branch sign it would escape to.
fn excess<M: SystemModel + ?Sized>(model: &M, k: usize, y: &[f64]) -> (f64, f64) {
    let bal = model.balance_torque(k, y);
    let iv = model.holding_interval(k, y);
    let over = bal - iv.hi;
    let under = iv.lo - bal;
    if over >= under {
        (over, 1.0)
    } else {
        (under, -1.0)
    }
}

/// Locate the surface hit: earliest time in (a, b] where the signed guard
/// magnitude is within event_tol of the surface.
fn bisect_surface<M: SystemModel + ?Sized>(
    model: &M,
    k: usize,
    sigma: f64,
    dense: &DenseStep,
    mut a: f64,
    mut b: f64,
    cfg: &IntegrationConfig,
    scan_y: &mut [f64],
) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        dense.eval(mid, scan_y);
        let e = sigma * model.guard(k, scan_y);
        if e > cfg.event_tol {
            a = mid;
        } else if e < -cfg.event_tol {
            b = mid;
        } else {
            return mid;
        }
    }
    b
}

/// Locate the release: latest time in [a, b) where the balance torque is
/// still inside the interval, bracketing the exit. Returns (time, sign).
fn bisect_release<M: SystemModel + ?Sized>(
    model: &M,
    k: usize,
    dense: &DenseStep,
    mut a: f64,
    mut b: f64,
    mut sigma: f64,
    scan_y: &mut [f64],
) -> (f64, f64) {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        dense.eval(mid, scan_y);
        let (ex, sig) = excess(model, k, scan_y);
        if ex > 0.0 {
            b = mid;
            sigma = sig;
        } else {
            a = mid;
            if ex >= -1e-14 {
                break;
            }
        }
    }
    (a, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{DrillDcModel, DrillDcParams};
    use crate::testutil::{CoulombBlock, Harmonic};
    use approx::assert_relative_eq;

    fn cfg(t_end: f64) -> IntegrationConfig {
        IntegrationConfig {
            t_end,
            max_step: 0.05,
            ..IntegrationConfig::default()
        }
    }

    #[test]
    fn harmonic_accuracy() {
        let cfg = cfg(10.0);
        let traj = integrate(&Harmonic, &[1.0, 0.0], 0.0, &cfg).unwrap();
        let last = traj.final_state();
        assert_relative_eq!(last.t, 10.0, max_relative = 1e-12);
        assert!((last.coords[0] - 10f64.cos()).abs() < 10.0 * cfg.rel_tol);
        assert!((last.coords[1] + 10f64.sin()).abs() < 10.0 * cfg.rel_tol);
        assert!(traj.events.is_empty());
    }

    #[test]
    fn samples_strictly_increasing() {
        let traj = integrate(&Harmonic, &[1.0, 0.0], 0.0, &cfg(5.0)).unwrap();
        for w in traj.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn coulomb_block_sticks_at_closed_form_rest_point() {
        // Friction 0.1, start at 0.35: turning points 0.35 -> -0.15 -> -0.05,
        // where the spring force finally fits inside the friction cone. The
        // first turnaround is a crossing, the second a stick, at t = pi, 2pi.
        let block = CoulombBlock { mu: 0.1 };
        let traj = integrate(&block, &[0.35, 0.0], 0.0, &cfg(10.0)).unwrap();
        let last = traj.final_state();
        assert!((last.coords[0] + 0.05).abs() < 1e-6, "x_end = {}", last.coords[0]);
        assert_eq!(last.coords[1], 0.0);
        assert_eq!(traj.events.len(), 2);
        assert_eq!(traj.events[0].kind, EventKind::Crossing);
        assert_relative_eq!(traj.events[0].t, std::f64::consts::PI, epsilon = 1e-6);
        assert_eq!(traj.events[1].kind, EventKind::StickOnset);
        assert_relative_eq!(traj.events[1].t, 2.0 * std::f64::consts::PI, epsilon = 1e-6);
        // Once stuck the velocity row is exactly zero for the rest of the run.
        let t_stick = traj.events[1].t;
        for s in traj.samples.iter().filter(|s| s.t > t_stick) {
            assert_eq!(s.coords[1], 0.0);
            assert_relative_eq!(s.coords[0], last.coords[0], max_relative = 1e-12);
        }
    }

    #[test]
    fn on_surface_start_inside_cone_sticks_immediately() {
        let block = CoulombBlock { mu: 0.1 };
        let traj = integrate(&block, &[0.05, 0.0], 0.0, &cfg(3.0)).unwrap();
        assert_eq!(traj.events.len(), 1);
        assert_eq!(traj.events[0].kind, EventKind::StickOnset);
        assert_eq!(traj.events[0].t, 0.0);
        let last = traj.final_state();
        assert_eq!(last.coords, vec![0.05, 0.0]);
    }

    #[test]
    fn event_states_sit_on_the_surface() {
        let block = CoulombBlock { mu: 0.1 };
        let tol = IntegrationConfig::default().event_tol;
        let traj = integrate(&block, &[0.35, 0.0], 0.0, &cfg(10.0)).unwrap();
        for ev in &traj.events {
            let g = crate::model::SystemModel::guard(&block, ev.surface, &ev.state);
            assert!(g.abs() <= tol, "guard at {} event = {g}", ev.kind.label());
        }
    }

    #[test]
    fn drill_rig_first_release_matches_independent_solver() {
        // From the all-zero start the bit sticks at once and the table spins
        // up; the string winds until the twist reaches the breakaway torque.
        // Reproduce that release time with a classic fixed-step RK4 on the
        // reduced two-state stuck system.
        let m = DrillDcModel::new(DrillDcParams::default_rig()).unwrap();
        let p = *m.params();
        let traj = integrate(&m, &[0.0; 4], 0.0, &IntegrationConfig { t_end: 5.0, ..Default::default() }).unwrap();
        assert_eq!(traj.events[0].kind, EventKind::StickOnset);
        assert_eq!(traj.events[0].surface, 1);
        assert_eq!(traj.events[0].t, 0.0);
        let release = traj
            .events
            .iter()
            .find(|e| e.kind == EventKind::Release)
            .expect("string must wind up to breakaway");

        let rhs2 = |s: [f64; 2]| -> [f64; 2] {
            let t_fu = crate::friction::upper_branch(s[1], 1.0, &p.upper);
            [s[1], (p.k_m * p.v - p.k_theta * s[0] - p.b * s[1] - t_fu) / p.j_u]
        };
        let h = 1e-5;
        let mut s = [0.0, 0.0];
        let mut t = 0.0;
        let boundary = p.lower.t_0;
        let mut t_release_rk4 = None;
        for _ in 0..1_000_000 {
            let twist = |s: [f64; 2]| p.k_theta * s[0] + p.b * s[1];
            let before = twist(s);
            let k1 = rhs2(s);
            let k2 = rhs2([s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]]);
            let k3 = rhs2([s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]]);
            let k4 = rhs2([s[0] + h * k3[0], s[1] + h * k3[1]]);
            s[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            s[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            t += h;
            let after = twist(s);
            if after >= boundary {
                let frac = (boundary - before) / (after - before);
                t_release_rk4 = Some(t - h + frac * h);
                break;
            }
        }
        let t_oracle = t_release_rk4.expect("RK4 sweep must hit the boundary");
        assert!(
            (release.t - t_oracle).abs() < 1e-6,
            "release at {} vs oracle {t_oracle}",
            release.t
        );
        // While stuck, the bit row stays exactly pinned.
        for smp in traj.samples.iter().filter(|s| s.t < release.t) {
            assert_eq!(smp.coords[2], 0.0);
        }
    }

    #[test]
    fn drill_rig_sticks_and_releases_repeatedly() {
        let m = DrillDcModel::new(DrillDcParams::default_rig()).unwrap();
        let traj = integrate(&m, &[0.0; 4], 0.0, &IntegrationConfig { t_end: 100.0, ..Default::default() }).unwrap();
        let onsets = traj.events.iter().filter(|e| e.kind == EventKind::StickOnset).count();
        let releases = traj.events.iter().filter(|e| e.kind == EventKind::Release).count();
        assert!(onsets >= 2, "saw {onsets} stick onsets");
        assert!(releases >= 2, "saw {releases} releases");
        // Events alternate per surface: a release only follows a stick.
        let mut stuck = [false; 2];
        for ev in &traj.events {
            match ev.kind {
                EventKind::StickOnset => {
                    assert!(!stuck[ev.surface]);
                    stuck[ev.surface] = true;
                }
                EventKind::Release => {
                    assert!(stuck[ev.surface]);
                    stuck[ev.surface] = false;
                }
                EventKind::Crossing => {}
            }
        }
    }

    #[test]
    fn integration_is_deterministic() {
        let m = DrillDcModel::new(DrillDcParams::default_rig()).unwrap();
        let c = IntegrationConfig { t_end: 20.0, ..Default::default() };
        let a = integrate(&m, &[0.0; 4], 0.0, &c).unwrap();
        let b = integrate(&m, &[0.0; 4], 0.0, &c).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        for (sa, sb) in a.samples.iter().zip(&b.samples) {
            assert_eq!(sa.t, sb.t);
            assert_eq!(sa.coords, sb.coords);
        }
        assert_eq!(a.events.len(), b.events.len());
    }

    #[test]
    fn dense_between_samples_stays_on_manifold_while_stuck() {
        // The stuck coordinate is held exactly at the reference between
        // samples as well, because its derivative row is identically zero.
        let block = CoulombBlock { mu: 0.1 };
        let traj = integrate(&block, &[0.05, 0.0], 0.0, &cfg(1.0)).unwrap();
        for s in &traj.samples {
            assert_eq!(s.coords[1], 0.0);
        }
    }

    #[test]
    fn rejects_bad_initial_state() {
        assert!(integrate(&Harmonic, &[f64::NAN, 0.0], 0.0, &cfg(1.0)).is_err());
        assert!(integrate(&Harmonic, &[1.0], 0.0, &cfg(1.0)).is_err());
    }
}
