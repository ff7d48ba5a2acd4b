//! Equilibrium location and linear stability.
//!
//! Equilibria are understood modulo cyclic coordinates: a state counts as an
//! equilibrium when every non-cyclic derivative vanishes, so a rig spinning
//! at constant speed with a drifting absolute angle qualifies. Stability is
//! judged on the reduced Jacobian with cyclic rows and columns removed.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::friction::{lower_branch, upper_branch};
use crate::model::{SurfaceMode, SystemModel};
use crate::models::{DrillDcModel, DrillInductionModel, Model};

/// Multi-start Newton settings for [`find_equilibria`].
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Velocity values seeded on each velocity axis (other coords zero).
    pub velocity_scan: Vec<f64>,
    /// Sup-norm residual below which a candidate is accepted.
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Sup-norm distance (non-cyclic coords) under which two candidates
    /// are the same equilibrium.
    pub dedup_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            velocity_scan: vec![
                -10.0, -6.0, -3.0, -1.5, -0.5, 0.5, 1.5, 3.0, 6.0, 10.0,
            ],
            newton_tol: 1e-10,
            max_iter: 60,
            dedup_tol: 1e-6,
        }
    }
}

/// Interval of rest states forming a connected stuck family, parametrised
/// by one position coordinate (every other coordinate held at the reported
/// equilibrium's value).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RestFamily {
    pub coord: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Equilibrium {
    pub state: Vec<f64>,
    /// Sup-norm of the non-cyclic derivative rows at `state`.
    pub residual_norm: f64,
    /// Largest real part over the reduced Jacobian's spectrum. `None` for
    /// stuck families, where the pinned dynamics have no smooth Jacobian.
    pub eigen_max_real: Option<f64>,
    /// `None` means unresolved: the Jacobian is singular at the candidate,
    /// so the linearisation cannot decide.
    pub stable: Option<bool>,
    /// True when the state rests on switching surfaces held by friction.
    pub stuck: bool,
    pub family: Option<RestFamily>,
}

fn non_cyclic(model: &(impl SystemModel + ?Sized)) -> Vec<usize> {
    (0..model.dim())
        .filter(|i| !model.cyclic_coords().contains(i))
        .collect()
}

/// Smooth branch selection away from the surfaces: sigma follows the sign
/// of each guard, treating exact zero as the positive side.
fn smooth_modes(model: &(impl SystemModel + ?Sized), y: &[f64]) -> Vec<SurfaceMode> {
    (0..model.n_surfaces())
        .map(|k| {
            let sigma = if model.guard(k, y) < 0.0 { -1.0 } else { 1.0 };
            SurfaceMode::Free { sigma }
        })
        .collect()
}

/// Central finite-difference Jacobian of `f`, step 1e-7 * max(1, |coord|).
fn fd_jacobian<F>(dim: usize, y: &[f64], mut f: F) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let mut jac = DMatrix::zeros(dim, dim);
    let mut yp = y.to_vec();
    let mut fp = vec![0.0; dim];
    let mut fm = vec![0.0; dim];
    for col in 0..dim {
        let h = 1e-7 * y[col].abs().max(1.0);
        yp[col] = y[col] + h;
        f(&yp, &mut fp)?;
        yp[col] = y[col] - h;
        f(&yp, &mut fm)?;
        yp[col] = y[col];
        for row in 0..dim {
            jac[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Jacobian of the smooth branch at `y`. The state must sit clear of every
/// switching surface; on a surface the two-sided difference would straddle
/// the discontinuity, so that case is rejected in favour of
/// [`jacobian_with_modes`] with an explicit branch choice.
pub fn jacobian(model: &(impl SystemModel + ?Sized), y: &[f64]) -> Result<DMatrix<f64>> {
    for k in 0..model.n_surfaces() {
        if model.guard(k, y).abs() <= 1e-9 {
            return Err(Error::Domain(format!(
                "state lies on switching surface {k}; linearise with an explicit branch choice"
            )));
        }
    }
    jacobian_with_modes(model, y, &smooth_modes(model, y))
}

/// Jacobian of the branch selected by `modes`, held fixed across all
/// difference evaluations. Stuck surfaces contribute identically zero rows.
pub fn jacobian_with_modes(
    model: &(impl SystemModel + ?Sized),
    y: &[f64],
    modes: &[SurfaceMode],
) -> Result<DMatrix<f64>> {
    let mut scratch = modes.to_vec();
    fd_jacobian(model.dim(), y, |yy, out| {
        for (k, mode) in scratch.iter_mut().enumerate() {
            if mode.is_stuck() {
                *mode = SurfaceMode::Stuck {
                    torque: model.balance_torque(k, yy),
                };
            }
        }
        model.rhs(yy, &scratch, out)
    })
}

fn select(jac: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(idx.len(), idx.len());
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            out[(r, c)] = jac[(i, j)];
        }
    }
    out
}

/// Spectrum summary of a reduced Jacobian: (largest real part, singular).
/// Singular means an eigenvalue sits numerically at zero, in which case the
/// linearisation cannot decide stability.
fn spectrum(jac: &DMatrix<f64>) -> (f64, bool) {
    let eigs = jac.complex_eigenvalues();
    let max_re = eigs.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
    let singular = eigs.iter().any(|c| c.norm() < 1e-8);
    (max_re, singular)
}

fn residual_norm(
    model: &(impl SystemModel + ?Sized),
    y: &[f64],
    modes: &[SurfaceMode],
    rows: &[usize],
) -> Result<f64> {
    let mut r = vec![0.0; model.dim()];
    model.rhs(y, modes, &mut r)?;
    Ok(rows.iter().map(|&i| r[i].abs()).fold(0.0, f64::max))
}

/// Newton iteration on the non-cyclic coordinates from one start point.
/// Returns a converged state or `None`; every failure mode (singular step,
/// escape to huge values, crossing-induced cycling) just abandons the start.
fn newton_from(
    model: &(impl SystemModel + ?Sized),
    start: &[f64],
    vars: &[usize],
    cfg: &SearchConfig,
) -> Option<Vec<f64>> {
    let mut y = start.to_vec();
    let mut r = vec![0.0; model.dim()];
    for _ in 0..cfg.max_iter {
        let modes = smooth_modes(model, &y);
        model.rhs(&y, &modes, &mut r).ok()?;
        let res = vars.iter().map(|&i| r[i].abs()).fold(0.0, f64::max);
        if !res.is_finite() {
            return None;
        }
        if res < cfg.newton_tol {
            return Some(y);
        }
        let full = jacobian_with_modes(model, &y, &modes).ok()?;
        let red = select(&full, vars);
        let rhs_vec = nalgebra::DVector::from_iterator(vars.len(), vars.iter().map(|&i| r[i]));
        let dx = red.lu().solve(&rhs_vec)?;
        for (j, &i) in vars.iter().enumerate() {
            y[i] -= dx[j];
            if !y[i].is_finite() || y[i].abs() > 1e9 {
                return None;
            }
        }
    }
    None
}

/// Classify a smooth (non-stuck) candidate state into an `Equilibrium`
/// record, or reject it when it sits on a switching surface.
fn classify_candidate(
    model: &(impl SystemModel + ?Sized),
    y: Vec<f64>,
    vars: &[usize],
    cfg: &SearchConfig,
) -> Option<Equilibrium> {
    for k in 0..model.n_surfaces() {
        // A candidate on a surface is a sliding state, handled by the
        // model-specific rest-family search instead.
        if model.guard(k, &y).abs() <= 1e-9 {
            return None;
        }
    }
    let modes = smooth_modes(model, &y);
    let res = residual_norm(model, &y, &modes, vars).ok()?;
    if res > cfg.newton_tol * 10.0 {
        return None;
    }
    let full = jacobian_with_modes(model, &y, &modes).ok()?;
    let (max_re, singular) = spectrum(&select(&full, vars));
    Some(Equilibrium {
        state: y,
        residual_norm: res,
        eigen_max_real: Some(max_re),
        stable: if singular { None } else { Some(max_re < 0.0) },
        stuck: false,
        family: None,
    })
}

fn same_equilibrium(a: &[f64], b: &[f64], vars: &[usize], tol: f64) -> bool {
    vars.iter().all(|&i| (a[i] - b[i]).abs() <= tol)
}

/// Spinning equilibria of the two-disc DC rig via the scalar reduction:
/// at equal disc speeds the string twist drops out of the torque balance,
/// leaving T_fu(w) + T_fl(w) = k_m v in the single unknown w, after which
/// the twist follows from the bit's own balance.
fn dc_spin_candidates(m: &DrillDcModel) -> Vec<Vec<f64>> {
    let p = m.params();
    let target = p.k_m * p.v;
    let f = |w: f64| {
        let s = if w < 0.0 { -1.0 } else { 1.0 };
        upper_branch(w, s, &p.upper) + lower_branch(w, s, &p.lower) - target
    };
    let w_hi = (5.0 * target.abs()).max(30.0);
    let n = 8000;
    let mut out = Vec::new();
    for side in [1.0, -1.0] {
        let mut w_prev = side * w_hi * 1e-6;
        let mut f_prev = f(w_prev);
        for i in 1..=n {
            let w = side * w_hi * i as f64 / n as f64;
            let fw = f(w);
            if f_prev * fw <= 0.0 && f_prev != fw {
                let (mut a, mut b) = (w_prev, w);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if f(a) * f(mid) <= 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                let w_star = 0.5 * (a + b);
                let s = if w_star < 0.0 { -1.0 } else { 1.0 };
                let alpha = lower_branch(w_star, s, &p.lower) / p.k_theta;
                out.push(vec![alpha, w_star, w_star, 0.0]);
            }
            w_prev = w;
            f_prev = fw;
        }
    }
    out
}

/// Whole-system rest states of the DC rig: both discs stuck, so the drive
/// and the twist must each fit inside their surface's holding interval.
/// The feasible twists form an interval; its midpoint is reported with the
/// full extent attached.
fn dc_rest_family(m: &DrillDcModel) -> Option<Equilibrium> {
    let p = m.params();
    let rest = [0.0, 0.0, 0.0, 0.0];
    let iv_u = m.holding_interval(0, &rest);
    let iv_l = m.holding_interval(1, &rest);
    // Surface 0 holds k_m v - k_theta alpha, surface 1 holds k_theta alpha.
    let lo = ((p.k_m * p.v - iv_u.hi) / p.k_theta).max(iv_l.lo / p.k_theta);
    let hi = ((p.k_m * p.v - iv_u.lo) / p.k_theta).min(iv_l.hi / p.k_theta);
    if lo > hi {
        return None;
    }
    let mid = 0.5 * (lo + hi);
    Some(Equilibrium {
        state: vec![mid, 0.0, 0.0, 0.0],
        residual_norm: 0.0,
        eigen_max_real: None,
        stable: Some(true),
        stuck: true,
        family: Some(RestFamily { coord: 0, lo, hi }),
    })
}

/// Steady-slip states of the induction rig, found in the co-rotating
/// current frame where they are true equilibria, with stability from the
/// finite-difference Jacobian of that reduced system.
fn induction_wave_records(m: &DrillInductionModel) -> Vec<Equilibrium> {
    let phases: [f64; 3] = [0.0, 2.0 * std::f64::consts::PI / 3.0, 4.0 * std::f64::consts::PI / 3.0];
    m.wave_equilibria()
        .into_iter()
        .map(|w| {
            // state = [theta_u, omega_u, theta_l, omega_l, i1, i2, i3] at
            // theta_u = 0; rebuild the reduced coordinates from it.
            let s = &w.state;
            let id: f64 = (0..3).map(|k| s[4 + k] * phases[k].sin()).sum();
            let iq: f64 = (0..3).map(|k| s[4 + k] * phases[k].cos()).sum();
            let z = [s[0] - s[2], s[1], s[3], id, iq];
            let jac = fd_jacobian(5, &z, |zz, out| {
                let mut buf = [0.0; 5];
                m.dq_rhs(&[zz[0], zz[1], zz[2], zz[3], zz[4]], &mut buf);
                out.copy_from_slice(&buf);
                Ok(())
            })
            .expect("reduced rhs is total");
            let (max_re, singular) = spectrum(&jac);
            Equilibrium {
                state: w.state,
                residual_norm: w.residual_norm,
                eigen_max_real: Some(max_re),
                stable: if singular { None } else { Some(max_re < 0.0) },
                stuck: false,
                family: None,
            }
        })
        .collect()
}

/// Locate the model's equilibria: model-specific reductions seed the exact
/// branches (spinning roots, rest families, steady-slip waves), and a
/// deterministic Newton multi-start over each velocity axis catches
/// anything the reductions missed. Duplicates collapse to the first find.
pub fn find_equilibria(model: &Model, cfg: &SearchConfig) -> Result<Vec<Equilibrium>> {
    let vars = non_cyclic(model);
    let mut found: Vec<Equilibrium> = Vec::new();

    match model {
        Model::DrillDc(m) => {
            if let Some(eq) = dc_rest_family(m) {
                found.push(eq);
            }
            for cand in dc_spin_candidates(m) {
                if let Some(eq) = classify_candidate(model, cand, &vars, cfg) {
                    if !found
                        .iter()
                        .any(|e| same_equilibrium(&e.state, &eq.state, &vars, cfg.dedup_tol))
                    {
                        found.push(eq);
                    }
                }
            }
        }
        Model::DrillInduction(m) => {
            found.extend(induction_wave_records(m));
        }
        Model::Tora(_) => {}
    }

    let mut starts = Vec::new();
    for &vi in model.velocity_indices() {
        for &w in &cfg.velocity_scan {
            let mut y = vec![0.0; model.dim()];
            y[vi] = w;
            starts.push(y);
        }
    }
    for start in starts {
        let Some(y) = newton_from(model, &start, &vars, cfg) else {
            continue;
        };
        let Some(eq) = classify_candidate(model, y, &vars, cfg) else {
            continue;
        };
        if !found
            .iter()
            .any(|e| same_equilibrium(&e.state, &eq.state, &vars, cfg.dedup_tol))
        {
            found.push(eq);
        }
    }
    Ok(found)
}
