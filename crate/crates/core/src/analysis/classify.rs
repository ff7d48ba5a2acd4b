//! Hidden / self-excited classification by probing equilibrium
//! neighbourhoods.
//!
//! An attractor is self-excited when an arbitrarily small neighbourhood of
//! some equilibrium leads into it; otherwise it is hidden and can only be
//! reached from initial conditions found by dedicated search. The numerical
//! stand-in: scatter probes in small balls around every equilibrium,
//! integrate each, and compare what they converge to against the attractor
//! under test.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::equilibria::{jacobian_with_modes, Equilibrium};
use crate::analysis::metrics::{
    steady_state_metrics, velocity_means_match, AttractorKind, AttractorReport, Classification,
    ProbeOutcome, ProbeRecord,
};
use crate::error::{Error, Result};
use crate::integrator::{integrate, Trajectory};
use crate::model::{SurfaceMode, SystemModel};

#[derive(Debug, Clone)]
pub struct ClassifyConfig {
    /// Ball radius in normalised coordinates (see `probe_scales`).
    pub radius: f64,
    pub n_probes: usize,
    pub seed: u64,
    /// Tail fraction used when characterising each probe trajectory.
    pub tail_fraction: f64,
    pub workers: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            radius: 0.1,
            n_probes: 50,
            seed: 42,
            tail_fraction: 0.25,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// Tail peak-to-peak of coordinate `i` with its secular drift removed: the
/// least-squares line through the tail is subtracted before taking the
/// span. Angle coordinates of rotating machinery advance linearly in a
/// co-moving frame, so their raw span measures elapsed rotation, not the
/// attractor's size; the wobble around the drift line is the size. A
/// coordinate that does not drift fits a near-zero slope and is unchanged.
fn detrended_ptp(tail: &[crate::state::State], i: usize) -> f64 {
    if tail.len() < 3 {
        return crate::analysis::metrics::ptp(tail, i);
    }
    let n = tail.len() as f64;
    let tbar = tail.iter().map(|s| s.t).sum::<f64>() / n;
    let ybar = tail.iter().map(|s| s.coords[i]).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for s in tail {
        num += (s.t - tbar) * (s.coords[i] - ybar);
        den += (s.t - tbar) * (s.t - tbar);
    }
    if den == 0.0 {
        return crate::analysis::metrics::ptp(tail, i);
    }
    let slope = num / den;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in tail {
        let r = s.coords[i] - ybar - slope * (s.t - tbar);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    hi - lo
}

/// Per-coordinate scale giving the probe balls physical size: the
/// attractor's own tail excursion (drift removed) where it moves, unit
/// length where it does not.
fn probe_scales(traj: &Trajectory, tail_fraction: f64) -> Vec<f64> {
    let samples = &traj.samples;
    let window = (tail_fraction.clamp(0.01, 1.0) * traj.duration()).max(10.0);
    let tail = &samples[crate::analysis::metrics::first_tail_index(samples, window)..];
    (0..samples[0].coords.len())
        .map(|i| {
            let span = detrended_ptp(tail, i);
            if span > 1e-9 {
                span
            } else {
                1.0
            }
        })
        .collect()
}

/// Uniform sample from the unit ball via a Box-Muller direction and a
/// radially corrected magnitude.
fn unit_ball(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::with_capacity(dim);
    while v.len() < dim {
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        v.push(r * (2.0 * std::f64::consts::PI * u2).cos());
        if v.len() < dim {
            v.push(r * (2.0 * std::f64::consts::PI * u2).sin());
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let mag = rng.gen::<f64>().powf(1.0 / dim as f64);
    v.iter().map(|x| x / norm * mag).collect()
}

/// Dominant-growth direction of the linearisation, found by power
/// iteration on I + tau J (tau small enough that the ordering by |1 +
/// tau lambda| matches the ordering by real part). Returns a unit vector
/// in the reduced coordinates, or `None` when iteration stalls.
fn unstable_direction(jac: &nalgebra::DMatrix<f64>) -> Option<nalgebra::DVector<f64>> {
    let n = jac.nrows();
    let tau = 0.5 / (jac.amax() + 1.0);
    let step = nalgebra::DMatrix::identity(n, n) + jac * tau;
    let mut v = nalgebra::DVector::from_element(n, 1.0 / (n as f64).sqrt());
    for _ in 0..300 {
        v = &step * v;
        let norm = v.norm();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        v /= norm;
    }
    Some(v)
}

struct ProbeSeed {
    equilibrium: usize,
    offset: Vec<f64>,
    start: Vec<f64>,
}

/// Build the full deterministic probe set up front: round-robin over the
/// equilibria, one ball sample each, drawn from a single seeded stream so
/// the set does not depend on thread count. Probes around an unstable
/// equilibrium get their component along the dominant growth direction
/// doubled, spending more of the budget where escape is possible.
fn probe_seeds<M: SystemModel + ?Sized>(
    model: &M,
    equilibria: &[Equilibrium],
    scales: &[f64],
    cfg: &ClassifyConfig,
) -> Vec<ProbeSeed> {
    let dim = model.dim();
    let cyclic = model.cyclic_coords();
    let reduced: Vec<usize> = (0..dim).filter(|i| !cyclic.contains(i)).collect();

    let growth_dirs: Vec<Option<nalgebra::DVector<f64>>> = equilibria
        .iter()
        .map(|eq| {
            if eq.stuck || !matches!(eq.eigen_max_real, Some(r) if r > 0.0) {
                return None;
            }
            let modes: Vec<SurfaceMode> = (0..model.n_surfaces())
                .map(|k| {
                    let sigma = if model.guard(k, &eq.state) < 0.0 { -1.0 } else { 1.0 };
                    SurfaceMode::Free { sigma }
                })
                .collect();
            let full = jacobian_with_modes(model, &eq.state, &modes).ok()?;
            let mut red = nalgebra::DMatrix::zeros(reduced.len(), reduced.len());
            for (r, &i) in reduced.iter().enumerate() {
                for (c, &j) in reduced.iter().enumerate() {
                    red[(r, c)] = full[(i, j)];
                }
            }
            unstable_direction(&red)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.n_probes)
        .map(|p| {
            let e = p % equilibria.len();
            let mut ball = unit_ball(&mut rng, dim);
            if let Some(dir) = &growth_dirs[e] {
                let dot: f64 = reduced.iter().enumerate().map(|(j, &i)| ball[i] * dir[j]).sum();
                for (j, &i) in reduced.iter().enumerate() {
                    ball[i] += dot * dir[j];
                }
            }
            let offset: Vec<f64> = ball
                .iter()
                .zip(scales)
                .map(|(b, s)| b * cfg.radius * s)
                .collect();
            let start: Vec<f64> = equilibria[e]
                .state
                .iter()
                .zip(&offset)
                .map(|(x, d)| x + d)
                .collect();
            ProbeSeed {
                equilibrium: e,
                offset,
                start,
            }
        })
        .collect()
}

/// Decide whether the attractor in `report` is hidden or self-excited by
/// integrating `cfg.n_probes` perturbed starts spread round-robin over the
/// equilibria. A probe counts as reaching the attractor when its tail has
/// the same kind and velocity means within 2%. No equilibria at all makes
/// the attractor hidden by definition, with no probes to run.
///
/// The input report must not itself be an equilibrium; classification of
/// an unresolved tail is also refused since there is nothing to match
/// against.
pub fn classify_attractor<M: SystemModel + ?Sized>(
    model: &M,
    traj: &Trajectory,
    mut report: AttractorReport,
    equilibria: &[Equilibrium],
    cfg: &ClassifyConfig,
) -> Result<AttractorReport> {
    match report.kind {
        AttractorKind::Equilibrium => {
            return Err(Error::Domain(
                "an equilibrium is neither hidden nor self-excited; classification applies to \
                 cycles and captured rotations"
                    .into(),
            ));
        }
        AttractorKind::Unresolved => {
            return Err(Error::Domain(
                "cannot classify an unresolved attractor; extend the run until its tail settles"
                    .into(),
            ));
        }
        AttractorKind::LimitCycle | AttractorKind::CapturedRotation => {}
    }
    if equilibria.is_empty() {
        report.classification = Classification::Hidden;
        report.probes = Vec::new();
        return Ok(report);
    }

    let scales = probe_scales(traj, cfg.tail_fraction);
    let seeds = probe_seeds(model, equilibria, &scales, cfg);
    let icfg = traj.config.clone();

    let mut outcomes: Vec<Option<ProbeOutcome>> = vec![None; seeds.len()];
    let workers = cfg.workers.max(1).min(seeds.len().max(1));
    let chunk = seeds.len().div_ceil(workers);
    let (icfg_ref, report_ref, tail_fraction) = (&icfg, &report, cfg.tail_fraction);
    std::thread::scope(|scope| {
        for (slot_chunk, seed_chunk) in outcomes.chunks_mut(chunk).zip(seeds.chunks(chunk)) {
            scope.spawn(move || {
                for (slot, seed) in slot_chunk.iter_mut().zip(seed_chunk) {
                    *slot = Some(run_probe(model, seed, icfg_ref, tail_fraction, report_ref));
                }
            });
        }
    });

    report.probes = seeds
        .iter()
        .zip(&outcomes)
        .map(|(s, o)| ProbeRecord {
            equilibrium: s.equilibrium,
            offset: s.offset.clone(),
            outcome: o.expect("every chunk ran"),
        })
        .collect();
    report.classification = if report
        .probes
        .iter()
        .any(|p| p.outcome == ProbeOutcome::Matched)
    {
        Classification::SelfExcited
    } else {
        Classification::Hidden
    };
    Ok(report)
}

fn run_probe<M: SystemModel + ?Sized>(
    model: &M,
    seed: &ProbeSeed,
    icfg: &crate::integrator::IntegrationConfig,
    tail_fraction: f64,
    reference: &AttractorReport,
) -> ProbeOutcome {
    let ptraj = match integrate(model, &seed.start, 0.0, icfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!(
                "warning: probe around equilibrium {} failed: {e}; excluded from the verdict",
                seed.equilibrium
            );
            return ProbeOutcome::Unresolved;
        }
    };
    let prep = steady_state_metrics(model, &ptraj, tail_fraction);
    if prep.kind == AttractorKind::Unresolved {
        return ProbeOutcome::Unresolved;
    }
    if prep.kind == reference.kind
        && velocity_means_match(
            &reference.tail_mean_velocities,
            &prep.tail_mean_velocities,
            reference.amplitude,
        )
    {
        ProbeOutcome::Matched
    } else {
        ProbeOutcome::Other
    }
}
