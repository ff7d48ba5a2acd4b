//! Basin-of-attraction scan over a two-coordinate grid of initial
//! conditions.

use crate::analysis::metrics::{steady_state_metrics, velocity_means_match, AttractorKind};
use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegrationConfig};
use crate::model::SystemModel;

/// Rectangular grid of initial conditions: two coordinates swept over
/// linear ranges, every other coordinate held at `base_state`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub x_coord: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub nx: usize,
    pub y_coord: usize,
    pub y_lo: f64,
    pub y_hi: f64,
    pub ny: usize,
    pub base_state: Vec<f64>,
}

impl GridSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.base_state.len() != dim {
            return Err(Error::InvalidParams(format!(
                "grid base state has {} coordinates, model needs {dim}",
                self.base_state.len()
            )));
        }
        if self.x_coord >= dim || self.y_coord >= dim {
            return Err(Error::InvalidParams(
                "grid axis coordinate out of range".into(),
            ));
        }
        if self.x_coord == self.y_coord {
            return Err(Error::InvalidParams(
                "grid axes must use two different coordinates".into(),
            ));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidParams("grid resolution must be positive".into()));
        }
        if !(self.x_lo <= self.x_hi && self.y_lo <= self.y_hi)
            || [self.x_lo, self.x_hi, self.y_lo, self.y_hi]
                .iter()
                .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParams("grid ranges must be finite and ordered".into()));
        }
        if self.base_state.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("grid base state must be finite".into()));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    /// Initial state of cell (ix, iy).
    pub fn cell_state(&self, ix: usize, iy: usize) -> Vec<f64> {
        let mut y = self.base_state.clone();
        y[self.x_coord] = Self::axis(self.x_lo, self.x_hi, self.nx, ix);
        y[self.y_coord] = Self::axis(self.y_lo, self.y_hi, self.ny, iy);
        y
    }
}

/// One attractor class discovered during a scan, identified by its kind
/// and tail velocity means.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AttractorClass {
    pub kind: AttractorKind,
    pub tail_mean_velocities: Vec<f64>,
    pub amplitude: f64,
}

/// Result of a basin scan. `labels` is row-major with x fastest
/// (`labels[iy * nx + ix]`); each entry indexes into `attractors`, with
/// `None` for cells whose tail stayed unresolved or whose integration
/// failed.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BasinMap {
    pub spec: GridSpec,
    pub labels: Vec<Option<usize>>,
    pub attractors: Vec<AttractorClass>,
}

/// Integrate every grid cell and label it by the attractor its tail
/// reaches. Cells run in parallel across `workers` threads; labels are
/// assigned in a sequential pass in cell index order, matching each tail
/// against the classes found so far (same kind, velocity means within 2%)
/// and appending a new class when nothing matches. Both the integrations
/// and the labeling are deterministic, so the map is identical for every
/// worker count. A failed cell gets an unresolved label and a warning,
/// never aborting the scan.
pub fn basin_scan<M: SystemModel + ?Sized>(
    model: &M,
    spec: GridSpec,
    icfg: &IntegrationConfig,
    tail_fraction: f64,
    workers: usize,
) -> Result<BasinMap> {
    spec.validate(model.dim())?;
    icfg.validate()?;
    let n_cells = spec.nx * spec.ny;

    type CellOutcome = std::result::Result<(AttractorKind, Vec<f64>, f64), String>;
    let mut outcomes: Vec<Option<CellOutcome>> = vec![None; n_cells];
    let workers = workers.max(1).min(n_cells);
    let chunk = n_cells.div_ceil(workers);
    let spec_ref = &spec;
    std::thread::scope(|scope| {
        for (wi, slot_chunk) in outcomes.chunks_mut(chunk).enumerate() {
            scope.spawn(move || {
                for (j, slot) in slot_chunk.iter_mut().enumerate() {
                    let cell = wi * chunk + j;
                    let y0 = spec_ref.cell_state(cell % spec_ref.nx, cell / spec_ref.nx);
                    let outcome = match integrate(model, &y0, 0.0, icfg) {
                        Ok(traj) => {
                            let r = steady_state_metrics(model, &traj, tail_fraction);
                            Ok((r.kind, r.tail_mean_velocities, r.amplitude))
                        }
                        Err(e) => Err(e.to_string()),
                    };
                    *slot = Some(outcome);
                }
            });
        }
    });

    let mut attractors: Vec<AttractorClass> = Vec::new();
    let mut labels = Vec::with_capacity(n_cells);
    for (cell, outcome) in outcomes.into_iter().enumerate() {
        let label = match outcome.expect("every cell ran") {
            Err(msg) => {
                eprintln!(
                    "warning: basin cell ({}, {}) failed: {msg}; labeled unresolved",
                    cell % spec.nx,
                    cell / spec.nx
                );
                None
            }
            Ok((AttractorKind::Unresolved, _, _)) => None,
            Ok((kind, means, amplitude)) => {
                let hit = attractors.iter().position(|a| {
                    a.kind == kind
                        && velocity_means_match(&a.tail_mean_velocities, &means, a.amplitude)
                });
                Some(hit.unwrap_or_else(|| {
                    attractors.push(AttractorClass {
                        kind,
                        tail_mean_velocities: means,
                        amplitude,
                    });
                    attractors.len() - 1
                }))
            }
        };
        labels.push(label);
    }
    Ok(BasinMap {
        spec,
        labels,
        attractors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_model;

    fn short_cfg() -> IntegrationConfig {
        IntegrationConfig {
            t_end: 60.0,
            ..IntegrationConfig::default()
        }
    }

    #[test]
    fn single_cell_matches_a_direct_run() {
        let (model, _) = build_model("drill_dc", &[]).unwrap();
        let spec = GridSpec {
            x_coord: 1,
            x_lo: 0.0,
            x_hi: 0.0,
            nx: 1,
            y_coord: 2,
            y_lo: 0.0,
            y_hi: 0.0,
            ny: 1,
            base_state: vec![0.0; 4],
        };
        let map = basin_scan(&model, spec, &short_cfg(), 0.25, 2).unwrap();
        assert_eq!(map.labels, vec![Some(0)]);
        assert_eq!(map.attractors.len(), 1);

        let traj = integrate(&model, &[0.0; 4], 0.0, &short_cfg()).unwrap();
        let direct = steady_state_metrics(&model, &traj, 0.25);
        assert_eq!(map.attractors[0].kind, direct.kind);
        assert_eq!(
            map.attractors[0].tail_mean_velocities,
            direct.tail_mean_velocities
        );
    }

    #[test]
    fn map_is_identical_across_worker_counts() {
        let (model, _) = build_model("drill_dc", &[]).unwrap();
        // Base twist at the spin equilibrium: the (6.1, 6.1) corner settles
        // immediately while the (0, 0) corner runs the stick-slip cycle.
        let spec = GridSpec {
            x_coord: 1,
            x_lo: 0.0,
            x_hi: 6.1,
            nx: 2,
            y_coord: 2,
            y_lo: 0.0,
            y_hi: 6.1,
            ny: 2,
            base_state: vec![1.4263371313719064, 0.0, 0.0, 0.0],
        };
        let one = basin_scan(&model, spec.clone(), &short_cfg(), 0.25, 1).unwrap();
        let many = basin_scan(&model, spec, &short_cfg(), 0.25, 3).unwrap();
        assert_eq!(one, many);
        let cycle = one.labels[0].expect("zero start reaches the cycle");
        let spin = one.labels[3].expect("equilibrium start stays put");
        assert_ne!(cycle, spin);
        assert_eq!(one.attractors[cycle].kind, AttractorKind::LimitCycle);
        assert_eq!(one.attractors[spin].kind, AttractorKind::Equilibrium);
    }

    #[test]
    fn failing_cells_are_labeled_unresolved() {
        struct Fragile;
        impl SystemModel for Fragile {
            fn dim(&self) -> usize {
                2
            }
            fn names(&self) -> &[&'static str] {
                &["x", "v"]
            }
            fn rhs(
                &self,
                y: &[f64],
                _modes: &[crate::model::SurfaceMode],
                out: &mut [f64],
            ) -> crate::error::Result<()> {
                if y[0] > 5.0 {
                    return Err(Error::Domain("left the valid region".into()));
                }
                out[0] = 0.0;
                out[1] = -y[1];
                Ok(())
            }
            fn velocity_indices(&self) -> &[usize] {
                &[1]
            }
        }
        let spec = GridSpec {
            x_coord: 0,
            x_lo: 0.0,
            x_hi: 10.0,
            nx: 2,
            y_coord: 1,
            y_lo: 1.0,
            y_hi: 1.0,
            ny: 1,
            base_state: vec![0.0, 0.0],
        };
        let map = basin_scan(&Fragile, spec, &short_cfg(), 0.25, 2).unwrap();
        assert_eq!(map.labels[0], Some(0));
        assert_eq!(map.labels[1], None);
    }

    #[test]
    fn bad_grid_is_rejected() {
        let (model, _) = build_model("drill_dc", &[]).unwrap();
        let spec = GridSpec {
            x_coord: 1,
            x_lo: 0.0,
            x_hi: 1.0,
            nx: 2,
            y_coord: 1,
            y_lo: 0.0,
            y_hi: 1.0,
            ny: 2,
            base_state: vec![0.0; 4],
        };
        let err = basin_scan(&model, spec, &short_cfg(), 0.25, 1).unwrap_err();
        assert!(matches!(err, Error::InvalidParams(_)));
    }
}
