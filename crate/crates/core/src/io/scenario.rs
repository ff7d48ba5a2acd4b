//! Canonical scenarios and the end-to-end runner that turns a spec into a
//! summary plus on-disk artifacts.

use std::path::Path;
use std::time::Instant;

use crate::analysis::{
    classify_attractor, find_equilibria, sommerfeld_ratio, steady_state_metrics, AttractorKind,
    AttractorReport, ClassifyConfig, Equilibrium, SearchConfig,
};
use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegrationConfig};
use crate::io::config::{AnalysisOptions, ScenarioSpec};
use crate::io::export::{emit_plot_script, export_json, export_trajectory};
use crate::model::SystemModel;
use crate::models::{build_model, Model, ParamEntry};

pub const BUILTIN_IDS: [&str; 6] = [
    "tora-capture",
    "tora-normal",
    "drill-dc-hidden",
    "drill-dc-normal",
    "drill-ind-a",
    "drill-ind-b",
];

/// Run length that gives the named model's transients room to die out at
/// the default tolerances. The induction rig's slowest mode decays at
/// about 0.12/s, so 300 s leaves the tail flat to well below the
/// equilibrium-detection threshold.
pub fn default_t_end(model: &str) -> f64 {
    if model == "drill_induction" {
        300.0
    } else {
        150.0
    }
}

/// The six stock runs, each a pair per model contrasting an operating
/// steady state with a coexisting oscillation from different starts.
/// `drill-ind-normal` and `drill-ind-hidden` are accepted aliases for the
/// induction pair.
pub fn builtin_scenario(id: &str) -> Option<ScenarioSpec> {
    let canonical = match id {
        "drill-ind-normal" => "drill-ind-a",
        "drill-ind-hidden" => "drill-ind-b",
        other => other,
    };
    // Induction velocities are offsets from the synchronous frame, so all
    // zeros is a spin-up from synchronous speed and -8 is physical rest.
    let (model, initial, pair) = match canonical {
        "tora-capture" => ("tora", vec![0.0; 4], Some("tora-normal")),
        "tora-normal" => ("tora", vec![0.0, 0.0, 0.0, 40.0], None),
        "drill-dc-hidden" => ("drill_dc", vec![0.0; 4], None),
        "drill-dc-normal" => ("drill_dc", vec![0.0, 6.1, 6.1, 0.0], None),
        "drill-ind-a" => ("drill_induction", vec![0.0; 7], None),
        "drill-ind-b" => (
            "drill_induction",
            vec![0.0, -8.0, 0.0, -8.0, 0.0, 0.0, 0.0],
            None,
        ),
        _ => return None,
    };
    // The DC normal run converges through a mode decaying at ~0.11/s;
    // 150 s is provably too short for its tail to flatten out.
    let t_end = match canonical {
        "drill-dc-normal" => 300.0,
        _ => default_t_end(model),
    };
    Some(ScenarioSpec {
        id: canonical.to_string(),
        model: model.to_string(),
        overrides: Vec::new(),
        initial,
        integration: IntegrationConfig {
            t_end,
            ..IntegrationConfig::default()
        },
        analysis: AnalysisOptions {
            sommerfeld_pair: pair.map(String::from),
            ..AnalysisOptions::default()
        },
    })
}

/// Everything a run produced, in the order a reader wants it: what ran,
/// with which resolved parameters, what the tail looks like, and what the
/// phase portrait holds.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub model: String,
    /// Fully resolved parameters; every entry carries its provenance.
    pub params: Vec<ParamEntry>,
    pub initial_state: Vec<f64>,
    pub integration: IntegrationConfig,
    pub report: AttractorReport,
    pub equilibria: Vec<Equilibrium>,
    pub sommerfeld_pair: Option<String>,
    pub sommerfeld_ratio: Option<f64>,
    pub events: usize,
    pub wall_clock_seconds: f64,
}

fn built(spec: &ScenarioSpec) -> Result<(Model, Vec<ParamEntry>)> {
    let (model, params) = build_model(&spec.model, &spec.overrides)?;
    if spec.initial.len() != model.dim() {
        return Err(Error::InvalidParams(format!(
            "initial state has {} entries but model {} has {} coordinates",
            spec.initial.len(),
            spec.model,
            model.dim()
        )));
    }
    Ok((model, params))
}

/// Reference tail metrics for a ratio pair: integrate the named built-in
/// and characterise its tail, skipping classification and export.
fn pair_report(id: &str) -> Result<AttractorReport> {
    let spec = builtin_scenario(id).ok_or_else(|| {
        Error::Config(format!(
            "ratio pair `{id}` is not a built-in scenario; built-ins are {}",
            BUILTIN_IDS.join(", ")
        ))
    })?;
    let (model, _) = built(&spec)?;
    let traj = integrate(&model, &spec.initial, 0.0, &spec.integration)?;
    Ok(steady_state_metrics(&model, &traj, spec.analysis.tail_fraction))
}

/// Run one scenario end to end and drop `{id}.csv`, `{id}.json` and
/// `{id}_plot.py` into `out_dir`.
pub fn run_scenario(spec: &ScenarioSpec, out_dir: &Path) -> Result<RunSummary> {
    let started = Instant::now();
    let (model, params) = built(spec)?;
    let traj = integrate(&model, &spec.initial, 0.0, &spec.integration)?;
    let mut report = steady_state_metrics(&model, &traj, spec.analysis.tail_fraction);
    let equilibria = find_equilibria(&model, &SearchConfig::default())?;
    if spec.analysis.classify
        && matches!(
            report.kind,
            AttractorKind::LimitCycle | AttractorKind::CapturedRotation
        )
    {
        let ccfg = ClassifyConfig {
            radius: spec.analysis.radius,
            n_probes: spec.analysis.n_probes,
            seed: spec.analysis.seed,
            tail_fraction: spec.analysis.tail_fraction,
            workers: spec.analysis.workers,
        };
        report = classify_attractor(&model, &traj, report, &equilibria, &ccfg)?;
    }
    let ratio = match &spec.analysis.sommerfeld_pair {
        Some(pair) => Some(sommerfeld_ratio(&report, &pair_report(pair)?)?),
        None => None,
    };
    let summary = RunSummary {
        scenario: spec.id.clone(),
        model: spec.model.clone(),
        params,
        initial_state: spec.initial.clone(),
        integration: spec.integration,
        report,
        equilibria,
        sommerfeld_pair: spec.analysis.sommerfeld_pair.clone(),
        sommerfeld_ratio: ratio,
        events: traj.events.len(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };

    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let csv_name = format!("{}.csv", spec.id);
    export_trajectory(&traj, model.names(), &out_dir.join(&csv_name))?;
    export_json(&summary, &out_dir.join(format!("{}.json", spec.id)))?;
    emit_plot_script(
        &out_dir.join(format!("{}_plot.py", spec.id)),
        &csv_name,
        model.names(),
        model.velocity_indices(),
    )?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_id_resolves_and_matches_its_model() {
        for id in BUILTIN_IDS {
            let spec = builtin_scenario(id).unwrap();
            assert_eq!(spec.id, id);
            let (model, _) = build_model(&spec.model, &[]).unwrap();
            assert_eq!(spec.initial.len(), model.dim(), "{id}");
            assert!(spec.overrides.is_empty());
        }
        assert!(builtin_scenario("drill-dc-slow").is_none());
    }

    #[test]
    fn aliases_map_to_the_induction_pair() {
        assert_eq!(
            builtin_scenario("drill-ind-normal").unwrap(),
            builtin_scenario("drill-ind-a").unwrap()
        );
        assert_eq!(
            builtin_scenario("drill-ind-hidden").unwrap(),
            builtin_scenario("drill-ind-b").unwrap()
        );
    }

    #[test]
    fn run_lengths_cover_the_slow_transients() {
        assert_eq!(builtin_scenario("tora-capture").unwrap().integration.t_end, 150.0);
        assert_eq!(builtin_scenario("drill-dc-hidden").unwrap().integration.t_end, 150.0);
        assert_eq!(builtin_scenario("drill-dc-normal").unwrap().integration.t_end, 300.0);
        assert_eq!(builtin_scenario("drill-ind-a").unwrap().integration.t_end, 300.0);
    }

    #[test]
    fn only_the_capture_run_carries_a_ratio_pair() {
        for id in BUILTIN_IDS {
            let spec = builtin_scenario(id).unwrap();
            match id {
                "tora-capture" => {
                    assert_eq!(spec.analysis.sommerfeld_pair.as_deref(), Some("tora-normal"))
                }
                _ => assert_eq!(spec.analysis.sommerfeld_pair, None),
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected_before_integrating() {
        let mut spec = builtin_scenario("drill-dc-hidden").unwrap();
        spec.initial.push(0.0);
        let err = run_scenario(&spec, Path::new("/nonexistent")).unwrap_err();
        assert!(err.to_string().contains("coordinates"), "{err}");
    }

    #[test]
    fn dc_hidden_run_produces_cycle_summary_and_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = builtin_scenario("drill-dc-hidden").unwrap();
        // Fewer probes than the stock 50: this test exercises plumbing, not
        // the classification statistics.
        spec.analysis.n_probes = 4;
        let summary = run_scenario(&spec, dir.path()).unwrap();
        assert_eq!(summary.scenario, "drill-dc-hidden");
        assert_eq!(summary.report.kind, AttractorKind::LimitCycle);
        assert_eq!(
            summary.report.classification,
            crate::analysis::Classification::Hidden
        );
        assert_eq!(summary.report.probes.len(), 4);
        assert!(summary.events > 0);
        assert!(summary.wall_clock_seconds > 0.0);
        for suffix in [".csv", ".json", "_plot.py"] {
            let path = dir.path().join(format!("drill-dc-hidden{suffix}"));
            assert!(path.is_file(), "{path:?}");
        }
        // The summary JSON round-trips exactly, value and bytes both.
        let json_path = dir.path().join("drill-dc-hidden.json");
        let back = crate::io::export::import_summary(&json_path).unwrap();
        assert_eq!(back, summary);
        assert_eq!(
            crate::io::export::to_json_bytes(&back).unwrap(),
            std::fs::read(&json_path).unwrap()
        );
    }

    #[test]
    fn classification_skipped_when_disabled() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = builtin_scenario("drill-dc-hidden").unwrap();
        spec.analysis.classify = false;
        let summary = run_scenario(&spec, dir.path()).unwrap();
        assert!(summary.report.probes.is_empty());
    }
}
