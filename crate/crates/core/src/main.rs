//! Command-line front end: run scenarios, scan basins of attraction,
//! classify attractors, list the built-ins.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use torsim::error::{Error, Result};
use torsim::io::{
    builtin_scenario, export_json, parse_config, run_scenario, AxisSpec, RunSummary,
    ScenarioSpec, BUILTIN_IDS,
};
use torsim::models::build_model;
use torsim::{basin_scan, AttractorKind, Classification, GridSpec, SystemModel};

#[derive(Parser)]
#[command(
    name = "torsim",
    version,
    about = "Event-driven simulation of dry-friction drive trains and their hidden attractors"
)]
struct Cli {
    /// Directory receiving run artifacts.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Override the probe RNG seed of the target spec.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the worker-thread count for probing and scans.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Override the simulated end time in seconds.
    #[arg(long, global = true)]
    t_end: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate a scenario and write trajectory CSV, summary JSON and a
    /// plot script.
    Run {
        /// Built-in scenario id or path to a config file.
        target: String,
    },
    /// Label a two-coordinate grid of initial conditions by the attractor
    /// each one reaches.
    Scan {
        /// Built-in scenario id or path to a config file.
        target: String,
        /// X axis as `coord:lo:hi:n`; falls back to basin_x in [analysis].
        #[arg(long)]
        x: Option<String>,
        /// Y axis as `coord:lo:hi:n`; falls back to basin_y in [analysis].
        #[arg(long)]
        y: Option<String>,
    },
    /// Run a scenario with equilibrium-neighbourhood probing forced on.
    Classify {
        /// Built-in scenario id or path to a config file.
        target: String,
    },
    /// List the built-in scenarios.
    List,
}

fn resolve_target(target: &str) -> Result<ScenarioSpec> {
    let path = Path::new(target);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: target.to_string(),
            source,
        })?;
        return parse_config(&text);
    }
    builtin_scenario(target).ok_or_else(|| {
        Error::Config(format!(
            "`{target}` is neither a config file nor a built-in scenario; \
             built-ins: {}",
            BUILTIN_IDS.join(", ")
        ))
    })
}

fn apply_flags(spec: &mut ScenarioSpec, cli: &Cli) {
    if let Some(seed) = cli.seed {
        spec.analysis.seed = seed;
    }
    if let Some(workers) = cli.workers {
        spec.analysis.workers = workers.max(1);
    }
    if let Some(t_end) = cli.t_end {
        spec.integration.t_end = t_end;
    }
}

fn kind_name(kind: &AttractorKind) -> &'static str {
    match kind {
        AttractorKind::Equilibrium => "equilibrium",
        AttractorKind::LimitCycle => "limit_cycle",
        AttractorKind::CapturedRotation => "captured_rotation",
        AttractorKind::Unresolved => "unresolved",
    }
}

fn print_summary(summary: &RunSummary, out_dir: &Path) {
    println!(
        "scenario {} ({}), {} s simulated in {:.2} s, {} events",
        summary.scenario,
        summary.model,
        summary.integration.t_end,
        summary.wall_clock_seconds,
        summary.events
    );
    let r = &summary.report;
    let means: Vec<String> = r
        .tail_mean_velocities
        .iter()
        .map(|v| format!("{v:.4}"))
        .collect();
    match r.period_estimate {
        Some(p) => println!(
            "tail: {}, period {:.4} s, velocity means [{}], amplitude {:.4}",
            kind_name(&r.kind),
            p,
            means.join(", "),
            r.amplitude
        ),
        None => println!(
            "tail: {}, velocity means [{}], amplitude {:.4}",
            kind_name(&r.kind),
            means.join(", "),
            r.amplitude
        ),
    }
    let stable = summary
        .equilibria
        .iter()
        .filter(|e| e.stable == Some(true))
        .count();
    println!(
        "equilibria: {} found, {} stable",
        summary.equilibria.len(),
        stable
    );
    match r.classification {
        Classification::NotApplicable => {}
        Classification::Hidden | Classification::SelfExcited => {
            let matched = r
                .probes
                .iter()
                .filter(|p| p.outcome == torsim::analysis::ProbeOutcome::Matched)
                .count();
            let label = if r.classification == Classification::Hidden {
                "hidden"
            } else {
                "self-excited"
            };
            println!(
                "classification: {label} ({matched}/{} probes reached this attractor)",
                r.probes.len()
            );
        }
    }
    if let (Some(pair), Some(ratio)) = (&summary.sommerfeld_pair, summary.sommerfeld_ratio) {
        println!("rotor speed ratio vs {pair}: {ratio:.4}");
    }
    println!(
        "artifacts: {}",
        out_dir.join(format!("{}.{{csv,json,_plot.py}}", summary.scenario)).display()
    );
}

fn cmd_run(cli: &Cli, target: &str, force_classify: bool) -> Result<()> {
    let mut spec = resolve_target(target)?;
    apply_flags(&mut spec, cli);
    if force_classify {
        spec.analysis.classify = true;
    }
    let summary = run_scenario(&spec, &cli.out_dir)?;
    print_summary(&summary, &cli.out_dir);
    Ok(())
}

fn parse_axis_flag(flag: &str) -> Result<AxisSpec> {
    let parts: Vec<&str> = flag.split(':').collect();
    let err = || {
        Error::Config(format!(
            "axis must be `coord:lo:hi:n`, e.g. `omega_u:0:10:20`, got `{flag}`"
        ))
    };
    if parts.len() != 4 {
        return Err(err());
    }
    Ok(AxisSpec {
        coord: parts[0].to_string(),
        lo: parts[1].parse().map_err(|_| err())?,
        hi: parts[2].parse().map_err(|_| err())?,
        n: parts[3].parse().map_err(|_| err())?,
    })
}

fn coord_index(names: &[&str], coord: &str) -> Result<usize> {
    names.iter().position(|n| *n == coord).ok_or_else(|| {
        Error::Config(format!(
            "`{coord}` is not a coordinate of this model; coordinates: {}",
            names.join(", ")
        ))
    })
}

fn cmd_scan(cli: &Cli, target: &str, x: Option<&str>, y: Option<&str>) -> Result<()> {
    let mut spec = resolve_target(target)?;
    apply_flags(&mut spec, cli);
    let x = match (x, spec.analysis.basin_x.take()) {
        (Some(flag), _) => parse_axis_flag(flag)?,
        (None, Some(axis)) => axis,
        (None, None) => {
            return Err(Error::Config(
                "scan needs an x axis: pass --x coord:lo:hi:n or set basin_x in [analysis]"
                    .into(),
            ))
        }
    };
    let y = match (y, spec.analysis.basin_y.take()) {
        (Some(flag), _) => parse_axis_flag(flag)?,
        (None, Some(axis)) => axis,
        (None, None) => {
            return Err(Error::Config(
                "scan needs a y axis: pass --y coord:lo:hi:n or set basin_y in [analysis]"
                    .into(),
            ))
        }
    };
    let (model, _) = build_model(&spec.model, &spec.overrides)?;
    let grid = GridSpec {
        x_coord: coord_index(model.names(), &x.coord)?,
        x_lo: x.lo,
        x_hi: x.hi,
        nx: x.n,
        y_coord: coord_index(model.names(), &y.coord)?,
        y_lo: y.lo,
        y_hi: y.hi,
        ny: y.n,
        base_state: spec.initial.clone(),
    };
    let map = basin_scan(
        &model,
        grid,
        &spec.integration,
        spec.analysis.tail_fraction,
        spec.analysis.workers,
    )?;
    std::fs::create_dir_all(&cli.out_dir).map_err(|source| Error::Io {
        path: cli.out_dir.display().to_string(),
        source,
    })?;
    let out = cli.out_dir.join(format!("{}-basin.json", spec.id));
    export_json(&map, &out)?;

    println!(
        "scanned {}x{} cells of {} over ({}, {})",
        map.spec.nx, map.spec.ny, spec.model, x.coord, y.coord
    );
    for (i, class) in map.attractors.iter().enumerate() {
        let cells = map.labels.iter().filter(|l| **l == Some(i)).count();
        let means: Vec<String> = class
            .tail_mean_velocities
            .iter()
            .map(|v| format!("{v:.4}"))
            .collect();
        println!(
            "  attractor {i}: {} velocity means [{}], {} cells",
            kind_name(&class.kind),
            means.join(", "),
            cells
        );
    }
    let unresolved = map.labels.iter().filter(|l| l.is_none()).count();
    if unresolved > 0 {
        println!("  unresolved: {unresolved} cells");
    }
    println!("basin map: {}", out.display());
    Ok(())
}

fn cmd_list() {
    println!("built-in scenarios:");
    let blurbs: [(&str, &str); 6] = [
        ("tora-capture", "rotor spun up from rest, captured by the cart resonance"),
        ("tora-normal", "rotor started above resonance, runs out to no-load speed"),
        ("drill-dc-hidden", "DC drill from rest: stick-slip limit cycle"),
        ("drill-dc-normal", "DC drill at operating speed: smooth equilibrium"),
        ("drill-ind-a", "induction drill from synchronous spin-up: steady slip"),
        ("drill-ind-b", "induction drill with the bit at physical rest: stick-slip"),
    ];
    for (id, blurb) in blurbs {
        let spec = builtin_scenario(id).expect("listed id is built in");
        println!("  {id:<16} {:<16} t_end {:>5} s  {blurb}", spec.model, spec.integration.t_end);
    }
    println!("aliases: drill-ind-normal = drill-ind-a, drill-ind-hidden = drill-ind-b");
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Run { target } => cmd_run(cli, target, false),
        Cmd::Classify { target } => cmd_run(cli, target, true),
        Cmd::Scan { target, x, y } => cmd_scan(cli, target, x.as_deref(), y.as_deref()),
        Cmd::List => {
            cmd_list();
            Ok(())
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too; those are not errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = dispatch(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code() as i32);
    }
}
