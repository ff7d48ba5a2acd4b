//! Sectioned key=value run configuration.
//!
//! Grammar: `[section]` headers followed by `key = value` lines; `#` starts
//! a comment. Sections are `[model]`, `[params]`, `[initial]`,
//! `[integration]`, `[analysis]`. The `[model]` section must come first,
//! since legal parameter and coordinate names depend on the chosen model.
//! Unknown keys are hard errors with a suggestion; typos never silently
//! vanish into defaults.

use crate::error::{Error, Result};
use crate::integrator::IntegrationConfig;
use crate::io::scenario::{builtin_scenario, default_t_end, BUILTIN_IDS};
use crate::model::SystemModel;
use crate::models::{build_model, param_keys, MODEL_NAMES};

/// One swept axis of a basin grid: coordinate name and a linear range.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub coord: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub tail_fraction: f64,
    /// Probe non-equilibrium attractors for the hidden / self-excited verdict.
    pub classify: bool,
    pub radius: f64,
    pub n_probes: usize,
    pub seed: u64,
    pub workers: usize,
    /// Built-in scenario run alongside this one as the normal-operation
    /// reference for the rotor speed ratio.
    pub sommerfeld_pair: Option<String>,
    pub basin_x: Option<AxisSpec>,
    pub basin_y: Option<AxisSpec>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            tail_fraction: 0.25,
            classify: true,
            radius: 0.1,
            n_probes: 50,
            seed: 42,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            sommerfeld_pair: None,
            basin_x: None,
            basin_y: None,
        }
    }
}

/// Everything needed to reproduce one run: the model with its overrides,
/// where it starts, how long and how tightly to integrate, and which
/// post-processing to apply.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    /// Names output artifacts; a built-in id or the model name for ad-hoc
    /// configs.
    pub id: String,
    pub model: String,
    pub overrides: Vec<(String, f64)>,
    pub initial: Vec<f64>,
    pub integration: IntegrationConfig,
    pub analysis: AnalysisOptions,
}

const SECTIONS: [&str; 5] = ["model", "params", "initial", "integration", "analysis"];
const MODEL_KEYS: [&str; 3] = ["scenario", "name", "id"];
const INTEGRATION_KEYS: [&str; 6] = [
    "rel_tol",
    "abs_tol",
    "event_tol",
    "max_step",
    "stick_epsilon",
    "t_end",
];
const ANALYSIS_KEYS: [&str; 9] = [
    "tail_fraction",
    "classify",
    "radius",
    "n_probes",
    "seed",
    "workers",
    "sommerfeld_pair",
    "basin_x",
    "basin_y",
];

/// Physics vocabulary mapped to the parameter keys that implement it, so a
/// misspelled concept still gets a useful pointer.
const SYNONYMS: [(&str, &[&str]); 6] = [
    ("stiffness", &["k_theta", "k"]),
    ("damping", &["b", "b_u", "b_l", "k1"]),
    ("inertia", &["J", "J_u", "J_l", "M", "m"]),
    ("torque", &["T_su", "T_0", "T_sl", "T_pl", "u"]),
    ("voltage", &["v", "u"]),
    ("tolerance", &["rel_tol", "abs_tol", "event_tol"]),
];

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(!ca.eq_ignore_ascii_case(&cb));
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Best guess for a mistyped key: nearest legal key, else a legal key
/// reachable through the physics synonym table.
fn suggest(key: &str, legal: &[&str]) -> Option<String> {
    let near = legal
        .iter()
        .map(|&l| (levenshtein(key, l), l))
        .min_by_key(|&(d, _)| d)
        .filter(|&(d, _)| d <= 2)
        .map(|(_, l)| l);
    if let Some(l) = near {
        return Some(format!("did you mean `{l}`?"));
    }
    for (word, candidates) in SYNONYMS {
        if levenshtein(key, word) <= 2 {
            let hits: Vec<&str> = candidates
                .iter()
                .filter(|c| legal.contains(*c))
                .copied()
                .collect();
            if !hits.is_empty() {
                return Some(format!("did you mean `{}` ({word})?", hits.join("` or `")));
            }
        }
    }
    None
}

fn unknown_key(line: usize, key: &str, section: &str, legal: &[&str]) -> Error {
    let hint = suggest(key, legal).map_or(String::new(), |s| format!("; {s}"));
    Error::ConfigAt {
        line,
        msg: format!("unknown key `{key}` in [{section}]{hint}"),
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|_| Error::ConfigAt {
        line,
        msg: format!("value for `{key}` is not a number: `{value}`"),
    })
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value.parse::<usize>().map_err(|_| Error::ConfigAt {
        line,
        msg: format!("value for `{key}` is not a non-negative integer: `{value}`"),
    })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::ConfigAt {
            line,
            msg: format!("value for `{key}` must be `true` or `false`, got `{value}`"),
        }),
    }
}

/// `coord:lo:hi:n`, e.g. `theta_dot:0:60:25`.
fn parse_axis(line: usize, key: &str, value: &str, names: &[&'static str]) -> Result<AxisSpec> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() != 4 {
        return Err(Error::ConfigAt {
            line,
            msg: format!("value for `{key}` must be `coord:lo:hi:n`, got `{value}`"),
        });
    }
    if !names.contains(&parts[0]) {
        let hint = suggest(parts[0], names).map_or(String::new(), |s| format!("; {s}"));
        return Err(Error::ConfigAt {
            line,
            msg: format!("`{}` is not a coordinate of this model{hint}", parts[0]),
        });
    }
    Ok(AxisSpec {
        coord: parts[0].to_string(),
        lo: parse_f64(line, key, parts[1])?,
        hi: parse_f64(line, key, parts[2])?,
        n: parse_usize(line, key, parts[3])?,
    })
}

/// Model-dependent vocabulary resolved once the [model] section is complete.
struct ModelContext {
    spec: ScenarioSpec,
    params: Vec<&'static str>,
    names: Vec<&'static str>,
    t_end_explicit: bool,
}

fn model_context(line: usize, id: Option<String>, scenario: Option<&str>, name: Option<&str>) -> Result<ModelContext> {
    let mut spec = match (scenario, name) {
        (Some(s), n) => {
            let built = builtin_scenario(s).ok_or_else(|| Error::ConfigAt {
                line,
                msg: format!(
                    "unknown scenario `{s}`; built-ins are {}",
                    BUILTIN_IDS.join(", ")
                ),
            })?;
            if let Some(n) = n {
                if n != built.model {
                    return Err(Error::ConfigAt {
                        line,
                        msg: format!(
                            "scenario `{s}` runs model `{}`, not `{n}`",
                            built.model
                        ),
                    });
                }
            }
            built
        }
        (None, Some(n)) => {
            if !MODEL_NAMES.contains(&n) {
                let hint = suggest(n, &MODEL_NAMES).map_or(String::new(), |s| format!("; {s}"));
                return Err(Error::ConfigAt {
                    line,
                    msg: format!("unknown model `{n}`{hint}"),
                });
            }
            let (model, _) = build_model(n, &[])?;
            ScenarioSpec {
                id: n.to_string(),
                model: n.to_string(),
                overrides: Vec::new(),
                initial: vec![0.0; model.dim()],
                integration: IntegrationConfig {
                    t_end: default_t_end(n),
                    ..IntegrationConfig::default()
                },
                analysis: AnalysisOptions::default(),
            }
        }
        (None, None) => {
            return Err(Error::ConfigAt {
                line,
                msg: "[model] must set `scenario` or `name`".into(),
            })
        }
    };
    if let Some(id) = id {
        spec.id = id;
    }
    let (model, _) = build_model(&spec.model, &[])?;
    Ok(ModelContext {
        params: param_keys(&spec.model)?,
        names: model.names().to_vec(),
        spec,
        t_end_explicit: false,
    })
}

/// Parse a run configuration. Every error carries the offending line.
pub fn parse_config(text: &str) -> Result<ScenarioSpec> {
    let mut section: Option<String> = None;
    // [model] keys are buffered until the section ends so their order
    // within it does not matter.
    let mut m_scenario: Option<String> = None;
    let mut m_name: Option<String> = None;
    let mut m_id: Option<String> = None;
    let mut m_line = 0;
    let mut ctx: Option<ModelContext> = None;

    let finish_model = |line: usize,
                        ctx: &mut Option<ModelContext>,
                        sc: &Option<String>,
                        nm: &Option<String>,
                        id: &Option<String>|
     -> Result<()> {
        if ctx.is_none() {
            *ctx = Some(model_context(line, id.clone(), sc.as_deref(), nm.as_deref())?);
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }

        if let Some(bare) = content.strip_prefix('[') {
            let Some(sect) = bare.strip_suffix(']').map(str::trim) else {
                return Err(Error::ConfigAt {
                    line,
                    msg: format!("malformed section header `{content}`"),
                });
            };
            if !SECTIONS.contains(&sect) {
                let hint = suggest(sect, &SECTIONS).map_or(String::new(), |s| format!("; {s}"));
                return Err(Error::ConfigAt {
                    line,
                    msg: format!("unknown section [{sect}]{hint}"),
                });
            }
            if section.as_deref() == Some("model") {
                finish_model(m_line, &mut ctx, &m_scenario, &m_name, &m_id)?;
            }
            if sect != "model" && ctx.is_none() {
                return Err(Error::ConfigAt {
                    line,
                    msg: format!("[{sect}] before [model]; declare the model first"),
                });
            }
            if sect == "model" {
                m_line = line;
            }
            section = Some(sect.to_string());
            continue;
        }

        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::ConfigAt {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let Some(sect) = section.as_deref() else {
            return Err(Error::ConfigAt {
                line,
                msg: format!("`{key}` appears before any [section] header"),
            });
        };

        match sect {
            "model" => {
                if ctx.is_some() {
                    return Err(Error::ConfigAt {
                        line,
                        msg: "the model is already fixed; [model] settings must \
                              precede every other section"
                            .into(),
                    });
                }
                m_line = line;
                match key {
                    "scenario" => m_scenario = Some(value.to_string()),
                    "name" => m_name = Some(value.to_string()),
                    "id" => m_id = Some(value.to_string()),
                    _ => return Err(unknown_key(line, key, "model", &MODEL_KEYS)),
                }
            }
            "params" => {
                let c = ctx.as_mut().expect("checked at section header");
                if !c.params.contains(&key) {
                    return Err(unknown_key(line, key, "params", &c.params));
                }
                let v = parse_f64(line, key, value)?;
                c.spec.overrides.push((key.to_string(), v));
            }
            "initial" => {
                let c = ctx.as_mut().expect("checked at section header");
                let Some(pos) = c.names.iter().position(|&n| n == key) else {
                    return Err(unknown_key(line, key, "initial", &c.names));
                };
                c.spec.initial[pos] = parse_f64(line, key, value)?;
            }
            "integration" => {
                let c = ctx.as_mut().expect("checked at section header");
                let v = parse_f64(line, key, value)?;
                let cfg = &mut c.spec.integration;
                match key {
                    "rel_tol" => cfg.rel_tol = v,
                    "abs_tol" => cfg.abs_tol = v,
                    "event_tol" => cfg.event_tol = v,
                    "max_step" => cfg.max_step = v,
                    "stick_epsilon" => cfg.stick_epsilon = v,
                    "t_end" => {
                        cfg.t_end = v;
                        c.t_end_explicit = true;
                    }
                    _ => return Err(unknown_key(line, key, "integration", &INTEGRATION_KEYS)),
                }
            }
            "analysis" => {
                let c = ctx.as_mut().expect("checked at section header");
                let a = &mut c.spec.analysis;
                match key {
                    "tail_fraction" => a.tail_fraction = parse_f64(line, key, value)?,
                    "classify" => a.classify = parse_bool(line, key, value)?,
                    "radius" => a.radius = parse_f64(line, key, value)?,
                    "n_probes" => a.n_probes = parse_usize(line, key, value)?,
                    "seed" => {
                        a.seed = value.parse::<u64>().map_err(|_| Error::ConfigAt {
                            line,
                            msg: format!("value for `seed` is not a non-negative integer: `{value}`"),
                        })?
                    }
                    "workers" => {
                        let w = parse_usize(line, key, value)?;
                        if w == 0 {
                            return Err(Error::ConfigAt {
                                line,
                                msg: "workers must be at least 1".into(),
                            });
                        }
                        a.workers = w;
                    }
                    "sommerfeld_pair" => {
                        if builtin_scenario(value).is_none() {
                            return Err(Error::ConfigAt {
                                line,
                                msg: format!(
                                    "sommerfeld_pair `{value}` is not a built-in scenario; \
                                     built-ins are {}",
                                    BUILTIN_IDS.join(", ")
                                ),
                            });
                        }
                        a.sommerfeld_pair = Some(value.to_string());
                    }
                    "basin_x" => a.basin_x = Some(parse_axis(line, key, value, &c.names)?),
                    "basin_y" => a.basin_y = Some(parse_axis(line, key, value, &c.names)?),
                    _ => return Err(unknown_key(line, key, "analysis", &ANALYSIS_KEYS)),
                }
            }
            _ => unreachable!("section names validated at the header"),
        }
    }

    if section.as_deref() == Some("model") {
        finish_model(m_line, &mut ctx, &m_scenario, &m_name, &m_id)?;
    }
    let ctx = ctx.ok_or_else(|| Error::Config("config declares no [model] section".into()))?;
    let spec = ctx.spec;
    spec.integration.validate()?;
    if !(spec.analysis.tail_fraction > 0.0 && spec.analysis.tail_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "tail_fraction must lie in (0, 1], got {}",
            spec.analysis.tail_fraction
        )));
    }
    if !(spec.analysis.radius > 0.0) || !spec.analysis.radius.is_finite() {
        return Err(Error::Config(format!(
            "radius must be positive and finite, got {}",
            spec.analysis.radius
        )));
    }
    if spec.analysis.n_probes == 0 {
        return Err(Error::Config("n_probes must be at least 1".into()));
    }
    Ok(spec)
}
