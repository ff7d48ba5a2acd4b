//! Trajectory CSV and summary JSON with exact round-trips.
//!
//! Every float is written as `{:.16e}`: 17 significant digits, enough that
//! parse(format(x)) == x bitwise for every finite f64. Exporting, importing
//! and exporting again is byte-identical, so artifacts can be diffed.
//! Files are written to a sibling temp path and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{Event, EventKind, IntegrationConfig, Trajectory};
use crate::io::scenario::RunSummary;
use crate::state::State;

/// 17-significant-digit scientific form; round-trip exact for finite f64.
pub fn sci17(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write-then-rename so readers never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    std::fs::write(&tmp, bytes).map_err(io_err(path))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

/// One trajectory as CSV: `t,<coordinate names>,event`. Sample rows leave
/// the event field empty; each event adds its own row (state at the event,
/// `kind:surface` in the event field) placed chronologically, after the
/// sample when times coincide.
pub fn export_trajectory(traj: &Trajectory, names: &[&str], path: &Path) -> Result<()> {
    if traj.samples.is_empty() {
        return Err(Error::Domain("cannot export an empty trajectory".into()));
    }
    let mut out = String::new();
    out.push('t');
    for name in names {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",event\n");

    let row = |out: &mut String, t: f64, coords: &[f64], event: &str| {
        out.push_str(&sci17(t));
        for c in coords {
            out.push(',');
            out.push_str(&sci17(*c));
        }
        out.push(',');
        out.push_str(event);
        out.push('\n');
    };

    let mut events = traj.events.iter().peekable();
    for s in &traj.samples {
        while events.peek().is_some_and(|e| e.t < s.t) {
            let e = events.next().expect("peeked");
            row(&mut out, e.t, &e.state, &format!("{}:{}", e.kind.label(), e.surface));
        }
        row(&mut out, s.t, &s.coords, "");
        while events.peek().is_some_and(|e| e.t == s.t) {
            let e = events.next().expect("peeked");
            row(&mut out, e.t, &e.state, &format!("{}:{}", e.kind.label(), e.surface));
        }
    }
    for e in events {
        row(&mut out, e.t, &e.state, &format!("{}:{}", e.kind.label(), e.surface));
    }
    write_atomic(path, out.as_bytes())
}

fn bad_line(line: usize, msg: impl Into<String>) -> Error {
    Error::ConfigAt {
        line,
        msg: msg.into(),
    }
}

fn parse_field(line: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| bad_line(line, format!("not a number: `{field}`")))
}

/// Read an exported trajectory back. Only the geometry survives: the mode
/// history is not serialized and the integration config is the default.
pub fn import_trajectory(path: &Path) -> Result<Trajectory> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(bad_line(1, "empty file, expected a CSV header"));
    };
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "t" || *cols.last().expect("non-empty split") != "event" {
        return Err(bad_line(1, "header must be `t,<coordinates>,event`"));
    }
    let dim = cols.len() - 2;

    let mut samples = Vec::new();
    let mut events = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != dim + 2 {
            return Err(bad_line(
                line,
                format!("expected {} fields, got {}", dim + 2, fields.len()),
            ));
        }
        let t = parse_field(line, fields[0])?;
        let mut coords = Vec::with_capacity(dim);
        for f in &fields[1..=dim] {
            coords.push(parse_field(line, f)?);
        }
        let tag = fields[dim + 1];
        if tag.is_empty() {
            samples.push(
                State::new(t, coords).map_err(|e| bad_line(line, e.to_string()))?,
            );
        } else {
            let (label, surface) = tag
                .split_once(':')
                .ok_or_else(|| bad_line(line, format!("malformed event tag `{tag}`")))?;
            let kind = EventKind::from_label(label)
                .ok_or_else(|| bad_line(line, format!("unknown event kind `{label}`")))?;
            let surface = surface
                .parse::<usize>()
                .map_err(|_| bad_line(line, format!("bad surface index `{surface}`")))?;
            events.push(Event {
                t,
                surface,
                kind,
                state: coords,
            });
        }
    }
    if samples.is_empty() {
        return Err(bad_line(1, "file contains no sample rows"));
    }
    Ok(Trajectory {
        samples,
        events,
        mode_history: Vec::new(),
        config: IntegrationConfig::default(),
    })
}

/// serde_json formatter that writes every float as `{:.16e}`.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize to compact JSON with exact floats, newline-terminated.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Domain(format!("summary serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(buf)
}

pub fn export_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    write_atomic(path, &to_json_bytes(value)?)
}

pub fn import_summary(path: &Path) -> Result<RunSummary> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Config(format!("{}: not a run summary: {e}", path.display()))
    })
}

/// Companion plot script: velocity traces with event markers plus a phase
/// portrait, reading the CSV that sits next to it. Python was chosen so the
/// artifact itself stays free of plotting dependencies.
pub fn emit_plot_script(
    path: &Path,
    csv_name: &str,
    names: &[&str],
    velocities: &[usize],
) -> Result<()> {
    let first_vel = velocities.first().copied().unwrap_or(0);
    let script = format!(
        r#"#!/usr/bin/env python3
"""Plot {csv} : velocity traces and a phase portrait."""
import csv
import matplotlib.pyplot as plt

CSV = "{csv}"
NAMES = {names:?}
VELOCITIES = {velocities:?}

t, rows, events = [], [], []
with open(CSV, newline="") as fh:
    reader = csv.reader(fh)
    next(reader)
    for row in reader:
        if row[-1]:
            events.append(float(row[0]))
        else:
            t.append(float(row[0]))
            rows.append([float(x) for x in row[1:-1]])

cols = list(zip(*rows))
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11.0, 4.5))
for i in VELOCITIES:
    ax1.plot(t, cols[i], lw=0.9, label=NAMES[i])
for et in events:
    ax1.axvline(et, color="0.88", lw=0.5, zorder=0)
ax1.set_xlabel("t [s]")
ax1.set_ylabel("velocity [rad/s]")
ax1.legend(loc="best")
ax2.plot(cols[0], cols[{first_vel}], lw=0.7)
ax2.set_xlabel(NAMES[0])
ax2.set_ylabel(NAMES[{first_vel}])
fig.tight_layout()
out = CSV.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=160)
print("wrote", out)
"#,
        csv = csv_name,
        names = names,
        velocities = velocities,
        first_vel = first_vel,
    );
    write_atomic(path, script.as_bytes())
}
