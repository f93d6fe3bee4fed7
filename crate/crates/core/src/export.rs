//! CSV and JSON writers for kernels, gains, trajectories and effort curves.
//!
//! CSV files carry a header row and print floats with 17 significant digits,
//! so every value survives a round trip. JSON objects are built from
//! `serde_json` maps, whose keys come out sorted.

use std::io::{Read, Write};

use serde_json::{json, Value};

use crate::compare::{EffortCurve, JNorms};
use crate::domain::{GainFunction, KernelField, Provenance};
use crate::sim::Trajectory;
use crate::{Error, Result};

/// Float formatting used by every CSV writer.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

/// Kernel values inside `𝒯`, one row per node pair: `x, xi, K`.
pub fn write_kernel_csv<W: Write>(out: W, field: &KernelField) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["x", "xi", "K"])?;
    let grid = *field.grid();
    let base = *grid.base();
    for i in 0..grid.n() {
        for j in grid.row_range(i) {
            w.write_record([
                fmt_f64(base.node(i)),
                fmt_f64(base.node(j)),
                fmt_f64(field.get(i, j)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Grid metadata plus the dense row-major values (zeros outside `𝒯`).
pub fn kernel_json(name: &str, field: &KernelField, provenance: Provenance) -> Value {
    let base = field.interval();
    json!({
        "component": name,
        "provenance": provenance,
        "half_length": base.half_length(),
        "n": base.len(),
        "layout": "row-major, row = x, column = xi",
        "values": field.values(),
    })
}

/// Gains sharing one grid: `xi` followed by one column per gain.
pub fn write_gains_csv<W: Write>(out: W, gains: &[(&str, &GainFunction)]) -> Result<()> {
    let Some((_, first)) = gains.first() else {
        return Err(Error::Config("no gains to export".into()));
    };
    let grid = first.grid;
    if gains.iter().any(|(_, g)| g.grid != grid) {
        return Err(Error::GridMismatch("exported gains must share a grid".into()));
    }
    let mut w = writer(out);
    let mut header = vec!["xi".to_string()];
    header.extend(gains.iter().map(|(n, _)| n.to_string()));
    w.write_record(&header)?;
    for k in 0..grid.len() {
        let mut row = vec![fmt_f64(grid.node(k))];
        row.extend(gains.iter().map(|(_, g)| fmt_f64(g.samples[k])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Long format: `t, x, field, value`.
pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["t", "x", "field", "value"])?;
    let nodes = traj.grid.nodes();
    let xs: Vec<String> = nodes.iter().map(|&x| fmt_f64(x)).collect();
    for (t, snap) in traj.times.iter().zip(&traj.snapshots) {
        let t = fmt_f64(*t);
        for (name, values) in traj.field_names.iter().zip(snap) {
            for (x, v) in xs.iter().zip(values) {
                w.write_record([t.as_str(), x.as_str(), name, &fmt_f64(*v)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Norm and actuator histories with the caller's parameters attached.
pub fn trajectory_json(traj: &Trajectory, parameters: Value) -> Value {
    let l2: Vec<f64> = traj.norms.iter().map(|n| n.l2).collect();
    let sup: Vec<f64> = traj.norms.iter().map(|n| n.sup).collect();
    let u1: Vec<f64> = traj.actuators.iter().map(|a| a[0]).collect();
    let u2: Vec<f64> = traj.actuators.iter().map(|a| a[1]).collect();
    json!({
        "class": traj.class,
        "n": traj.grid.len(),
        "half_length": traj.grid.half_length(),
        "dt": traj.dt,
        "steps": traj.steps,
        "fields": traj.field_names,
        "times": traj.times,
        "norms": { "l2": l2, "sup": sup },
        "actuators": { "U1": u1, "U2": u2 },
        "summary": traj.summary(),
        "parameters": parameters,
    })
}

const EFFORT_HEADER: [&str; 4] = ["delta", "J1_literal", "J1_shifted", "J2"];

pub fn write_effort_csv<W: Write>(out: W, curve: &EffortCurve) -> Result<()> {
    let mut w = writer(out);
    w.write_record(EFFORT_HEADER)?;
    for p in &curve.points {
        w.write_record([p.delta, p.j1_literal, p.j1_shifted, p.j2].map(fmt_f64))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_effort_csv`]. Crossovers are not part of
/// the table and come back as `None`.
pub fn read_effort_csv<R: Read>(input: R) -> Result<EffortCurve> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(EFFORT_HEADER) {
        return Err(Error::Config(format!("unexpected effort-curve header {header:?}")));
    }
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut v = [0.0; 4];
        for (slot, text) in v.iter_mut().zip(rec.iter()) {
            *slot = text
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("bad number {text:?}: {e}")))?;
        }
        points.push(JNorms {
            delta: v[0],
            j1_literal: v[1],
            j1_shifted: v[2],
            j2: v[3],
        });
    }
    Ok(EffortCurve::from_points(points))
}

pub fn effort_json(curve: &EffortCurve, parameters: Value) -> Value {
    json!({
        "points": curve.points.len(),
        "crossover": {
            "literal": curve.crossover_literal,
            "shifted": curve.crossover_shifted,
        },
        "parameters": parameters,
    })
}
