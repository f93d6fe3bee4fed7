use serde::Serialize;

use super::{fitted_decay_rate, PlantClass, Trajectory};
use crate::domain::{IntervalGrid, KernelField};
use crate::kernel_hyp::{HypKernel, HypPlant};
use crate::kernel_rd::{RdKernel, RdPlant};
use crate::{Error, Result};

/// Kernel and plant against which a trajectory is checked.
#[derive(Debug, Clone, Copy)]
pub enum TargetSpec<'a> {
    /// Target `w_t = ε w_xx`, `w(±L) = 0`.
    Rd {
        plant: &'a RdPlant,
        kernel: &'a RdKernel,
    },
    /// Target `α_t = -ε α_x + c₁ α`, `β_t = ε β_x + c₄ β`, `α(-L) = β(L) = 0`.
    /// For wave trajectories pass the reduced plant and its kernel.
    Hyp {
        plant: &'a HypPlant,
        kernel: &'a HypKernel,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetCheck {
    pub times: Vec<f64>,
    /// `transformed[record][component][node]`: `[w]` or `[α, β]`.
    pub transformed: Vec<Vec<Vec<f64>>>,
    /// Transformed boundary traces `[left, right]` relative to the state's
    /// sup norm (`|w(±L)|`, or `|α(-L)|` and `|β(L)|`).
    pub boundary_residual: Vec<[f64; 2]>,
    /// Maximum of `boundary_residual` over records after the first.
    pub max_boundary_residual: f64,
    /// Discrete target-equation residual between consecutive records,
    /// relative to the transformed sup norm.
    pub dynamics_residual: Vec<f64>,
    pub max_dynamics_residual: f64,
    pub transformed_l2: Vec<f64>,
    pub transformed_sup: Vec<f64>,
    /// Fitted exponential decay rate of the transformed `L²` norm over the
    /// second half of the run.
    pub decay_rate: Option<f64>,
}

/// Applies the backstepping transformation to every record and measures
/// how well the result satisfies the target system.
pub fn target_check(traj: &Trajectory, spec: TargetSpec<'_>) -> Result<TargetCheck> {
    let grid = traj.grid;
    let n = grid.len();
    let weights = grid.weights();
    let mut out = TargetCheck {
        times: traj.times.clone(),
        transformed: Vec::with_capacity(traj.len()),
        boundary_residual: Vec::with_capacity(traj.len()),
        max_boundary_residual: 0.0,
        dynamics_residual: Vec::new(),
        max_dynamics_residual: 0.0,
        transformed_l2: Vec::new(),
        transformed_sup: Vec::new(),
        decay_rate: None,
    };
    let (state_fields, rd): (Vec<usize>, bool) = match (traj.class, &spec) {
        (PlantClass::ReactionDiffusion, TargetSpec::Rd { kernel, .. }) => {
            check_grid(kernel.field.interval(), &grid)?;
            (vec![0], true)
        }
        (PlantClass::Hyperbolic, TargetSpec::Hyp { kernel, .. }) => {
            check_grid(kernel.uu.interval(), &grid)?;
            (vec![0, 1], false)
        }
        (PlantClass::Wave, TargetSpec::Hyp { kernel, .. }) => {
            check_grid(kernel.uu.interval(), &grid)?;
            // reduced state (u, v)_hyp = (v, w)
            (vec![2, 1], false)
        }
        _ => {
            return Err(Error::Config(
                "target specification does not match the trajectory class".into(),
            ))
        }
    };

    for (k, fields) in traj.snapshots.iter().enumerate() {
        let state: Vec<&[f64]> = state_fields.iter().map(|&f| fields[f].as_slice()).collect();
        let sup_state = state
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let comps = match &spec {
            TargetSpec::Rd { kernel, .. } => {
                vec![transform(state[0], &[(&kernel.field, state[0])], &grid)]
            }
            TargetSpec::Hyp { kernel, .. } => vec![
                transform(state[0], &[(&kernel.uu, state[0]), (&kernel.uv, state[1])], &grid),
                transform(state[1], &[(&kernel.vu, state[0]), (&kernel.vv, state[1])], &grid),
            ],
        };
        let (left, right) = if rd {
            (comps[0][0].abs(), comps[0][n - 1].abs())
        } else {
            (comps[0][0].abs(), comps[1][n - 1].abs())
        };
        let scale = if sup_state > 0.0 { sup_state } else { 1.0 };
        let res = [left / scale, right / scale];
        if k > 0 {
            out.max_boundary_residual = out.max_boundary_residual.max(res[0]).max(res[1]);
        }
        out.boundary_residual.push(res);
        let mut sq = 0.0;
        let mut sup = 0.0_f64;
        for c in &comps {
            for (w, v) in weights.iter().zip(c) {
                sq += w * v * v;
                sup = sup.max(v.abs());
            }
        }
        out.transformed_l2.push(sq.sqrt());
        out.transformed_sup.push(sup);
        out.transformed.push(comps);
    }

    for k in 1..out.transformed.len() {
        let dt = out.times[k] - out.times[k - 1];
        let (a, b) = (&out.transformed[k - 1], &out.transformed[k]);
        let r = match &spec {
            TargetSpec::Rd { plant, .. } => heat_residual(&a[0], &b[0], dt, plant.epsilon, &grid),
            TargetSpec::Hyp { plant, .. } => transport_residual(a, b, dt, plant, &grid),
        };
        let scale = out.transformed_sup[k].max(out.transformed_sup[k - 1]);
        let rel = if scale > 0.0 { r / scale } else { r };
        out.max_dynamics_residual = out.max_dynamics_residual.max(rel);
        out.dynamics_residual.push(rel);
    }
    let t_end = out.times.last().copied().unwrap_or(0.0);
    out.decay_rate = fitted_decay_rate(&out.times, &out.transformed_l2, 0.5 * t_end);
    Ok(out)
}

fn check_grid(kernel: &IntervalGrid, traj: &IntervalGrid) -> Result<()> {
    if kernel != traj {
        return Err(Error::GridMismatch(format!(
            "kernel on {} nodes, trajectory on {} nodes",
            kernel.len(),
            traj.len()
        )));
    }
    Ok(())
}

/// `s(x) - Σ ∫_{-x}^{x} K(x, ξ) f(ξ) dξ` with the oriented trapezoid rule.
fn transform(
    s: &[f64],
    terms: &[(&KernelField, &[f64])],
    grid: &IntervalGrid,
) -> Vec<f64> {
    let n = grid.len();
    let c = grid.center();
    let h = grid.spacing();
    (0..n)
        .map(|i| {
            let lo = i.min(grid.mirror(i));
            let hi = i.max(grid.mirror(i));
            let sign = if i >= c { 1.0 } else { -1.0 };
            let mut integral = 0.0;
            for (k, f) in terms {
                let row = k.row(i);
                if hi > lo {
                    let mut acc = 0.5 * (row[lo] * f[lo] + row[hi] * f[hi]);
                    for j in lo + 1..hi {
                        acc += row[j] * f[j];
                    }
                    integral += h * acc;
                }
            }
            s[i] - sign * integral
        })
        .collect()
}

/// Max interior residual of the Crank–Nicolson heat step.
fn heat_residual(a: &[f64], b: &[f64], dt: f64, eps: f64, grid: &IntervalGrid) -> f64 {
    let n = a.len();
    let h2 = grid.spacing().powi(2);
    (1..n - 1)
        .map(|j| {
            let lap = |f: &[f64]| (f[j - 1] - 2.0 * f[j] + f[j + 1]) / h2;
            let r = (b[j] - a[j]) / dt - 0.5 * eps * (lap(a) + lap(b));
            (r * dt).abs()
        })
        .fold(0.0, f64::max)
}

/// Max residual of the transport target along unit-CFL characteristics.
fn transport_residual(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    dt: f64,
    plant: &HypPlant,
    grid: &IntervalGrid,
) -> f64 {
    let n = grid.len();
    let nodes = grid.nodes();
    let c1 = plant.c[0].sample_all(&nodes);
    let c4 = plant.c[3].sample_all(&nodes);
    let unit = (grid.spacing() / plant.epsilon - dt).abs() < 1e-9 * dt;
    if !unit {
        return f64::NAN;
    }
    let mut r = 0.0_f64;
    for j in 1..n {
        let ra = b[0][j] - a[0][j - 1] - 0.5 * dt * (c1[j] * b[0][j] + c1[j - 1] * a[0][j - 1]);
        r = r.max(ra.abs());
    }
    for j in 0..n - 1 {
        let rb = b[1][j] - a[1][j + 1] - 0.5 * dt * (c4[j] * b[1][j] + c4[j + 1] * a[1][j + 1]);
        r = r.max(rb.abs());
    }
    r
}
