//! Open- and closed-loop time integration and target-system verification.
//!
//! All three plant classes share [`Trajectory`]: uniformly spaced records of
//! the state fields, the actuator values and the state norms.

mod hyp;
mod rd;
mod target;
mod wave;

pub use hyp::{compatible_hyp_initial, simulate_hyp, HypControl};
pub use rd::{simulate_rd, RdControl};
pub use target::{target_check, TargetCheck, TargetSpec};
pub use wave::{compatible_wave_velocity, simulate_wave, WaveControl, WaveOptions};

use serde::{Deserialize, Serialize};

use crate::domain::IntervalGrid;
use crate::{Error, Result};

/// Values beyond this magnitude count as divergence.
const BLOW_UP: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantClass {
    ReactionDiffusion,
    Hyperbolic,
    Wave,
}

/// Time-stepping parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimSettings {
    /// Step size. Required for reaction-diffusion; the hyperbolic schemes use
    /// `h / ε` and only check a supplied value against it.
    pub dt: Option<f64>,
    pub horizon: f64,
    /// Keep every `record_every`-th step (the last step is always kept).
    pub record_every: usize,
}

impl SimSettings {
    pub fn new(dt: Option<f64>, horizon: f64) -> Self {
        Self {
            dt,
            horizon,
            record_every: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::Config(format!("horizon must be nonnegative, got {}", self.horizon)));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::Config(format!("time step must be positive, got {dt}")));
            }
        }
        Ok(())
    }

    /// Number of steps covering the horizon.
    fn steps(&self, dt: f64) -> usize {
        let r = self.horizon / dt;
        let k = r.round();
        if (r - k).abs() < 1e-9 * r.max(1.0) {
            k as usize
        } else {
            r.ceil() as usize
        }
    }

    fn records(&self, step: usize, last: usize) -> bool {
        step % self.record_every == 0 || step == last
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormSample {
    /// Trapezoid `L²` norm of the monitored fields combined.
    pub l2: f64,
    pub sup: f64,
}

/// Recorded simulation output.
///
/// Fields per class: reaction-diffusion `["u"]`, hyperbolic `["u", "v"]`,
/// wave `["u", "w", "v"]`. Norms are taken over every field except the wave
/// displacement, i.e. over the Riemann pair for the wave class.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub class: PlantClass,
    pub grid: IntervalGrid,
    pub dt: f64,
    pub steps: usize,
    pub field_names: Vec<&'static str>,
    pub times: Vec<f64>,
    /// `snapshots[record][field][node]`
    pub snapshots: Vec<Vec<Vec<f64>>>,
    /// `[U₁, U₂]` per record: the left and right boundary actuators.
    pub actuators: Vec<[f64; 2]>,
    pub norms: Vec<NormSample>,
}

/// Condensed view of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub initial_l2: f64,
    pub final_l2: f64,
    pub initial_sup: f64,
    pub final_sup: f64,
    pub max_sup: f64,
    /// `final_l2 / initial_l2` (`NaN` for a zero initial state).
    pub growth_factor: f64,
    pub grows: bool,
    pub decays: bool,
}

impl Trajectory {
    fn new(class: PlantClass, grid: IntervalGrid, dt: f64, steps: usize) -> Self {
        let field_names = match class {
            PlantClass::ReactionDiffusion => vec!["u"],
            PlantClass::Hyperbolic => vec!["u", "v"],
            PlantClass::Wave => vec!["u", "w", "v"],
        };
        Self {
            class,
            grid,
            dt,
            steps,
            field_names,
            times: Vec::new(),
            snapshots: Vec::new(),
            actuators: Vec::new(),
            norms: Vec::new(),
        }
    }

    fn monitored(&self) -> std::ops::Range<usize> {
        match self.class {
            PlantClass::Wave => 1..3,
            PlantClass::ReactionDiffusion => 0..1,
            PlantClass::Hyperbolic => 0..2,
        }
    }

    fn norm_of(&self, fields: &[Vec<f64>]) -> NormSample {
        let w = self.grid.weights();
        let mut sq = 0.0;
        let mut sup = 0.0_f64;
        for f in &fields[self.monitored()] {
            for (wi, v) in w.iter().zip(f) {
                sq += wi * v * v;
                sup = sup.max(v.abs());
            }
        }
        NormSample { l2: sq.sqrt(), sup }
    }

    fn push(&mut self, step: usize, fields: Vec<Vec<f64>>, actuators: [f64; 2]) -> Result<()> {
        for f in &fields {
            if f.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP) {
                return Err(Error::Divergence { step });
            }
        }
        self.norms.push(self.norm_of(&fields));
        self.times.push(step as f64 * self.dt);
        self.snapshots.push(fields);
        self.actuators.push(actuators);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.field_names.iter().position(|n| *n == name)
    }

    /// Checks the redundant parts of the record: stored norms equal norms
    /// recomputed from the snapshots and boundary snapshots equal the
    /// recorded actuators, both bit for bit.
    pub fn verify(&self) -> Result<()> {
        let n = self.grid.len();
        for (k, fields) in self.snapshots.iter().enumerate() {
            if self.norm_of(fields) != self.norms[k] {
                return Err(Error::Numeric(format!("norm history differs at record {k}")));
            }
            let [u1, u2] = self.actuators[k];
            let (left, right) = match self.class {
                PlantClass::ReactionDiffusion | PlantClass::Wave => (fields[0][0], fields[0][n - 1]),
                PlantClass::Hyperbolic => (fields[0][0], fields[1][n - 1]),
            };
            if left != u1 || right != u2 {
                return Err(Error::Numeric(format!(
                    "boundary snapshot differs from actuator record at record {k}"
                )));
            }
        }
        Ok(())
    }

    pub fn summary(&self) -> TrajectorySummary {
        let first = self.norms.first().copied().unwrap_or(NormSample { l2: 0.0, sup: 0.0 });
        let last = self.norms.last().copied().unwrap_or(first);
        let growth = if first.l2 > 0.0 { last.l2 / first.l2 } else { f64::NAN };
        TrajectorySummary {
            initial_l2: first.l2,
            final_l2: last.l2,
            initial_sup: first.sup,
            final_sup: last.sup,
            max_sup: self.norms.iter().map(|s| s.sup).fold(0.0, f64::max),
            growth_factor: growth,
            grows: growth > 1.0,
            decays: growth < 1.0,
        }
    }

    /// `∫ (u_t² + u_x²) dx = ½ ∫ (w² + v²) dx` per record (wave class only).
    pub fn wave_energy(&self) -> Result<Vec<f64>> {
        if self.class != PlantClass::Wave {
            return Err(Error::Unsupported("energy is defined for wave trajectories".into()));
        }
        let w = self.grid.weights();
        Ok(self
            .snapshots
            .iter()
            .map(|f| {
                0.5 * w
                    .iter()
                    .zip(f[1].iter().zip(&f[2]))
                    .map(|(wi, (a, b))| wi * (a * a + b * b))
                    .sum::<f64>()
            })
            .collect())
    }
}

/// Least-squares slope of `-ln y(t)` over records with `t ≥ t_from` and
/// `y > 0`; `None` with fewer than two usable points.
pub fn fitted_decay_rate(times: &[f64], values: &[f64], t_from: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, y)| **t >= t_from && **y > 0.0 && y.is_finite())
        .map(|(t, y)| (*t, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}

/// Linear boundary laws `U_left = ⟨left, s⟩`, `U_right = ⟨right, s⟩` on the
/// concatenated state `s` (one block of `n` weights per field).
#[derive(Debug, Clone)]
struct BoundaryLaw {
    left: Vec<f64>,
    right: Vec<f64>,
}

impl BoundaryLaw {
    fn zero(len: usize) -> Self {
        Self {
            left: vec![0.0; len],
            right: vec![0.0; len],
        }
    }
}

fn check_gain_grid(gain: &IntervalGrid, grid: &IntervalGrid) -> Result<()> {
    if gain != grid {
        return Err(Error::GridMismatch(format!(
            "gain sampled on {} nodes over half length {}, simulation uses {} nodes over {}",
            gain.len(),
            gain.half_length(),
            grid.len(),
            grid.half_length()
        )));
    }
    Ok(())
}

fn check_initial(name: &str, values: &[f64], grid: &IntervalGrid) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::Config(format!(
            "initial {name} has {} values for a {}-node grid",
            values.len(),
            grid.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("initial {name} is not finite")));
    }
    Ok(())
}

/// Solves `[[a, b], [c, d]] x = [e, f]`.
fn solve2(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Result<(f64, f64)> {
    let det = a * d - b * c;
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if !(det.abs() > 1e-14 * scale * scale) {
        return Err(Error::Numeric(
            "boundary feedback makes the step singular".into(),
        ));
    }
    Ok(((e * d - b * f) / det, (a * f - c * e) / det))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
