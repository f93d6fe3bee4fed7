//! Anti-damped wave equation `u_tt - u_xx = 2λ(x) u_t + α(x) u_x` with
//! Dirichlet actuation `u(-L) = U₁`, `u(L) = U₂`, reduced to the hyperbolic
//! class through the Riemann variables `w = u_x + u_t`, `v = u_x - u_t`:
//!
//! ```text
//! v_t = -v_x + (λ - α/2) v - (λ + α/2) w,
//! w_t =  w_x + (α/2 - λ) v + (λ + α/2) w.
//! ```
//!
//! `v` travels right and enters at `x = -L`, `w` travels left and enters at
//! `x = L`, so the hyperbolic state is `(u, v)_hyp = (v, w)` with `ε = 1`.
//! The hyperbolic controls prescribe `V₁ = v(-L)` and `V₂ = w(L)`; the
//! physical actuators then follow `U̇₁ = u_x(-L) - V₁` and `U̇₂ = V₂ - u_x(L)`.

use serde::{Deserialize, Serialize};

use crate::domain::CoefficientProfile;
use crate::kernel_hyp::HypPlant;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct WavePlant {
    /// Anti-damping coefficient.
    pub lambda: CoefficientProfile,
    /// Convection coefficient.
    pub alpha: CoefficientProfile,
    pub half_length: f64,
}

impl WavePlant {
    pub fn new(
        lambda: CoefficientProfile,
        alpha: CoefficientProfile,
        half_length: f64,
    ) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Config(format!("half length must be positive, got {half_length}")));
        }
        lambda.validate(half_length, "lambda")?;
        alpha.validate(half_length, "alpha")?;
        Ok(Self {
            lambda,
            alpha,
            half_length,
        })
    }

    /// Like [`WavePlant::new`] but rejects a nonzero `β` (damping on `u`),
    /// which the reduction does not cover.
    pub fn with_beta(
        lambda: CoefficientProfile,
        alpha: CoefficientProfile,
        beta: &CoefficientProfile,
        half_length: f64,
    ) -> Result<Self> {
        if beta.as_constant() != Some(0.0) {
            return Err(Error::Unsupported(
                "wave reduction covers only β ≡ 0".into(),
            ));
        }
        Self::new(lambda, alpha, half_length)
    }
}

/// Pointwise maps between `(u_x, u_t)` and the Riemann pair `(w, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RiemannMaps;

impl RiemannMaps {
    /// `(u_x, u_t) ↦ (w, v)`.
    pub fn forward(&self, ux: f64, ut: f64) -> (f64, f64) {
        (ux + ut, ux - ut)
    }

    /// `(w, v) ↦ (u_x, u_t)`.
    pub fn inverse(&self, w: f64, v: f64) -> (f64, f64) {
        (0.5 * (w + v), 0.5 * (w - v))
    }
}

/// The equivalent hyperbolic plant (state `(v, w)`, `ε = 1`) and the maps.
pub fn wave_to_hyp(plant: &WavePlant) -> Result<(HypPlant, RiemannMaps)> {
    let lam = plant.lambda.clone();
    let alpha = plant.alpha.clone();
    let c = match (lam.as_constant(), alpha.as_constant()) {
        (Some(l), Some(a)) => [l - a / 2.0, -(l + a / 2.0), a / 2.0 - l, l + a / 2.0]
            .map(CoefficientProfile::constant),
        _ => {
            // sample both on a fine grid and tabulate the combinations
            let n = 4001;
            let l = plant.half_length;
            let xs: Vec<f64> = (0..n)
                .map(|k| -l + 2.0 * l * k as f64 / (n - 1) as f64)
                .collect();
            let lv = lam.sample_all(&xs);
            let av = alpha.sample_all(&xs);
            let combo = |f: &dyn Fn(f64, f64) -> f64| {
                CoefficientProfile::tabulated(
                    xs.clone(),
                    lv.iter().zip(&av).map(|(&l, &a)| f(l, a)).collect(),
                )
            };
            [
                combo(&|l, a| l - a / 2.0)?,
                combo(&|l, a| -(l + a / 2.0))?,
                combo(&|l, a| a / 2.0 - l)?,
                combo(&|l, a| l + a / 2.0)?,
            ]
        }
    };
    Ok((HypPlant::new(1.0, c, plant.half_length)?, RiemannMaps))
}

/// Time integrator for the actuator ODEs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActuatorIntegrator {
    ForwardEuler,
    #[default]
    Trapezoid,
}

/// Boundary data entering the actuator ODEs at one time level.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryTraces {
    /// Hyperbolic control `V₁ = v(-L)`.
    pub v1: f64,
    /// Hyperbolic control `V₂ = w(L)`.
    pub v2: f64,
    /// `u_x(-L)`
    pub slope_left: f64,
    /// `u_x(L)`
    pub slope_right: f64,
}

impl BoundaryTraces {
    /// `(U̇₁, U̇₂)`.
    pub fn rates(&self) -> (f64, f64) {
        (self.slope_left - self.v1, self.v2 - self.slope_right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ActuatorState {
    pub u1: f64,
    pub u2: f64,
}

/// Advances the actuators by `dt`. `next` is required by the trapezoid rule
/// and ignored by forward Euler. `scheme_dt` is the field scheme's step,
/// which `dt` must equal.
pub fn actuator_ode_step(
    state: ActuatorState,
    now: BoundaryTraces,
    next: Option<BoundaryTraces>,
    dt: f64,
    scheme_dt: f64,
    integrator: ActuatorIntegrator,
) -> Result<ActuatorState> {
    if !(dt > 0.0) || (dt - scheme_dt).abs() > 1e-12 * scheme_dt.abs() {
        return Err(Error::Config(format!(
            "actuator step {dt} does not match the field step {scheme_dt}"
        )));
    }
    let (r1, r2) = now.rates();
    let (d1, d2) = match integrator {
        ActuatorIntegrator::ForwardEuler => (r1, r2),
        ActuatorIntegrator::Trapezoid => {
            let next = next.ok_or_else(|| {
                Error::Config("trapezoid actuator step needs the next boundary traces".into())
            })?;
            let (s1, s2) = next.rates();
            (0.5 * (r1 + s1), 0.5 * (r2 + s2))
        }
    };
    Ok(ActuatorState {
        u1: state.u1 + dt * d1,
        u2: state.u2 + dt * d2,
    })
}
