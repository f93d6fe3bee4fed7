use super::hyp::{compatible_shift, end_bumps, feedback_law, run};
use super::{check_initial, BoundaryLaw, PlantClass, SimSettings, Trajectory};
use crate::domain::IntervalGrid;
use crate::kernel_hyp::HypGains;
use crate::wave::{
    actuator_ode_step, wave_to_hyp, ActuatorIntegrator, ActuatorState, BoundaryTraces,
    WavePlant,
};
use crate::Result;



/// Boundary actuation for [`simulate_wave`].
#[derive(Debug, Clone)]
pub enum WaveControl {
    /// Clamped ends: `U₁`, `U₂` held at their initial values, which
    /// reflects each Riemann variable into the other (`v = w` at `x = -L`
    /// and `w = v` at `x = L`).
    OpenLoop,
    /// Hyperbolic gains for the reduced plant, state ordered `(v, w)`.
    Feedback(HypGains),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WaveOptions {
    pub integrator: ActuatorIntegrator,
}

/// Marches the Riemann pair with the hyperbolic scheme, advances the
/// actuator ODEs and reconstructs `u` by trapezoid integration of
/// `u_t = (w - v)/2`, with the end values taken from the actuators.
pub fn simulate_wave(
    plant: &WavePlant,
    grid: &IntervalGrid,
    control: &WaveControl,
    displacement: &[f64],
    velocity: &[f64],
    settings: &SimSettings,
    options: WaveOptions,
) -> Result<Trajectory> {
    check_initial("displacement", displacement, grid)?;
    check_initial("velocity", velocity, grid)?;
    let (hyp, maps) = wave_to_hyp(plant)?;
    let n = grid.len();
    let law = match control {
        WaveControl::OpenLoop => {
            let mut law = BoundaryLaw::zero(2 * n);
            law.left[n] = 1.0; // v(-L) = w(-L)
            law.right[n - 1] = 1.0; // w(L) = v(L)
            law
        }
        WaveControl::Feedback(g) => feedback_law(g, grid)?,
    };

    let slope = gradient(displacement, grid.spacing());
    let mut w = vec![0.0; n];
    let mut v = vec![0.0; n];
    for j in 0..n {
        (w[j], v[j]) = maps.forward(slope[j], velocity[j]);
    }
    let dt = grid.spacing();
    let traces = |w: &[f64], v: &[f64]| BoundaryTraces {
        v1: v[0],
        v2: w[n - 1],
        slope_left: maps.inverse(w[0], v[0]).0,
        slope_right: maps.inverse(w[n - 1], v[n - 1]).0,
    };

    let mut u = displacement.to_vec();
    let mut act = ActuatorState {
        u1: u[0],
        u2: u[n - 1],
    };
    let mut prev_traces = traces(&w, &v);
    let mut prev_ut: Vec<f64> = (0..n).map(|j| maps.inverse(w[j], v[j]).1).collect();
    let mut traj: Option<Trajectory> = None;

    run(&hyp, grid, law, &v, &w, settings, |step, steps, vh, wh, _, _| {
        let t = traj.get_or_insert_with(|| Trajectory::new(PlantClass::Wave, *grid, dt, steps));
        if step > 0 {
            let now = traces(wh, vh);
            act = actuator_ode_step(
                act,
                prev_traces,
                Some(now),
                dt,
                dt,
                options.integrator,
            )?;
            for j in 0..n {
                let ut = maps.inverse(wh[j], vh[j]).1;
                u[j] += 0.5 * dt * (prev_ut[j] + ut);
                prev_ut[j] = ut;
            }
            u[0] = act.u1;
            u[n - 1] = act.u2;
            prev_traces = now;
        }
        if step == 0 || settings.records(step, steps) {
            t.push(step, vec![u.clone(), wh.to_vec(), vh.to_vec()], [act.u1, act.u2])?;
        }
        Ok(())
    })?;
    Ok(traj.expect("initial record"))
}

/// Second-order finite-difference derivative (one-sided at the ends).
fn gradient(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    for j in 1..n - 1 {
        d[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    d
}

/// Adjusts the initial velocity so that the Riemann pair satisfies the
/// feedback laws at `t = 0`: adds `a ψ_L + b ψ_R` (see
/// [`compatible_hyp_initial`](super::compatible_hyp_initial)) to `u_t`,
/// which shifts `w` by `+δ` and `v` by `-δ`.
pub fn compatible_wave_velocity(
    gains: &HypGains,
    grid: &IntervalGrid,
    displacement: &[f64],
    velocity: &[f64],
) -> Result<Vec<f64>> {
    check_initial("displacement", displacement, grid)?;
    check_initial("velocity", velocity, grid)?;
    let n = grid.len();
    let law = feedback_law(gains, grid)?;
    let slope = gradient(displacement, grid.spacing());
    // reduced state (v, w)
    let v: Vec<f64> = slope.iter().zip(velocity).map(|(x, t)| x - t).collect();
    let w: Vec<f64> = slope.iter().zip(velocity).map(|(x, t)| x + t).collect();
    let (pl, pr) = end_bumps(grid);
    let dir = |p: &[f64]| {
        let neg: Vec<f64> = p.iter().map(|x| -x).collect();
        [neg.as_slice(), p].concat()
    };
    let (a, b) = compatible_shift(&law, &[v, w].concat(), &dir(&pl), &dir(&pr), 0, 2 * n - 1)?;
    Ok(velocity
        .iter()
        .zip(pl.iter().zip(&pr))
        .map(|(t, (l, r))| t + a * l + b * r)
        .collect())
}
