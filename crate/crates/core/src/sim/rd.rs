use super::{check_gain_grid, check_initial, dot, solve2, BoundaryLaw, PlantClass, SimSettings, Trajectory};
use crate::domain::{GainFunction, IntervalGrid};
use crate::kernel_rd::RdPlant;
use crate::{Error, Result};

/// Boundary actuation for [`simulate_rd`].
#[derive(Debug, Clone)]
pub enum RdControl {
    /// Homogeneous Dirichlet ends.
    OpenLoop,
    /// `u(L) = ∫ right · u`, `u(-L) = ∫ left · u`.
    Feedback {
        right: GainFunction,
        left: GainFunction,
    },
}

/// Crank–Nicolson on the interior nodes. The end values at the new time
/// level are part of the solve: the interior is written as a particular
/// solution plus the responses to unit end values, and the feedback laws
/// become a 2×2 system for `(u(-L), u(L))`.
pub fn simulate_rd(
    plant: &RdPlant,
    grid: &IntervalGrid,
    control: &RdControl,
    initial: &[f64],
    settings: &SimSettings,
) -> Result<Trajectory> {
    settings.validate()?;
    check_initial("profile", initial, grid)?;
    if (grid.half_length() - plant.half_length).abs() > 1e-12 * plant.half_length {
        return Err(Error::GridMismatch("simulation grid and plant lengths differ".into()));
    }
    let dt = settings
        .dt
        .ok_or_else(|| Error::Config("reaction-diffusion simulation needs a time step".into()))?;
    let n = grid.len();
    let law = match control {
        RdControl::OpenLoop => BoundaryLaw::zero(n),
        RdControl::Feedback { right, left } => {
            check_gain_grid(&right.grid, grid)?;
            check_gain_grid(&left.grid, grid)?;
            BoundaryLaw {
                left: left.weighted(),
                right: right.weighted(),
            }
        }
    };

    let h = grid.spacing();
    let r = 0.5 * dt * plant.epsilon / (h * h);
    let lam: Vec<f64> = grid.nodes().iter().map(|&x| plant.lambda.sample(x)).collect();
    let m = n - 2;
    let diag: Vec<f64> = (1..n - 1).map(|i| 1.0 + 2.0 * r - 0.5 * dt * lam[i]).collect();
    let solver = Tridiagonal::new(-r, &diag, -r)?;

    let mut e = vec![0.0; m];
    e[0] = r;
    let resp_left = solver.solve(&e);
    e[0] = 0.0;
    e[m - 1] = r;
    let resp_right = solver.solve(&e);

    let li = &law.left[1..n - 1];
    let ri = &law.right[1..n - 1];
    let (l0, le) = (law.left[0], law.left[n - 1]);
    let (r0, re) = (law.right[0], law.right[n - 1]);
    let a = 1.0 - l0 - dot(li, &resp_left);
    let b = -(le + dot(li, &resp_right));
    let c = -(r0 + dot(ri, &resp_left));
    let d = 1.0 - re - dot(ri, &resp_right);

    let steps = settings.steps(dt);
    let mut traj = Trajectory::new(PlantClass::ReactionDiffusion, *grid, dt, steps);
    let mut u = initial.to_vec();
    traj.push(0, vec![u.clone()], [u[0], u[n - 1]])?;
    let mut rhs = vec![0.0; m];
    for step in 1..=steps {
        for k in 0..m {
            let i = k + 1;
            rhs[k] = (1.0 - 2.0 * r + 0.5 * dt * lam[i]) * u[i] + r * (u[i - 1] + u[i + 1]);
        }
        let base = solver.solve(&rhs);
        let (ul, ur) = solve2(a, b, c, d, dot(li, &base), dot(ri, &base))?;
        u[0] = ul;
        u[n - 1] = ur;
        for k in 0..m {
            u[k + 1] = base[k] + ul * resp_left[k] + ur * resp_right[k];
        }
        if u.iter().any(|v| !v.is_finite() || v.abs() > super::BLOW_UP) {
            return Err(Error::Divergence { step });
        }
        if settings.records(step, steps) {
            traj.push(step, vec![u.clone()], [ul, ur])?;
        }
    }
    Ok(traj)
}

/// Factored constant-off-diagonal tridiagonal matrix (Thomas algorithm).
struct Tridiagonal {
    lower: f64,
    /// Modified upper coefficients `c'_k` and pivots.
    c_mod: Vec<f64>,
    pivot: Vec<f64>,
}

impl Tridiagonal {
    fn new(lower: f64, diag: &[f64], upper: f64) -> Result<Self> {
        let m = diag.len();
        let mut c_mod = vec![0.0; m];
        let mut pivot = vec![0.0; m];
        for k in 0..m {
            let p = if k == 0 {
                diag[0]
            } else {
                diag[k] - lower * c_mod[k - 1]
            };
            if p.abs() < 1e-300 {
                return Err(Error::Numeric("singular Crank–Nicolson matrix".into()));
            }
            pivot[k] = p;
            c_mod[k] = upper / p;
        }
        Ok(Self {
            lower,
            c_mod,
            pivot,
        })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = rhs.len();
        let mut y = vec![0.0; m];
        for k in 0..m {
            let prev = if k == 0 { 0.0 } else { self.lower * y[k - 1] };
            y[k] = (rhs[k] - prev) / self.pivot[k];
        }
        for k in (0..m - 1).rev() {
            y[k] -= self.c_mod[k] * y[k + 1];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_solves_system() {
        let diag = [4.0, 5.0, 6.0, 7.0];
        let t = Tridiagonal::new(-1.0, &diag, 2.0).unwrap();
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b = [0.0; 4];
        for k in 0..4 {
            b[k] = diag[k] * x[k];
            if k > 0 {
                b[k] += -1.0 * x[k - 1];
            }
            if k < 3 {
                b[k] += 2.0 * x[k + 1];
            }
        }
        let y = t.solve(&b);
        for k in 0..4 {
            assert!((y[k] - x[k]).abs() < 1e-14);
        }
    }
}
