use super::{check_gain_grid, check_initial, solve2, BoundaryLaw, PlantClass, SimSettings, Trajectory};
use crate::domain::IntervalGrid;
use crate::kernel_hyp::{HypGains, HypPlant};
use crate::{Error, Result};

/// Boundary actuation for [`simulate_hyp`].
#[derive(Debug, Clone)]
pub enum HypControl {
    /// Zero inflow: `u(-L) = v(L) = 0`.
    OpenLoop,
    Feedback(HypGains),
}

/// Unit-CFL characteristic scheme: `dt = h / ε`, so each family moves
/// exactly one node per step. Source terms are integrated along each
/// characteristic with Heun's method (explicit trapezoid). The coupling
/// terms `c₂ v` and `c₃ u` use the partner field smoothed by the `(1, 2, 1)/4`
/// stencil, which leaves smooth data unchanged to `O(h²)` and removes the
/// node-to-node alternating component that otherwise keeps both families in
/// phase and grows unseen by the integral feedback. Inflow values come from
/// a 2×2 solve with the boundary laws at both stages.
pub fn simulate_hyp(
    plant: &HypPlant,
    grid: &IntervalGrid,
    control: &HypControl,
    initial_u: &[f64],
    initial_v: &[f64],
    settings: &SimSettings,
) -> Result<Trajectory> {
    let n = grid.len();
    let law = match control {
        HypControl::OpenLoop => BoundaryLaw::zero(2 * n),
        HypControl::Feedback(g) => feedback_law(g, grid)?,
    };
    let mut traj = None;
    run(plant, grid, law, initial_u, initial_v, settings, |step, steps, u, v, ul, ur| {
        let t = traj.get_or_insert_with(|| {
            Trajectory::new(PlantClass::Hyperbolic, *grid, grid.spacing() / plant.epsilon, steps)
        });
        if step == 0 || settings.records(step, steps) {
            t.push(step, vec![u.to_vec(), v.to_vec()], [ul, ur])?;
        }
        Ok(())
    })?;
    Ok(traj.expect("initial record"))
}

pub(super) fn feedback_law(g: &HypGains, grid: &IntervalGrid) -> Result<BoundaryLaw> {
    for (_, gain) in g.all() {
        check_gain_grid(&gain.grid, grid)?;
    }
    Ok(BoundaryLaw {
        left: [g.u1_u.weighted(), g.u1_v.weighted()].concat(),
        right: [g.u2_u.weighted(), g.u2_v.weighted()].concat(),
    })
}

/// Marches the scheme, calling `visit(step, steps, u, v, u(-L), v(L))`
/// after every step including the initial state.
pub(super) fn run<F>(
    plant: &HypPlant,
    grid: &IntervalGrid,
    law: BoundaryLaw,
    initial_u: &[f64],
    initial_v: &[f64],
    settings: &SimSettings,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, usize, &[f64], &[f64], f64, f64) -> Result<()>,
{
    settings.validate()?;
    check_initial("u", initial_u, grid)?;
    check_initial("v", initial_v, grid)?;
    if (grid.half_length() - plant.half_length).abs() > 1e-12 * plant.half_length {
        return Err(Error::GridMismatch("simulation grid and plant lengths differ".into()));
    }
    let n = grid.len();
    let dt = grid.spacing() / plant.epsilon;
    if let Some(given) = settings.dt {
        if (given - dt).abs() > 1e-9 * dt {
            return Err(Error::Config(format!(
                "hyperbolic scheme needs dt = h/ε = {dt}, got {given}"
            )));
        }
    }
    let nodes = grid.nodes();
    let c: [Vec<f64>; 4] = std::array::from_fn(|k| plant.c[k].sample_all(&nodes));
    let e = n - 1;
    let (lu, lv) = law.left.split_at(n);
    let (ru, rv) = law.right.split_at(n);
    let inflow = Inflow {
        m: [1.0 - lu[0], -lv[e], -ru[0], 1.0 - rv[e]],
        lu,
        lv,
        ru,
        rv,
    };

    let steps = settings.steps(dt);
    let mut u = initial_u.to_vec();
    let mut v = initial_v.to_vec();
    visit(0, steps, &u, &v, u[0], v[e])?;
    let (mut su, mut sv) = (vec![0.0; n], vec![0.0; n]);
    let (mut pu, mut pv) = (vec![0.0; n], vec![0.0; n]);
    let (mut qu, mut qv) = (vec![0.0; n], vec![0.0; n]);
    let mut smooth_buf = vec![0.0; n];
    for step in 1..=steps {
        sources(&c, &u, &v, &mut su, &mut sv, &mut smooth_buf);
        for j in 1..n {
            pu[j] = u[j - 1] + dt * su[j - 1];
        }
        for j in 0..e {
            pv[j] = v[j + 1] + dt * sv[j + 1];
        }
        inflow.close(&mut pu, &mut pv)?;
        sources(&c, &pu, &pv, &mut qu, &mut qv, &mut smooth_buf);
        for j in 1..n {
            pu[j] = u[j - 1] + 0.5 * dt * (su[j - 1] + qu[j]);
        }
        for j in 0..e {
            pv[j] = v[j + 1] + 0.5 * dt * (sv[j + 1] + qv[j]);
        }
        let (u1, u2) = inflow.close(&mut pu, &mut pv)?;
        std::mem::swap(&mut u, &mut pu);
        std::mem::swap(&mut v, &mut pv);
        if u.iter().chain(&v).any(|x| !x.is_finite() || x.abs() > super::BLOW_UP) {
            return Err(Error::Divergence { step });
        }
        visit(step, steps, &u, &v, u1, u2)?;
    }
    Ok(())
}

/// Boundary laws restricted to the two inflow unknowns `u(-L)`, `v(L)`.
struct Inflow<'a> {
    m: [f64; 4],
    lu: &'a [f64],
    lv: &'a [f64],
    ru: &'a [f64],
    rv: &'a [f64],
}

impl Inflow<'_> {
    /// Sets `u[0]` and `v[n-1]` from the laws, given every other node.
    fn close(&self, u: &mut [f64], v: &mut [f64]) -> Result<(f64, f64)> {
        let e = u.len() - 1;
        let rest = |a: &[f64], b: &[f64]| -> f64 {
            let mut s = 0.0;
            for j in 1..=e {
                s += a[j] * u[j];
            }
            for j in 0..e {
                s += b[j] * v[j];
            }
            s
        };
        let (fl, fr) = (rest(self.lu, self.lv), rest(self.ru, self.rv));
        let [a, b, c, d] = self.m;
        let (u1, u2) = solve2(a, b, c, d, fl, fr)?;
        u[0] = u1;
        v[e] = u2;
        Ok((u1, u2))
    }
}

/// `su = c₁ u + c₂ v̄`, `sv = c₃ ū + c₄ v` with `f̄` the smoothed field.
fn sources(c: &[Vec<f64>; 4], u: &[f64], v: &[f64], su: &mut [f64], sv: &mut [f64], buf: &mut [f64]) {
    smooth(v, buf);
    for j in 0..u.len() {
        su[j] = c[0][j] * u[j] + c[1][j] * buf[j];
    }
    smooth(u, buf);
    for j in 0..u.len() {
        sv[j] = c[2][j] * buf[j] + c[3][j] * v[j];
    }
}

/// `(1, 2, 1)/4` average; end values kept (linear extrapolation).
fn smooth(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    out[0] = f[0];
    out[n - 1] = f[n - 1];
    for j in 1..n - 1 {
        out[j] = 0.25 * (f[j - 1] + 2.0 * f[j] + f[j + 1]);
    }
}

/// Makes initial data satisfy the feedback laws at `t = 0` by adding
/// `a ψ_L` to `u` and `b ψ_R` to `v`, where `ψ_L = ((L - x)/2L)²` and
/// `ψ_R = ((L + x)/2L)²` equal one at the respective inflow end.
///
/// Without this the inflow values jump at `t = 0` and the jump travels
/// through the domain, where the gain quadrature resolves it only to `O(h)`.
pub fn compatible_hyp_initial(
    gains: &HypGains,
    grid: &IntervalGrid,
    u0: &[f64],
    v0: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_initial("u", u0, grid)?;
    check_initial("v", v0, grid)?;
    let law = feedback_law(gains, grid)?;
    let n = grid.len();
    let (psi_l, psi_r) = end_bumps(grid);
    let zeros = vec![0.0; n];
    let s0 = [u0, v0].concat();
    let d1 = [psi_l.as_slice(), zeros.as_slice()].concat();
    let d2 = [zeros.as_slice(), psi_r.as_slice()].concat();
    let (a, b) = compatible_shift(&law, &s0, &d1, &d2, 0, 2 * n - 1)?;
    let u = u0.iter().zip(&psi_l).map(|(x, p)| x + a * p).collect();
    let v = v0.iter().zip(&psi_r).map(|(x, p)| x + b * p).collect();
    Ok((u, v))
}

pub(super) fn end_bumps(grid: &IntervalGrid) -> (Vec<f64>, Vec<f64>) {
    let l = grid.half_length();
    let nodes = grid.nodes();
    (
        nodes.iter().map(|x| ((l - x) / (2.0 * l)).powi(2)).collect(),
        nodes.iter().map(|x| ((l + x) / (2.0 * l)).powi(2)).collect(),
    )
}

/// `(a, b)` such that `s = s0 + a d1 + b d2` obeys `s[i1] = ⟨left, s⟩` and
/// `s[i2] = ⟨right, s⟩`.
pub(super) fn compatible_shift(
    law: &BoundaryLaw,
    s0: &[f64],
    d1: &[f64],
    d2: &[f64],
    i1: usize,
    i2: usize,
) -> Result<(f64, f64)> {
    use super::dot;
    let g = |w: &[f64], i: usize, d: &[f64]| d[i] - dot(w, d);
    solve2(
        g(&law.left, i1, d1),
        g(&law.left, i1, d2),
        g(&law.right, i2, d1),
        g(&law.right, i2, d2),
        -g(&law.left, i1, s0),
        -g(&law.right, i2, s0),
    )
}
