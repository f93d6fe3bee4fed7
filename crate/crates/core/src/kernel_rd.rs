//! Backstepping kernel and boundary gains for `u_t = ε u_xx + λ(x) u` on
//! `[-L, L]` with Dirichlet actuation at both ends.
//!
//! The transformation `w = u - ∫_{-x}^{x} K(x, ξ) u(ξ) dξ` uses an oriented
//! integral, so for `x < 0` it equals `+∫_{x}^{-x}`. Under that reading the
//! kernel obeys the same equations on both halves of the hourglass,
//!
//! ```text
//! ε K_xx - ε K_ξξ = λ(ξ) K,   K(x, x) = -(1/2ε) ∫₀ˣ λ,   K(x, -x) = 0,
//! ```
//!
//! and the controls are `U₁ = u(L) = ∫ K(L, ξ) u` and
//! `U₂ = u(-L) = -∫ K(-L, ξ) u`.
//!
//! On `𝒯₂` the kernel is `K(x, ξ) = -K̂(-x, -ξ)` where `K̂` solves the `𝒯₁`
//! problem for the reflected coefficient `λ̂(s) = λ(-s)`.

use serde::Serialize;

use crate::chargrid::CharGrid;
use crate::domain::quadrature::gauss_legendre5;
use crate::domain::{
    mirror_to_t2, CoefficientProfile, End, GainFunction, HourglassGrid, IntervalGrid,
    KernelField, ParityRule, Provenance,
};
use crate::par::{self, Execution};
use crate::specfun::bessel_i1_over_z;
use crate::{Error, Result};

/// Reaction-diffusion plant `u_t = ε u_xx + λ(x) u` on `[-L, L]`.
#[derive(Debug, Clone, Serialize)]
pub struct RdPlant {
    pub epsilon: f64,
    pub lambda: CoefficientProfile,
    pub half_length: f64,
}

impl RdPlant {
    pub fn new(epsilon: f64, lambda: CoefficientProfile, half_length: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Config(format!("diffusivity must be positive, got {epsilon}")));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Config(format!("half length must be positive, got {half_length}")));
        }
        lambda.validate(half_length, "lambda")?;
        Ok(Self {
            epsilon,
            lambda,
            half_length,
        })
    }

    pub fn constant(epsilon: f64, lambda: f64, half_length: f64) -> Result<Self> {
        Self::new(epsilon, CoefficientProfile::constant(lambda), half_length)
    }

    fn check_grid(&self, grid: &IntervalGrid) -> Result<()> {
        if (grid.half_length() - self.half_length).abs() > 1e-12 * self.half_length {
            return Err(Error::GridMismatch(format!(
                "grid half length {} differs from plant half length {}",
                grid.half_length(),
                self.half_length
            )));
        }
        Ok(())
    }

    /// Constant `λ ≥ 0`, as required by the closed-form kernel.
    fn explicit_lambda(&self) -> Result<f64> {
        match self.lambda.as_constant() {
            Some(l) if l >= 0.0 => Ok(l),
            Some(l) => Err(Error::Unsupported(format!(
                "closed-form kernel needs λ ≥ 0 (got {l}); use the Goursat solver"
            ))),
            None => Err(Error::Unsupported(
                "closed-form kernel needs a constant λ; use the Goursat solver".into(),
            )),
        }
    }
}

/// Iteration report of a Goursat solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoursatReport {
    /// Largest iteration count over the individual triangle solves.
    pub iterations: usize,
    /// Largest final sup-norm change.
    pub residual: f64,
    pub richardson: bool,
}

#[derive(Debug, Clone)]
pub struct RdKernel {
    pub field: KernelField,
    pub provenance: Provenance,
    pub epsilon: f64,
    pub report: Option<GoursatReport>,
}

#[derive(Debug, Clone, Copy)]
pub struct GoursatSettings {
    /// Stop once the sup-norm change between iterates drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Combine solutions at characteristic steps `h` and `h/2`.
    pub richardson: bool,
    pub execution: Execution,
}

impl Default for GoursatSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            richardson: true,
            execution: Execution::Parallel,
        }
    }
}

/// `K(x, ξ) = -(λ / 2ε) (x + ξ) · I₁(q)/q`, `q = √(λ/ε) √(x² - ξ²)`.
///
/// This is the closed-form kernel with the `sgn(x) √((x+ξ)/(x-ξ))` factor
/// folded into `(x + ξ)`, which makes it regular on the whole hourglass.
pub fn rd_kernel_value(lambda: f64, epsilon: f64, x: f64, xi: f64) -> Result<f64> {
    let q = (lambda / epsilon * (x * x - xi * xi).max(0.0)).sqrt();
    Ok(-(lambda / (2.0 * epsilon)) * (x + xi) * bessel_i1_over_z(q)?)
}

/// Closed-form kernel for constant `λ ≥ 0`.
pub fn rd_kernel_explicit(plant: &RdPlant, grid: &HourglassGrid) -> Result<RdKernel> {
    plant.check_grid(grid.base())?;
    let lambda = plant.explicit_lambda()?;
    let eps = plant.epsilon;
    let field = KernelField::from_fn(*grid, |x, xi| rd_kernel_value(lambda, eps, x, xi))?;
    Ok(RdKernel {
        field,
        provenance: Provenance::Explicit,
        epsilon: eps,
        report: None,
    })
}

/// Solves the kernel equations by successive approximation of the Goursat
/// integral equation
///
/// ```text
/// G(α, β) = -(1/2ε) ∫₀^{α/2} λ  +  ∫₀^α ∫₀^β λ((s - t)/2)/(4ε) G(s, t) dt ds
/// ```
///
/// on `𝒯₁` in `(α, β) = (x + ξ, x - ξ)`, starting from the boundary data
/// extended constantly in `β`. The double integral uses cumulative trapezoid
/// sums; with `richardson` the solutions at steps `h` and `h/2` are combined.
pub fn rd_kernel_goursat(
    plant: &RdPlant,
    grid: &HourglassGrid,
    settings: &GoursatSettings,
) -> Result<RdKernel> {
    plant.check_grid(grid.base())?;
    if !(settings.tol > 0.0) {
        return Err(Error::Config("Goursat tolerance must be positive".into()));
    }
    let exec = settings.execution;
    let solve_at = |refine: usize| solve_hourglass(plant, grid, refine, settings);
    let (field, iterations, residual) = if settings.richardson {
        let (coarse, fine) = par::join(exec, || solve_at(1), || solve_at(2));
        let (coarse, fine) = (coarse?, fine?);
        (
            fine.0.extrapolate(&coarse.0, 1.0 / 3.0)?,
            coarse.1.max(fine.1),
            coarse.2.max(fine.2),
        )
    } else {
        solve_at(1)?
    };
    Ok(RdKernel {
        field,
        provenance: Provenance::Goursat,
        epsilon: plant.epsilon,
        report: Some(GoursatReport {
            iterations,
            residual,
            richardson: settings.richardson,
        }),
    })
}

fn solve_hourglass(
    plant: &RdPlant,
    grid: &HourglassGrid,
    refine: usize,
    settings: &GoursatSettings,
) -> Result<(KernelField, usize, f64)> {
    let cg = CharGrid::for_hourglass(grid, refine);
    let points = cg.coefficient_points();
    let samples = plant.lambda.sample_all(&points);
    let reflected: Vec<f64> = samples.iter().rev().copied().collect();
    let symmetric = samples == reflected;

    let lam = |s: f64| plant.lambda.sample(s);
    let lam_reflected = |s: f64| plant.lambda.sample(-s);
    let eps = plant.epsilon;

    let (t1, t2) = if symmetric {
        (goursat_t1(&cg, &samples, &lam, eps, settings)?, None)
    } else {
        let (a, b) = par::join(
            settings.execution,
            || goursat_t1(&cg, &samples, &lam, eps, settings),
            || goursat_t1(&cg, &reflected, &lam_reflected, eps, settings),
        );
        (a?, Some(b?))
    };

    let mut field = KernelField::zeros(*grid);
    cg.write_t1(&t1.0, &mut field, refine);
    let (iters, resid) = match &t2 {
        None => {
            let src = field.clone();
            field = mirror_to_t2(&field, &src, ParityRule::Odd)?;
            (t1.1, t1.2)
        }
        Some(t2) => {
            let mut src = KernelField::zeros(*grid);
            cg.write_t1(&t2.0, &mut src, refine);
            field = mirror_to_t2(&field, &src, ParityRule::Odd)?;
            (t1.1.max(t2.1), t1.2.max(t2.2))
        }
    };
    Ok((field, iters, resid))
}

/// Picard iteration on one triangle. `samples` holds `λ` at
/// [`CharGrid::coefficient_points`]; `lam` is used for the boundary integral.
fn goursat_t1(
    cg: &CharGrid,
    samples: &[f64],
    lam: &(dyn Fn(f64) -> f64 + Sync),
    eps: f64,
    settings: &GoursatSettings,
) -> Result<(Vec<f64>, usize, f64)> {
    let n = cg.size();
    let m = cg.m;
    let hc = cg.step();
    let exec = settings.execution;

    // φ(α_a) = -(1/2ε) ∫₀^{a h_c / 2} λ, piecewise Gauss–Legendre
    let mut phi = vec![0.0; n];
    let mut acc = 0.0;
    for a in 1..n {
        let (lo, hi) = (0.5 * (a - 1) as f64 * hc, 0.5 * a as f64 * hc);
        acc += gauss_legendre5(lam, lo, hi);
        phi[a] = -acc / (2.0 * eps);
    }

    let mut q = cg.zeros();
    par::for_each_row(exec, &mut q, n, |a, row| {
        for (b, v) in row.iter_mut().take(n - a).enumerate() {
            *v = samples[a + m - b] / (4.0 * eps);
        }
    });

    let mut g = cg.zeros();
    for a in 0..n {
        g[a * n..a * n + (n - a)].fill(phi[a]);
    }
    let mut work = cg.zeros();
    let mut work_t = cg.zeros();
    let mut residual = f64::INFINITY;
    for iter in 1..=settings.max_iter {
        {
            let g = &g;
            let q = &q;
            par::for_each_row(exec, &mut work, n, |a, row| {
                for b in 0..n - a {
                    row[b] = q[a * n + b] * g[a * n + b];
                }
            });
        }
        cg.cumulative_rows(exec, &mut work);
        cg.transpose(&work, &mut work_t);
        cg.cumulative_rows(exec, &mut work_t);

        residual = 0.0;
        for a in 0..n {
            for b in 0..n - a {
                let next = phi[a] + work_t[b * n + a];
                residual = residual.max((next - g[a * n + b]).abs());
                g[a * n + b] = next;
            }
        }
        if !residual.is_finite() {
            return Err(Error::Numeric("Goursat iterate became non-finite".into()));
        }
        if residual < settings.tol {
            return Ok((g, iter, residual));
        }
    }
    Err(Error::Convergence {
        iterations: settings.max_iter,
        residual,
    })
}

/// Boundary gains `(g_right, g_left)` with `U₁ = ∫ g_right u`,
/// `U₂ = ∫ g_left u`: `g_right(ξ) = K(L, ξ)`, `g_left(ξ) = -K(-L, ξ)`.
pub fn rd_gains(kernel: &RdKernel) -> Result<(GainFunction, GainFunction)> {
    let grid = *kernel.field.interval();
    let n = grid.len();
    let right = kernel.field.row(n - 1).to_vec();
    let left = kernel.field.row(0).iter().map(|v| -v).collect();
    Ok((
        GainFunction::new(End::Right, grid, right)?,
        GainFunction::new(End::Left, grid, left)?,
    ))
}

/// Closed-form gain for one end, constant `λ ≥ 0`:
///
/// ```text
/// right: -(λ / 2ε) (L + ξ) I₁(q)/q,    left: -(λ / 2ε) (L - ξ) I₁(q)/q,
/// q = √(λ/ε) √(L² - ξ²)
/// ```
///
/// which are the `√((L±ξ)/(L∓ξ)) I₁(q)` integrands with the endpoint limits
/// built in.
pub fn rd_gain_explicit(plant: &RdPlant, grid: &IntervalGrid, end: End) -> Result<GainFunction> {
    plant.check_grid(grid)?;
    let lambda = plant.explicit_lambda()?;
    let eps = plant.epsilon;
    let l = plant.half_length;
    let samples = grid
        .nodes()
        .iter()
        .map(|&xi| {
            let q = (lambda / eps * (l * l - xi * xi).max(0.0)).sqrt();
            let weight = match end {
                End::Right => l + xi,
                End::Left => l - xi,
            };
            Ok(-(lambda / (2.0 * eps)) * weight * bessel_i1_over_z(q)?)
        })
        .collect::<Result<Vec<_>>>()?;
    GainFunction::new(end, *grid, samples)
}

/// The four pieces of a kernel on `{x ≥ 0, 0 ≤ ξ ≤ x}` obtained by folding
/// `[-L, L]` onto `[0, L]`:
/// `K₁₁(x,ξ) = K(x,ξ)`, `K₁₂(x,ξ) = K(x,-ξ)`, `K₂₁(x,ξ) = K(-x,ξ)`,
/// `K₂₂(x,ξ) = K(-x,-ξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedKernel {
    grid: HourglassGrid,
    /// `[K₁₁, K₁₂, K₂₁, K₂₂]`, each indexed by offsets `(p, q)`, `0 ≤ q ≤ p ≤ c`,
    /// stored densely as `p * (c + 1) + q`.
    pieces: [Vec<f64>; 4],
}

impl FoldedKernel {
    /// Piece `k ∈ 0..4` at node offsets `(p, q)` from the waist.
    pub fn get(&self, piece: usize, p: usize, q: usize) -> f64 {
        let w = self.grid.base().center() + 1;
        self.pieces[piece][p * w + q]
    }

    pub fn half_nodes(&self) -> usize {
        self.grid.base().center() + 1
    }

    /// Reassembles the hourglass kernel.
    pub fn unfold(&self) -> KernelField {
        let mut out = KernelField::zeros(self.grid);
        let c = self.grid.base().center();
        for p in 0..=c {
            for q in 0..=p {
                out.set(c + p, c + q, self.get(0, p, q));
                out.set(c + p, c - q, self.get(1, p, q));
                out.set(c - p, c + q, self.get(2, p, q));
                out.set(c - p, c - q, self.get(3, p, q));
            }
        }
        out
    }
}

pub fn fold_kernel(kernel: &RdKernel) -> FoldedKernel {
    let f = &kernel.field;
    let grid = *f.grid();
    let c = grid.base().center();
    let w = c + 1;
    let mut pieces: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; w * w]);
    for p in 0..=c {
        for q in 0..=p {
            pieces[0][p * w + q] = f.get(c + p, c + q);
            pieces[1][p * w + q] = f.get(c + p, c - q);
            pieces[2][p * w + q] = f.get(c - p, c + q);
            pieces[3][p * w + q] = f.get(c - p, c - q);
        }
    }
    FoldedKernel { grid, pieces }
}
