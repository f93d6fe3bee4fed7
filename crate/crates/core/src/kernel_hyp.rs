//! Kernel matrix and boundary gains for the 2×2 hyperbolic system
//!
//! ```text
//! u_t = -ε u_x + c₁(x) u + c₂(x) v,
//! v_t =  ε v_x + c₃(x) u + c₄(x) v,      u(-L) = U₁,  v(L) = U₂,
//! ```
//!
//! with the transformation
//!
//! ```text
//! α = u - ∫_{-x}^{x} (K^{uu} u + K^{uv} v) dξ,
//! β = v - ∫_{-x}^{x} (K^{vu} u + K^{vv} v) dξ
//! ```
//!
//! onto `α_t = -ε α_x + c₁ α`, `β_t = ε β_x + c₄ β`, `α(-L) = β(L) = 0`.
//! The pair `(a, b) = (K^{uu}, K^{uv})` solves
//!
//! ```text
//! a_x + a_ξ = [(c₁(x) - c₁(ξ)) a - c₃(ξ) b] / ε,   a(x, -x) = 0,
//! b_x - b_ξ = [(c₁(x) - c₄(ξ)) b - c₂(ξ) a] / ε,   b(x,  x) = c₂(x) / 2ε,
//! ```
//!
//! and `(K^{vv}, K^{vu})` solves the same system with
//! `(c₁, c₂, c₃, c₄) → (-c₄, -c₃, -c₂, -c₁)`. On `𝒯₂` each pair equals minus
//! the point reflection of the `𝒯₁` solution for `cᵢ(s) → -cᵢ(-s)`.

use serde::Serialize;

use crate::chargrid::CharGrid;
use crate::domain::{
    mirror_to_t2, CoefficientProfile, End, GainFunction, HourglassGrid, IntervalGrid,
    KernelField, ParityRule, Provenance,
};
use crate::par::{self, Execution};
use crate::specfun::{bessel_i0, bessel_i1_over_z};
use crate::{Error, Result};

/// Same-speed 2×2 hyperbolic plant on `[-L, L]`.
#[derive(Debug, Clone, Serialize)]
pub struct HypPlant {
    pub epsilon: f64,
    pub c: [CoefficientProfile; 4],
    pub half_length: f64,
}

impl HypPlant {
    pub fn new(epsilon: f64, c: [CoefficientProfile; 4], half_length: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Config(format!("transport speed must be positive, got {epsilon}")));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Config(format!("half length must be positive, got {half_length}")));
        }
        for (k, ci) in c.iter().enumerate() {
            ci.validate(half_length, &format!("c{}", k + 1))?;
        }
        Ok(Self {
            epsilon,
            c,
            half_length,
        })
    }

    pub fn constant(epsilon: f64, c: [f64; 4], half_length: f64) -> Result<Self> {
        Self::new(epsilon, c.map(CoefficientProfile::constant), half_length)
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

    /// `λ̄ = max |cᵢ(x)| / 2ε`, sampled on `points`.
    fn lambda_bar(&self, points: &[f64]) -> f64 {
        let mut m = 0.0_f64;
        for ci in &self.c {
            for &x in points {
                m = m.max(ci.sample(x).abs());
            }
        }
        m / (2.0 * self.epsilon)
    }
}

#[derive(Debug, Clone)]
pub struct HypKernel {
    pub uu: KernelField,
    pub uv: KernelField,
    pub vu: KernelField,
    pub vv: KernelField,
    pub provenance: Provenance,
    pub epsilon: f64,
}

impl HypKernel {
    /// Components in the order `uu, uv, vu, vv`, with their names.
    pub fn components(&self) -> [(&'static str, &KernelField); 4] {
        [
            ("uu", &self.uu),
            ("uv", &self.uv),
            ("vu", &self.vu),
            ("vv", &self.vv),
        ]
    }
}

/// Which of the two coupled kernel pairs a series run belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelPair {
    /// `(K^{uu}, K^{uv})`
    U,
    /// `(K^{vv}, K^{vu})`
    V,
}

/// Sup norms of one series term `F_i` against the analytic bound
/// `4^i λ̄^{i+1} (y + z)^i / i!`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TermRecord {
    pub index: usize,
    /// Sup of the component vanishing on `ξ = -x` (`uu` or `vv`).
    pub sup_transport: f64,
    /// Sup of the component carrying diagonal data (`uv` or `vu`).
    pub sup_coupling: f64,
    /// Bound at `y + z = 2L`.
    pub bound_sup: f64,
    /// Largest pointwise ratio `|F_i| / bound`.
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRun {
    pub pair: KernelPair,
    /// `true` for the reflected problem that fills `𝒯₂`.
    pub reflected: bool,
    pub refine: usize,
    pub terms: Vec<TermRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesTermLedger {
    pub lambda_bar: f64,
    pub runs: Vec<SeriesRun>,
}

impl SeriesTermLedger {
    /// Largest pointwise `|F_i| / bound` over every recorded term.
    pub fn max_ratio(&self) -> f64 {
        self.runs
            .iter()
            .flat_map(|r| r.terms.iter().map(|t| t.max_ratio))
            .fold(0.0, f64::max)
    }

    pub fn max_terms(&self) -> usize {
        self.runs.iter().map(|r| r.terms.len()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SeriesSettings {
    /// Maximum number of series terms.
    pub n_terms: usize,
    /// Truncate once the latest term's sup norm is below this.
    pub tol: f64,
    pub richardson: bool,
    pub execution: Execution,
}

impl Default for SeriesSettings {
    fn default() -> Self {
        Self {
            n_terms: 200,
            tol: 1e-13,
            richardson: true,
            execution: Execution::Parallel,
        }
    }
}

/// `λ̄ e^{8 λ̄ L}`, the a-priori bound on every kernel component.
pub fn global_bound(lambda_bar: f64, half_length: f64) -> f64 {
    lambda_bar * (8.0 * lambda_bar * half_length).exp()
}

/// Solves both kernel pairs by the successive-approximation series in
/// characteristic coordinates.
pub fn hyp_kernel_series(
    plant: &HypPlant,
    grid: &HourglassGrid,
    settings: &SeriesSettings,
) -> Result<(HypKernel, SeriesTermLedger)> {
    plant.check_grid(grid.base())?;
    if settings.n_terms == 0 {
        return Err(Error::Config("series needs at least one term".into()));
    }
    if !(settings.tol > 0.0) {
        return Err(Error::Config("series tolerance must be positive".into()));
    }
    let refines: &[usize] = if settings.richardson { &[1, 2] } else { &[1] };
    let fine_points = CharGrid::for_hourglass(grid, *refines.last().unwrap_or(&1))
        .coefficient_points();
    let lambda_bar = plant.lambda_bar(&fine_points);

    // four problems per resolution: (pair, reflected)
    let jobs: Vec<(usize, KernelPair, bool)> = refines
        .iter()
        .flat_map(|&r| {
            [
                (r, KernelPair::U, false),
                (r, KernelPair::U, true),
                (r, KernelPair::V, false),
                (r, KernelPair::V, true),
            ]
        })
        .collect();
    let solved = par::map_range(settings.execution, jobs.len(), |k| {
        let (refine, pair, reflected) = jobs[k];
        let cg = CharGrid::for_hourglass(grid, refine);
        let p = instance_samples(plant, &cg, pair, reflected);
        solve_pair_t1(&cg, &p, plant.epsilon, lambda_bar, settings).map(|(a, b, terms)| {
            (
                a,
                b,
                SeriesRun {
                    pair,
                    reflected,
                    refine,
                    terms,
                },
            )
        })
    });

    let mut runs = Vec::with_capacity(jobs.len());
    let mut fields = Vec::with_capacity(refines.len());
    let mut it = solved.into_iter();
    for &refine in refines {
        let cg = CharGrid::for_hourglass(grid, refine);
        let mut level = Vec::with_capacity(4);
        for _ in 0..2 {
            let (a1, b1, r1) = it.next().expect("job count")?;
            let (a2, b2, r2) = it.next().expect("job count")?;
            let first = assemble(&cg, grid, refine, &a1, &a2)?;
            let second = assemble(&cg, grid, refine, &b1, &b2)?;
            level.push((first, second));
            runs.push(r1);
            runs.push(r2);
        }
        fields.push(level);
    }
    let pick = |level: &Vec<(KernelField, KernelField)>| -> [KernelField; 4] {
        [
            level[0].0.clone(),
            level[0].1.clone(),
            level[1].1.clone(),
            level[1].0.clone(),
        ]
    };
    let [uu, uv, vu, vv] = if settings.richardson {
        let coarse = pick(&fields[0]);
        let fine = pick(&fields[1]);
        [
            fine[0].extrapolate(&coarse[0], 1.0 / 3.0)?,
            fine[1].extrapolate(&coarse[1], 1.0 / 3.0)?,
            fine[2].extrapolate(&coarse[2], 1.0 / 3.0)?,
            fine[3].extrapolate(&coarse[3], 1.0 / 3.0)?,
        ]
    } else {
        pick(&fields[0])
    };
    Ok((
        HypKernel {
            uu,
            uv,
            vu,
            vv,
            provenance: Provenance::Series,
            epsilon: plant.epsilon,
        },
        SeriesTermLedger { lambda_bar, runs },
    ))
}

/// Coefficient samples `(p₁, p₂, p₃, p₄)` at the characteristic grid's
/// coefficient points for one of the four `𝒯₁` problems.
fn instance_samples(
    plant: &HypPlant,
    cg: &CharGrid,
    pair: KernelPair,
    reflected: bool,
) -> [Vec<f64>; 4] {
    let pts = cg.coefficient_points();
    let s: [Vec<f64>; 4] = std::array::from_fn(|k| plant.c[k].sample_all(&pts));
    let neg = |v: &Vec<f64>| v.iter().map(|x| -x).collect::<Vec<_>>();
    let rev = |v: &Vec<f64>| v.iter().rev().copied().collect::<Vec<_>>();
    let neg_rev = |v: &Vec<f64>| v.iter().rev().map(|x| -x).collect::<Vec<_>>();
    match (pair, reflected) {
        (KernelPair::U, false) => s,
        (KernelPair::U, true) => [neg_rev(&s[0]), neg_rev(&s[1]), neg_rev(&s[2]), neg_rev(&s[3])],
        (KernelPair::V, false) => [neg(&s[3]), neg(&s[2]), neg(&s[1]), neg(&s[0])],
        (KernelPair::V, true) => [rev(&s[3]), rev(&s[2]), rev(&s[1]), rev(&s[0])],
    }
}

fn assemble(
    cg: &CharGrid,
    grid: &HourglassGrid,
    refine: usize,
    t1: &[f64],
    t1_reflected: &[f64],
) -> Result<KernelField> {
    let mut field = KernelField::zeros(*grid);
    cg.write_t1(t1, &mut field, refine);
    let mut src = KernelField::zeros(*grid);
    cg.write_t1(t1_reflected, &mut src, refine);
    mirror_to_t2(&field, &src, ParityRule::Odd)
}

/// Sums the series for one pair on `𝒯₁`. Returns `(a, b)` in `[y][z]`
/// layout and the per-term records.
///
/// `a` integrates along `y` and is kept as `[z][y]` while iterating, `b`
/// integrates along `z` and is kept as `[y][z]`.
fn solve_pair_t1(
    cg: &CharGrid,
    p: &[Vec<f64>; 4],
    eps: f64,
    lambda_bar: f64,
    settings: &SeriesSettings,
) -> Result<(Vec<f64>, Vec<f64>, Vec<TermRecord>)> {
    let n = cg.size();
    let m = cg.m;
    let hc = cg.step();
    let exec = settings.execution;
    let inv = 1.0 / (2.0 * eps);

    // coefficient tables; row index first
    let mut ka1 = cg.zeros();
    let mut ka3 = cg.zeros();
    let mut kb1 = cg.zeros();
    let mut kb2 = cg.zeros();
    for r in 0..n {
        for s in 0..n - r {
            // A layout: r = z, s = y
            let (y, z) = (s, r);
            ka1[r * n + s] = (p[0][y + z + m] - p[0][y + m - z]) * inv;
            ka3[r * n + s] = -p[2][y + m - z] * inv;
            // B layout: r = y, s = z
            let (y, z) = (r, s);
            kb1[r * n + s] = (p[0][y + z + m] - p[3][y + m - z]) * inv;
            kb2[r * n + s] = -p[1][y + m - z] * inv;
        }
    }

    let mut fa = cg.zeros();
    let mut fb = cg.zeros();
    for y in 0..n {
        fb[y * n..y * n + (n - y)].fill(p[1][y + m] * inv);
    }
    let mut sum_a = fa.clone();
    let mut sum_b = fb.clone();
    let mut fa_t = cg.zeros();
    let mut fb_t = cg.zeros();
    let mut records = Vec::new();
    records.push(term_record(cg, 0, &fa, &fb, lambda_bar, hc)?);

    for i in 1..settings.n_terms {
        cg.transpose(&fa, &mut fa_t);
        cg.transpose(&fb, &mut fb_t);
        {
            let (fa_old, fb_t) = (&fa.clone(), &fb_t);
            let (ka1, ka3) = (&ka1, &ka3);
            par::for_each_row(exec, &mut fa, n, |r, row| {
                for s in 0..n - r {
                    let k = r * n + s;
                    row[s] = ka1[k] * fa_old[k] + ka3[k] * fb_t[k];
                }
            });
        }
        {
            let (fb_old, fa_t) = (&fb.clone(), &fa_t);
            let (kb1, kb2) = (&kb1, &kb2);
            par::for_each_row(exec, &mut fb, n, |r, row| {
                for s in 0..n - r {
                    let k = r * n + s;
                    row[s] = kb1[k] * fb_old[k] + kb2[k] * fa_t[k];
                }
            });
        }
        cg.cumulative_rows(exec, &mut fa);
        cg.cumulative_rows(exec, &mut fb);
        let rec = term_record(cg, i, &fa, &fb, lambda_bar, hc)?;
        for (s, f) in sum_a.iter_mut().zip(&fa) {
            *s += f;
        }
        for (s, f) in sum_b.iter_mut().zip(&fb) {
            *s += f;
        }
        let latest = rec.sup_transport.max(rec.sup_coupling);
        records.push(rec);
        if !latest.is_finite() {
            return Err(Error::Numeric("series term became non-finite".into()));
        }
        if latest < settings.tol {
            let mut a = cg.zeros();
            cg.transpose(&sum_a, &mut a);
            return Ok((a, sum_b, records));
        }
    }
    let last = records.last().map_or(f64::NAN, |r| r.sup_transport.max(r.sup_coupling));
    Err(Error::Convergence {
        iterations: settings.n_terms,
        residual: last,
    })
}

/// Sup norms of term `i` and the pointwise bound check.
fn term_record(
    cg: &CharGrid,
    i: usize,
    fa: &[f64],
    fb: &[f64],
    lambda_bar: f64,
    hc: f64,
) -> Result<TermRecord> {
    let n = cg.size();
    let ln_fact: f64 = (1..=i).map(|k| (k as f64).ln()).sum();
    let ln_coef = i as f64 * 4f64.ln() + (i + 1) as f64 * lambda_bar.ln() - ln_fact;
    let bound_at = |steps: usize| -> f64 {
        if lambda_bar == 0.0 {
            return 0.0;
        }
        if i == 0 {
            return lambda_bar;
        }
        if steps == 0 {
            return 0.0;
        }
        (ln_coef + i as f64 * (steps as f64 * hc).ln()).exp()
    };
    let mut rec = TermRecord {
        index: i,
        sup_transport: 0.0,
        sup_coupling: 0.0,
        bound_sup: bound_at(cg.m),
        max_ratio: 0.0,
    };
    // both layouts index the valid triangle by r + s = (y + z) / h_c
    for r in 0..n {
        for s in 0..n - r {
            let bound = bound_at(r + s);
            let (va, vb) = (fa[r * n + s].abs(), fb[r * n + s].abs());
            rec.sup_transport = rec.sup_transport.max(va);
            rec.sup_coupling = rec.sup_coupling.max(vb);
            let v = va.max(vb);
            if v == 0.0 {
                continue;
            }
            let ratio = if bound > 0.0 { v / bound } else { f64::INFINITY };
            rec.max_ratio = rec.max_ratio.max(ratio);
            if ratio > 1.0 + 1e-9 {
                return Err(Error::BoundViolation {
                    term: i,
                    value: v,
                    bound,
                });
            }
        }
    }
    Ok(rec)
}

/// Closed-form kernels for constant coefficients with `c₂ c₃ ≥ 0`:
///
/// ```text
/// K^{uu} = K^{vv} = -(c₂c₃ / 2ε²) (x + ξ) e^{θ(x-ξ)} I₁(q)/q,
/// K^{uv} =  (c₂ / 2ε) e^{θ(x-ξ)} I₀(q),
/// K^{vu} = -(c₃ / 2ε) e^{θ(x-ξ)} I₀(q),
/// θ = (c₁ - c₄) / 2ε,   q = √(c₂c₃ (x² - ξ²)) / ε.
/// ```
pub fn hyp_kernel_explicit(plant: &HypPlant, grid: &HourglassGrid) -> Result<HypKernel> {
    plant.check_grid(grid.base())?;
    let c = constant_coefficients(plant)?;
    let eps = plant.epsilon;
    let f = |which: usize| {
        KernelField::from_fn(*grid, |x, xi| {
            let [uu, uv, vu] = hyp_kernel_value(c, eps, x, xi)?;
            Ok([uu, uv, vu, uu][which])
        })
    };
    Ok(HypKernel {
        uu: f(0)?,
        uv: f(1)?,
        vu: f(2)?,
        vv: f(3)?,
        provenance: Provenance::Explicit,
        epsilon: eps,
    })
}

/// `[K^{uu}, K^{uv}, K^{vu}]` at one point (`K^{vv} = K^{uu}`).
pub fn hyp_kernel_value(c: [f64; 4], eps: f64, x: f64, xi: f64) -> Result<[f64; 3]> {
    let prod = c[1] * c[2];
    if prod < 0.0 {
        return Err(Error::Unsupported(
            "closed-form kernel needs c₂c₃ ≥ 0; use the series solver".into(),
        ));
    }
    let theta = (c[0] - c[3]) / (2.0 * eps);
    let e = (theta * (x - xi)).exp();
    let q = (prod * (x * x - xi * xi).max(0.0)).sqrt() / eps;
    let i0 = bessel_i0(q)?;
    Ok([
        -(prod / (2.0 * eps * eps)) * (x + xi) * e * bessel_i1_over_z(q)?,
        c[1] / (2.0 * eps) * e * i0,
        -c[2] / (2.0 * eps) * e * i0,
    ])
}

fn constant_coefficients(plant: &HypPlant) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (k, ci) in plant.c.iter().enumerate() {
        out[k] = ci.as_constant().ok_or_else(|| {
            Error::Unsupported(format!(
                "closed-form kernel needs constant coefficients (c{} varies); use the series solver",
                k + 1
            ))
        })?;
    }
    if out[1] * out[2] < 0.0 {
        return Err(Error::Unsupported(
            "closed-form kernel needs c₂c₃ ≥ 0; use the series solver".into(),
        ));
    }
    Ok(out)
}

/// Gains of the two controls, each acting on both states:
/// `U₁ = ∫ (u1_u u + u1_v v)`, `U₂ = ∫ (u2_u u + u2_v v)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypGains {
    pub u1_u: GainFunction,
    pub u1_v: GainFunction,
    pub u2_u: GainFunction,
    pub u2_v: GainFunction,
}

impl HypGains {
    pub fn zeros(grid: IntervalGrid) -> Self {
        Self {
            u1_u: GainFunction::zeros(End::Left, grid),
            u1_v: GainFunction::zeros(End::Left, grid),
            u2_u: GainFunction::zeros(End::Right, grid),
            u2_v: GainFunction::zeros(End::Right, grid),
        }
    }

    pub fn all(&self) -> [(&'static str, &GainFunction); 4] {
        [
            ("U1_u", &self.u1_u),
            ("U1_v", &self.u1_v),
            ("U2_u", &self.u2_u),
            ("U2_v", &self.u2_v),
        ]
    }
}

/// `U₁ = -∫ (K^{uu}(-L,ξ) u + K^{uv}(-L,ξ) v)` (the oriented integral at
/// `x = -L` runs from `L` to `-L`) and `U₂ = ∫ (K^{vu}(L,ξ) u + K^{vv}(L,ξ) v)`.
pub fn hyp_gains(kernel: &HypKernel) -> Result<HypGains> {
    let grid = *kernel.uu.interval();
    let last = grid.len() - 1;
    let neg = |f: &KernelField| f.row(0).iter().map(|v| -v).collect::<Vec<_>>();
    Ok(HypGains {
        u1_u: GainFunction::new(End::Left, grid, neg(&kernel.uu))?,
        u1_v: GainFunction::new(End::Left, grid, neg(&kernel.uv))?,
        u2_u: GainFunction::new(End::Right, grid, kernel.vu.row(last).to_vec())?,
        u2_v: GainFunction::new(End::Right, grid, kernel.vv.row(last).to_vec())?,
    })
}
