//! Unilateral versus bilateral control effort for constant-coefficient
//! reaction-diffusion plants.
//!
//! With `δ = L √(λ/ε)` and `Ĩ(z) = I₁(z)/z`, the `L¹` norms are
//!
//! ```text
//! J₁(δ) = δ² ∫_{-1}^{1} |w(ξ)| Ĩ(δ √(4 - (ξ + 1)²)) dξ,
//! J₂(δ) = δ² ∫_{-1}^{1} (1 + ξ) Ĩ(δ √(1 - ξ²)) dξ,
//! ```
//!
//! where the unilateral weight is `w(ξ) = ξ` ([`UnilateralVariant::Literal`])
//! or `w(ξ) = ξ + 1` ([`UnilateralVariant::Shifted`], the one-ended kernel on
//! `[0, 2L]` moved to `[-L, L]`). `J₂` is the combined `L¹` norm of both
//! bilateral gains.

use serde::{Deserialize, Serialize};

use crate::domain::quadrature::romberg;
use crate::domain::{End, GainFunction, IntervalGrid};
use crate::kernel_rd::RdPlant;
use crate::par::{self, Execution};
use crate::specfun::bessel_i1_over_z;
use crate::{Error, Result};

/// Largest `δ` accepted by [`j_norms`].
pub const DELTA_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnilateralVariant {
    /// Weight `ξ`.
    Literal,
    /// Weight `ξ + L`.
    #[default]
    Shifted,
}

impl UnilateralVariant {
    pub const ALL: [UnilateralVariant; 2] = [UnilateralVariant::Literal, UnilateralVariant::Shifted];

    fn weight(self, xi: f64, half_length: f64) -> f64 {
        match self {
            UnilateralVariant::Literal => xi,
            UnilateralVariant::Shifted => xi + half_length,
        }
    }
}

/// One-ended gain at `x = L`:
/// `g(ξ) = -(λ/ε) w(ξ) Ĩ(√(λ/ε) √(4L² - (ξ + L)²))`.
pub fn unilateral_rd_gain(
    plant: &RdPlant,
    grid: &IntervalGrid,
    variant: UnilateralVariant,
) -> Result<GainFunction> {
    let lambda = match plant.lambda.as_constant() {
        Some(l) if l >= 0.0 => l,
        Some(l) => {
            return Err(Error::Unsupported(format!(
                "unilateral closed form needs λ ≥ 0, got {l}"
            )))
        }
        None => return Err(Error::Unsupported("unilateral closed form needs a constant λ".into())),
    };
    if (grid.half_length() - plant.half_length).abs() > 1e-12 * plant.half_length {
        return Err(Error::GridMismatch("gain grid and plant lengths differ".into()));
    }
    let a2 = lambda / plant.epsilon;
    let a = a2.sqrt();
    let l = plant.half_length;
    let samples = grid
        .nodes()
        .iter()
        .map(|&xi| {
            let s = (4.0 * l * l - (xi + l).powi(2)).max(0.0);
            Ok(-a2 * variant.weight(xi, l) * bessel_i1_over_z(a * s.sqrt())?)
        })
        .collect::<Result<Vec<_>>>()?;
    GainFunction::new(End::Right, *grid, samples)
}

/// `J₁` for both unilateral variants and `J₂` at one `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JNorms {
    pub delta: f64,
    pub j1_literal: f64,
    pub j1_shifted: f64,
    pub j2: f64,
}

impl JNorms {
    pub fn j1(&self, variant: UnilateralVariant) -> f64 {
        match variant {
            UnilateralVariant::Literal => self.j1_literal,
            UnilateralVariant::Shifted => self.j1_shifted,
        }
    }
}

/// Default relative tolerance of the effort quadratures.
pub const QUAD_TOL: f64 = 1e-8;
const QUAD_LEVELS: usize = 20;

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= DELTA_MAX) {
        return Err(Error::Domain(format!("δ must lie in (0, {DELTA_MAX}], got {delta}")));
    }
    Ok(())
}

pub fn j1(delta: f64, variant: UnilateralVariant, rel_tol: f64) -> Result<f64> {
    check_delta(delta)?;
    let f = |xi: f64| -> Result<f64> {
        let s = (4.0 - (xi + 1.0).powi(2)).max(0.0);
        Ok(variant.weight(xi, 1.0).abs() * bessel_i1_over_z(delta * s.sqrt())?)
    };
    let integral = match variant {
        // |ξ| has a kink at 0
        UnilateralVariant::Literal => {
            romberg(f, -1.0, 0.0, rel_tol, QUAD_LEVELS)? + romberg(f, 0.0, 1.0, rel_tol, QUAD_LEVELS)?
        }
        UnilateralVariant::Shifted => romberg(f, -1.0, 1.0, rel_tol, QUAD_LEVELS)?,
    };
    Ok(delta * delta * integral)
}

pub fn j2(delta: f64, rel_tol: f64) -> Result<f64> {
    check_delta(delta)?;
    let f = |xi: f64| -> Result<f64> {
        let s = (1.0 - xi * xi).max(0.0);
        Ok((1.0 + xi) * bessel_i1_over_z(delta * s.sqrt())?)
    };
    Ok(delta * delta * romberg(f, -1.0, 1.0, rel_tol, QUAD_LEVELS)?)
}

pub fn j_norms(delta: f64, rel_tol: f64) -> Result<JNorms> {
    Ok(JNorms {
        delta,
        j1_literal: j1(delta, UnilateralVariant::Literal, rel_tol)?,
        j1_shifted: j1(delta, UnilateralVariant::Shifted, rel_tol)?,
        j2: j2(delta, rel_tol)?,
    })
}

/// Bisection for a sign change of `f` on `[lo, hi]`, to interval width `tol`.
pub fn bisect<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::Config(format!("invalid bracket [{lo}, {hi}] or tolerance {tol}")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NotFound { lo, hi });
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// `δ*` with `J₁(δ*) = J₂(δ*)` for one variant, by bisection on `[lo, hi]`.
pub fn find_crossover(
    variant: UnilateralVariant,
    lo: f64,
    hi: f64,
    tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    bisect(|d| Ok(j1(d, variant, rel_tol)? - j2(d, rel_tol)?), lo, hi, tol)
}

#[derive(Debug, Clone, Copy)]
pub struct EffortSettings {
    pub rel_tol: f64,
    pub crossover_tol: f64,
    pub execution: Execution,
}

impl Default for EffortSettings {
    fn default() -> Self {
        Self {
            rel_tol: QUAD_TOL,
            crossover_tol: 1e-6,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffortCurve {
    pub points: Vec<JNorms>,
    /// Crossover of the literal variant, if one was bracketed by the samples.
    pub crossover_literal: Option<f64>,
    pub crossover_shifted: Option<f64>,
}

impl EffortCurve {
    pub fn crossover(&self, variant: UnilateralVariant) -> Option<f64> {
        match variant {
            UnilateralVariant::Literal => self.crossover_literal,
            UnilateralVariant::Shifted => self.crossover_shifted,
        }
    }

    /// Rebuilds a curve from its tabulated points, without crossovers.
    pub fn from_points(points: Vec<JNorms>) -> Self {
        Self {
            points,
            crossover_literal: None,
            crossover_shifted: None,
        }
    }
}

/// Tabulates the norms over `deltas` (evaluated concurrently) and locates
/// each variant's crossover inside the first sample interval where
/// `J₁ - J₂` changes sign. A single sample yields no crossover.
pub fn effort_curve(deltas: &[f64], settings: &EffortSettings) -> Result<EffortCurve> {
    if deltas.is_empty() {
        return Err(Error::Config("effort curve needs at least one δ".into()));
    }
    for d in deltas {
        check_delta(*d)?;
    }
    if deltas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("δ samples must be strictly increasing".into()));
    }
    let points = par::map_range(settings.execution, deltas.len(), |k| {
        j_norms(deltas[k], settings.rel_tol)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let crossing = |variant: UnilateralVariant| -> Result<Option<f64>> {
        let diff = |p: &JNorms| p.j1(variant) - p.j2;
        for w in points.windows(2) {
            let (a, b) = (diff(&w[0]), diff(&w[1]));
            if a == 0.0 {
                return Ok(Some(w[0].delta));
            }
            if a.signum() != b.signum() {
                return find_crossover(
                    variant,
                    w[0].delta,
                    w[1].delta,
                    settings.crossover_tol,
                    settings.rel_tol,
                )
                .map(Some);
            }
        }
        Ok(None)
    };
    Ok(EffortCurve {
        crossover_literal: crossing(UnilateralVariant::Literal)?,
        crossover_shifted: crossing(UnilateralVariant::Shifted)?,
        points,
    })
}

/// `n` evenly spaced values on `[lo, hi]` (`[lo]` for `n = 1`).
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel_rd::rd_gain_explicit;
    use proptest::prelude::*;

    #[test]
    fn unilateral_gain_examples() {
        let grid = IntervalGrid::new(1.0, 21).unwrap();
        let zero = RdPlant::constant(1.0, 0.0, 1.0).unwrap();
        let g = unilateral_rd_gain(&zero, &grid, UnilateralVariant::Shifted).unwrap();
        assert!(g.samples.iter().all(|&v| v == 0.0));
        let p = RdPlant::constant(1.0, 1.0, 1.0).unwrap();
        let g = unilateral_rd_gain(&p, &grid, UnilateralVariant::Shifted).unwrap();
        assert_eq!(g.samples[0], 0.0);
        assert!((g.samples[10] + 0.7124586735365784).abs() < 1e-14);
        let lit = unilateral_rd_gain(&p, &grid, UnilateralVariant::Literal).unwrap();
        assert_eq!(lit.samples[10], 0.0);
        let neg = RdPlant::constant(1.0, -1.0, 1.0).unwrap();
        assert!(matches!(
            unilateral_rd_gain(&neg, &grid, UnilateralVariant::Shifted),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn paper_regime() {
        let a = j_norms(1.0, QUAD_TOL).unwrap();
        assert!(a.j1_literal < a.j2);
        let b = j_norms(4.0, QUAD_TOL).unwrap();
        assert!(b.j2 < b.j1_literal && b.j2 < b.j1_shifted);
        // reference values from an independent adaptive quadrature
        assert!((a.j2 / 1.0862 - 1.0).abs() < 1e-4);
        assert!((b.j1_literal / 386.5 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn small_delta_limits() {
        let n = j_norms(0.01, QUAD_TOL).unwrap();
        assert!((n.j1_shifted / n.j2 - 1.0).abs() < 0.01);
        assert!((n.j1_literal / n.j2 - 0.5).abs() < 0.01);
        assert!((n.j2 / 1e-4 - 1.0).abs() < 0.01);
        assert!(j_norms(0.0, QUAD_TOL).is_err());
        assert!(j_norms(10.5, QUAD_TOL).is_err());
    }

    #[test]
    fn crossover_literal_variant() {
        let d = find_crossover(UnilateralVariant::Literal, 0.5, 5.0, 1e-6, QUAD_TOL).unwrap();
        assert!((d - 1.8017236802318988).abs() < 1e-5);
        let fine = find_crossover(UnilateralVariant::Literal, 0.5, 5.0, 1e-6, 1e-10).unwrap();
        assert!((d - fine).abs() < 1e-6);
        assert!(matches!(
            find_crossover(UnilateralVariant::Shifted, 0.5, 5.0, 1e-6, QUAD_TOL),
            Err(Error::NotFound { .. })
        ));
    }

    #[test]
    fn bisect_linear() {
        let d = bisect(|x| Ok(x - (2.0 - x)), 0.0, 3.0, 1e-12).unwrap();
        assert!((d - 1.0).abs() < 1e-11);
    }

    #[test]
    fn curve_monotone_and_single_sample() {
        let deltas = linspace(0.5, 5.0, 10);
        let c = effort_curve(&deltas, &EffortSettings::default()).unwrap();
        for w in c.points.windows(2) {
            assert!(w[1].j2 > w[0].j2);
            assert!(w[1].j1_shifted > w[0].j1_shifted);
            assert!(w[1].j1_literal > w[0].j1_literal);
        }
        assert!(c.crossover_literal.is_some());
        assert!(c.crossover_shifted.is_none());
        let one = effort_curve(&[2.0], &EffortSettings::default()).unwrap();
        assert_eq!(one.points.len(), 1);
        assert!(one.crossover_literal.is_none() && one.crossover_shifted.is_none());
        assert!(effort_curve(&[2.0, 1.0], &EffortSettings::default()).is_err());
    }

    #[test]
    fn bilateral_gain_norms_sum_to_j2() {
        for delta in [0.5, 2.0, 4.0] {
            let p = RdPlant::constant(1.0, delta * delta, 1.0).unwrap();
            let grid = IntervalGrid::new(1.0, 2001).unwrap();
            let r = rd_gain_explicit(&p, &grid, End::Right).unwrap();
            let l = rd_gain_explicit(&p, &grid, End::Left).unwrap();
            assert!((r.l1_norm() - l.l1_norm()).abs() < 1e-12 * r.l1_norm());
            let j = j2(delta, 1e-10).unwrap();
            assert!(((r.l1_norm() + l.l1_norm()) / j - 1.0).abs() < 1e-5);
        }
    }

    proptest! {
        #[test]
        fn norms_positive(delta in 0.05..10.0f64) {
            let n = j_norms(delta, 1e-8).unwrap();
            prop_assert!(n.j1_literal > 0.0 && n.j1_shifted > 0.0 && n.j2 > 0.0);
            prop_assert!(n.j1_shifted > n.j2);
        }
    }
}
