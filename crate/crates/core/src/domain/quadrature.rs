//! Composite trapezoid rule on uniform grids and Romberg refinement for
//! integrands that can be evaluated anywhere.

use super::IntervalGrid;
use crate::{Error, Result};

/// Composite trapezoid estimate of `∫ values` over `grid`.
pub fn trapezoid(grid: &IntervalGrid, values: &[f64]) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} values on a {}-node grid",
            values.len(),
            grid.len()
        )));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Numeric("NaN in quadrature input".into()));
    }
    Ok(trapezoid_uniform(values, grid.spacing()))
}

/// Trapezoid sum for samples with uniform spacing `h`.
pub fn trapezoid_uniform(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Romberg integration of `f` over `[a, b]`.
///
/// The trapezoid sum is refined by interval doubling, starting from
/// `2^min_levels` panels, with the Richardson table extrapolated at each level.
/// Stops once two successive diagonal entries differ by less than
/// `rel_tol · |estimate|`.
pub fn romberg<F>(f: F, a: f64, b: f64, rel_tol: f64, max_levels: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    const MIN_LEVELS: usize = 4;
    if !(rel_tol > 0.0) {
        return Err(Error::Config("quadrature tolerance must be positive".into()));
    }
    let width = b - a;
    if width == 0.0 {
        return Ok(0.0);
    }
    let mut panels = 1usize << MIN_LEVELS;
    let mut h = width / panels as f64;
    let mut sum = 0.5 * (f(a)? + f(b)?);
    for k in 1..panels {
        sum += f(a + k as f64 * h)?;
    }
    let mut row = vec![h * sum];
    check_finite(row[0])?;
    for level in 1..=max_levels {
        // add midpoints of the current panels
        let mut mid = 0.0;
        for k in 0..panels {
            mid += f(a + (k as f64 + 0.5) * h)?;
        }
        sum += mid;
        panels *= 2;
        h *= 0.5;
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(h * sum);
        let mut factor = 1.0;
        for j in 0..row.len() {
            factor *= 4.0;
            let r = next[j] + (next[j] - row[j]) / (factor - 1.0);
            next.push(r);
        }
        let (prev_best, best) = (row[row.len() - 1], next[next.len() - 1]);
        check_finite(best)?;
        let diff = (best - prev_best).abs();
        if level >= 2 && (diff <= rel_tol * best.abs() || diff <= f64::MIN_POSITIVE) {
            return Ok(best);
        }
        row = next;
    }
    Err(Error::Numeric(format!(
        "Romberg quadrature did not reach relative tolerance {rel_tol:e} in {max_levels} levels"
    )))
}

fn check_finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric("non-finite quadrature estimate".into()))
    }
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss–Legendre rule on `[a, b]` (exact for degree ≤ 9).
pub fn gauss_legendre5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS)
        .map(|(t, w)| w * f(mid + half * t))
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_examples() {
        let g = IntervalGrid::new(1.0, 201).unwrap();
        let ones = vec![1.0; 201];
        assert!((trapezoid(&g, &ones).unwrap() - 2.0).abs() < 1e-14);
        let odd = g.nodes();
        assert!(trapezoid(&g, &odd).unwrap().abs() < 1e-15);
        let sq: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
        // exact error of the rule for x² is h²·(b-a)/6
        let est = trapezoid(&g, &sq).unwrap();
        assert!((est - 2.0 / 3.0).abs() < 1e-4);
        assert!((est - 2.0 / 3.0 - 1e-4 * 2.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_rejects_nan() {
        let g = IntervalGrid::new(1.0, 5).unwrap();
        assert!(matches!(
            trapezoid(&g, &[0.0, 1.0, f64::NAN, 1.0, 0.0]),
            Err(Error::Numeric(_))
        ));
        assert!(trapezoid(&g, &[0.0; 4]).is_err());
    }

    #[test]
    fn romberg_smooth() {
        let v = romberg(|x| Ok(x.exp()), 0.0, 1.0, 1e-12, 20).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
        let v = romberg(|x| Ok(x.sin()), 0.0, std::f64::consts::PI, 1e-10, 20).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn gauss_legendre_degree_nine() {
        let v = gauss_legendre5(|x| x.powi(9) + x.powi(8), 0.0, 2.0);
        let exact = 2f64.powi(10) / 10.0 + 2f64.powi(9) / 9.0;
        assert!((v - exact).abs() < 1e-11 * exact);
    }
}
