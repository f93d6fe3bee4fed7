use std::collections::BTreeMap;

use super::{HourglassGrid, IntervalGrid};
use crate::{Error, Result};

/// Values `K(x_i, ξ_j)` on an [`HourglassGrid`], stored as a dense `n × n`
/// row-major array (row = `x`, column = `ξ`). Entries outside `𝒯` are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelField {
    grid: HourglassGrid,
    values: Vec<f64>,
}

impl KernelField {
    pub fn zeros(grid: HourglassGrid) -> Self {
        let n = grid.n();
        Self {
            grid,
            values: vec![0.0; n * n],
        }
    }

    /// Tabulates `f(x, ξ)` at every node pair inside `𝒯`.
    pub fn from_fn<F>(grid: HourglassGrid, mut f: F) -> Result<Self>
    where
        F: FnMut(f64, f64) -> Result<f64>,
    {
        let mut out = Self::zeros(grid);
        let base = *grid.base();
        for i in 0..grid.n() {
            for j in grid.row_range(i) {
                out.set(i, j, f(base.node(i), base.node(j))?);
            }
        }
        Ok(out)
    }

    pub fn grid(&self) -> &HourglassGrid {
        &self.grid
    }

    pub fn interval(&self) -> &IntervalGrid {
        self.grid.base()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let n = self.grid.n();
        self.values[i * n + j] = v;
    }

    /// Full row `i` (zeros outside `𝒯`).
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.n();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest `|K|` over `𝒯`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest node-wise gap to another field on the same grid.
    pub fn max_abs_diff(&self, other: &KernelField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("kernel fields on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// `(1 + w)·self - w·other`, node-wise. With `w = 1/3` this is the
    /// Richardson combination of an `h/2` and an `h` solution.
    pub fn extrapolate(&self, coarse: &KernelField, w: f64) -> Result<KernelField> {
        if self.grid != coarse.grid {
            return Err(Error::GridMismatch("kernel fields on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&coarse.values)
            .map(|(f, c)| (1.0 + w) * f - w * c)
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> KernelField {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Sign relating a kernel on `𝒯₂` to the `𝒯₁` solution of the reflected
/// problem: `K(x, ξ) = s · K̂(-x, -ξ)` for `x ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityRule {
    Odd,
    Even,
}

impl ParityRule {
    pub fn sign(self) -> f64 {
        match self {
            ParityRule::Odd => -1.0,
            ParityRule::Even => 1.0,
        }
    }
}

/// Parity rules by kernel component name.
#[derive(Debug, Clone, Default)]
pub struct ParityTable {
    rules: BTreeMap<String, ParityRule>,
}

impl ParityTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, component: &str, rule: ParityRule) -> Self {
        self.rules.insert(component.to_string(), rule);
        self
    }

    pub fn rule(&self, component: &str) -> Result<ParityRule> {
        self.rules.get(component).copied().ok_or_else(|| {
            Error::Config(format!("no parity rule for kernel component {component:?}"))
        })
    }
}

/// Completes `target` on `𝒯₂` from a `𝒯₁` solution of the reflected problem.
///
/// `target` keeps its `𝒯₁` values; its `𝒯₂` entries (rows `x < 0`) become
/// `s · reflected(-x, -ξ)`. The waist row `x = 0` is left untouched.
pub fn mirror_to_t2(
    target: &KernelField,
    reflected: &KernelField,
    rule: ParityRule,
) -> Result<KernelField> {
    if target.grid != reflected.grid {
        return Err(Error::GridMismatch("mirror source on a different grid".into()));
    }
    let grid = target.grid;
    let base = grid.base();
    let s = rule.sign();
    let mut out = target.clone();
    for i in 0..base.center() {
        for j in grid.row_range(i) {
            out.set(i, j, s * reflected.get(base.mirror(i), base.mirror(j)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> HourglassGrid {
        HourglassGrid::new(IntervalGrid::new(1.0, n).unwrap())
    }

    #[test]
    fn zero_field_mirrors_to_zero() {
        let z = KernelField::zeros(grid(21));
        let m = mirror_to_t2(&z, &z, ParityRule::Odd).unwrap();
        assert_eq!(m.sup_norm(), 0.0);
    }

    #[test]
    fn odd_rule_is_point_reflection() {
        let g = grid(11);
        let t1 = KernelField::from_fn(g, |x, xi| Ok(if x >= 0.0 { x + 2.0 * xi } else { 0.0 })).unwrap();
        let m = mirror_to_t2(&t1, &t1, ParityRule::Odd).unwrap();
        for i in 0..11 {
            for j in g.row_range(i) {
                let (x, xi) = (g.base().node(i), g.base().node(j));
                assert!((m.get(i, j) - (x + 2.0 * xi)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn missing_rule_is_a_config_error() {
        let t = ParityTable::new().with("uu", ParityRule::Odd);
        assert_eq!(t.rule("uu").unwrap(), ParityRule::Odd);
        assert!(matches!(t.rule("vv"), Err(Error::Config(_))));
    }
}
