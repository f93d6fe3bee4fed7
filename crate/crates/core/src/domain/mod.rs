//! Grids on `[-L, L]`, the hourglass kernel domain and quadrature.
//!
//! The hourglass `𝒯 = 𝒯₁ ∪ 𝒯₂` with `𝒯₁ = {0 ≤ x ≤ L, -x ≤ ξ ≤ x}` and
//! `𝒯₂ = {-L ≤ x ≤ 0, x ≤ ξ ≤ -x}`. On a waist-aligned grid (odd node count)
//! membership is decided on node indices alone, so classification is exact.

mod field;
mod gain;
mod profile;
pub mod quadrature;

pub use field::{mirror_to_t2, KernelField, ParityRule, ParityTable};
pub use gain::{End, GainFunction};
pub use profile::CoefficientProfile;
pub use quadrature::{romberg, trapezoid};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform grid `x₀ = -L, …, x_{n-1} = L` with an odd number of nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalGrid {
    half_length: f64,
    n: usize,
}

impl IntervalGrid {
    pub fn new(half_length: f64, n: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Config(format!(
                "half length must be positive, got {half_length}"
            )));
        }
        if n < 3 || n % 2 == 0 {
            return Err(Error::Config(format!(
                "grid needs an odd node count ≥ 3 so that x = 0 is a node, got {n}"
            )));
        }
        Ok(Self { half_length, n })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the node `x = 0`.
    pub fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / (self.n - 1) as f64
    }

    /// `x_i`, with the endpoints pinned to `±L` and exact mirror symmetry.
    pub fn node(&self, i: usize) -> f64 {
        let c = self.center();
        if i == 0 {
            -self.half_length
        } else if i == self.n - 1 {
            self.half_length
        } else {
            (i as f64 - c as f64) * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Index of the mirror node `-x_i`.
    pub fn mirror(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    /// Trapezoid weights.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.n];
        w[0] = 0.5 * h;
        w[self.n - 1] = 0.5 * h;
        w
    }

    /// Linear interpolation of nodal `values` at `x`, clamped to the ends.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let h = self.spacing();
        let t = ((x + self.half_length) / h).clamp(0.0, (self.n - 1) as f64);
        let i = (t.floor() as usize).min(self.n - 2);
        let f = t - i as f64;
        values[i] * (1.0 - f) + values[i + 1] * f
    }
}

/// How a kernel was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Closed-form constant-coefficient solution.
    Explicit,
    /// Successive approximation of the Goursat integral equation.
    Goursat,
    /// Successive-approximation series of the hyperbolic kernel system.
    Series,
}

/// Which part of the hourglass a node pair falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// `ξ = x` (includes the waist node `(0, 0)`).
    Diagonal,
    /// `ξ = -x`, `x ≠ 0`.
    AntiDiagonal,
    InteriorT1,
    InteriorT2,
    Outside,
}

/// Node pairs `(x_i, ξ_j)` of an [`IntervalGrid`] restricted to `𝒯`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourglassGrid {
    base: IntervalGrid,
}

impl HourglassGrid {
    pub fn new(base: IntervalGrid) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &IntervalGrid {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    fn offsets(&self, i: usize, j: usize) -> (i64, i64) {
        let c = self.base.center() as i64;
        (i as i64 - c, j as i64 - c)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let (p, q) = self.offsets(i, j);
        q.abs() <= p.abs()
    }

    pub fn classify(&self, i: usize, j: usize) -> Region {
        let (p, q) = self.offsets(i, j);
        if q == p {
            Region::Diagonal
        } else if q == -p {
            Region::AntiDiagonal
        } else if q.abs() < p.abs() {
            if p > 0 {
                Region::InteriorT1
            } else {
                Region::InteriorT2
            }
        } else {
            Region::Outside
        }
    }

    /// Range of `ξ` indices inside `𝒯` on row `i`.
    pub fn row_range(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        let m = self.base.mirror(i);
        i.min(m)..=i.max(m)
    }

    /// Characteristic index coordinates `(a, b) = (p + q, p - q)` where
    /// `p, q` are the node offsets from the waist. On `𝒯₁` both are `≥ 0`
    /// and `y = a·h`, `z = b·h`.
    pub fn to_characteristic(&self, i: usize, j: usize) -> (i64, i64) {
        let (p, q) = self.offsets(i, j);
        (p + q, p - q)
    }

    /// Inverse of [`Self::to_characteristic`]; `None` off the node lattice.
    pub fn from_characteristic(&self, a: i64, b: i64) -> Option<(usize, usize)> {
        if (a + b) % 2 != 0 {
            return None;
        }
        let c = self.base.center() as i64;
        let i = (a + b) / 2 + c;
        let j = (a - b) / 2 + c;
        let n = self.n() as i64;
        ((0..n).contains(&i) && (0..n).contains(&j)).then_some((i as usize, j as usize))
    }
}

/// `(x, ξ) ↦ (y, z) = (x + ξ, x - ξ)`.
pub fn to_characteristic(x: f64, xi: f64) -> (f64, f64) {
    (x + xi, x - xi)
}

pub fn from_characteristic(y: f64, z: f64) -> (f64, f64) {
    (0.5 * (y + z), 0.5 * (y - z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_basics() {
        let g = IntervalGrid::new(1.0, 201).unwrap();
        assert_eq!(g.spacing(), 0.01);
        assert_eq!(g.node(0), -1.0);
        assert_eq!(g.node(200), 1.0);
        assert_eq!(g.node(100), 0.0);
        for i in 0..201 {
            assert_eq!(g.node(i), -g.node(g.mirror(i)));
        }
        assert!(IntervalGrid::new(1.0, 200).is_err());
        assert!(IntervalGrid::new(0.0, 201).is_err());
        assert!(IntervalGrid::new(1.0, 1).is_err());
    }

    #[test]
    fn classification_is_a_partition() {
        let g = HourglassGrid::new(IntervalGrid::new(2.0, 21).unwrap());
        for i in 0..21 {
            for j in 0..21 {
                let r = g.classify(i, j);
                let x = g.base().node(i);
                let xi = g.base().node(j);
                assert_eq!(r != Region::Outside, g.contains(i, j));
                assert_eq!(g.contains(i, j), xi.abs() <= x.abs() + 1e-12);
                assert_eq!(g.row_range(i).contains(&j), g.contains(i, j));
                match r {
                    Region::InteriorT1 => assert!(x > 0.0 && xi.abs() < x),
                    Region::InteriorT2 => assert!(x < 0.0 && xi.abs() < -x),
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn t1_characteristic_bounds() {
        let g = HourglassGrid::new(IntervalGrid::new(1.0, 41).unwrap());
        let m = 40;
        for i in g.base().center()..41 {
            for j in g.row_range(i) {
                let (a, b) = g.to_characteristic(i, j);
                assert!(a >= 0 && b >= 0 && a + b <= m);
            }
        }
    }

    proptest! {
        #[test]
        fn characteristic_round_trip(n in 1usize..60, i_frac in 0.0f64..1.0, j_frac in 0.0f64..1.0) {
            let n = 2 * n + 1;
            let g = HourglassGrid::new(IntervalGrid::new(1.5, n).unwrap());
            let i = ((n - 1) as f64 * i_frac).round() as usize;
            let j = ((n - 1) as f64 * j_frac).round() as usize;
            let (a, b) = g.to_characteristic(i, j);
            prop_assert_eq!(g.from_characteristic(a, b), Some((i, j)));
            let (x, xi) = (g.base().node(i), g.base().node(j));
            let (y, z) = to_characteristic(x, xi);
            let (x2, xi2) = from_characteristic(y, z);
            prop_assert!((x2 - x).abs() <= 1e-15 && (xi2 - xi).abs() <= 1e-15);
        }
    }
}
