use serde::{Deserialize, Serialize};

use super::IntervalGrid;
use crate::{Error, Result};

/// Boundary an actuator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    /// `x = -L`
    Left,
    /// `x = +L`
    Right,
}

/// A boundary gain `ξ ↦ g(ξ)` sampled on a grid; the actuator value is
/// `∫ g(ξ) s(ξ) dξ` for the state component `s` it multiplies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainFunction {
    pub end: End,
    pub grid: IntervalGrid,
    pub samples: Vec<f64>,
}

impl GainFunction {
    pub fn new(end: End, grid: IntervalGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} gain samples on a {}-node grid",
                samples.len(),
                grid.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite gain sample".into()));
        }
        Ok(Self { end, grid, samples })
    }

    pub fn zeros(end: End, grid: IntervalGrid) -> Self {
        Self {
            end,
            grid,
            samples: vec![0.0; grid.len()],
        }
    }

    /// Quadrature weights `w_j g_j`, so that the actuator value is a plain
    /// dot product with the nodal state.
    pub fn weighted(&self) -> Vec<f64> {
        self.grid
            .weights()
            .iter()
            .zip(&self.samples)
            .map(|(w, g)| w * g)
            .collect()
    }

    /// Trapezoid estimate of `∫ g(ξ) s(ξ) dξ`.
    pub fn apply(&self, state: &[f64]) -> f64 {
        self.weighted().iter().zip(state).map(|(a, b)| a * b).sum()
    }

    /// Trapezoid estimate of `∫ |g|`.
    pub fn l1_norm(&self) -> f64 {
        let abs: Vec<f64> = self.samples.iter().map(|v| v.abs()).collect();
        super::quadrature::trapezoid_uniform(&abs, self.grid.spacing())
    }

    pub fn value_at(&self, xi: f64) -> f64 {
        self.grid.interpolate(&self.samples, xi)
    }

    /// Linear resampling onto another grid over the same interval.
    pub fn resample(&self, grid: &IntervalGrid) -> Result<Self> {
        if (grid.half_length() - self.grid.half_length()).abs()
            > 1e-12 * self.grid.half_length()
        {
            return Err(Error::GridMismatch(
                "gain resampled onto a different interval".into(),
            ));
        }
        let samples = grid.nodes().iter().map(|&x| self.value_at(x)).collect();
        Ok(Self {
            end: self.end,
            grid: *grid,
            samples,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_and_norm() {
        let g = IntervalGrid::new(1.0, 101).unwrap();
        let gain = GainFunction::new(End::Right, g, g.nodes()).unwrap();
        let state = vec![1.0; 101];
        assert!(gain.apply(&state).abs() < 1e-15);
        assert!((gain.l1_norm() - 1.0).abs() < 1e-3);
        let fine = gain.resample(&IntervalGrid::new(1.0, 201).unwrap()).unwrap();
        assert!((fine.value_at(0.123) - 0.123).abs() < 1e-14);
        assert!(GainFunction::new(End::Left, g, vec![0.0; 3]).is_err());
    }
}
