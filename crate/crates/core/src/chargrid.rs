//! Triangular grids in characteristic coordinates `(y, z) = (x + ξ, x - ξ)`.
//!
//! `𝒯₁` becomes `{y ≥ 0, z ≥ 0, y + z ≤ 2L}`. With `M` intervals of width
//! `h_c = 2L / M` along each axis, node `(a, b)` sits at `(a h_c, b h_c)` and is
//! valid for `a + b ≤ M`. Arrays are dense `(M+1) × (M+1)` row-major with the
//! invalid half left at zero.

use crate::domain::{HourglassGrid, KernelField};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy)]
pub(crate) struct CharGrid {
    pub m: usize,
    pub half_length: f64,
}

impl CharGrid {
    /// Characteristic grid refining `grid` by `refine` (1 or 2, typically).
    pub fn for_hourglass(grid: &HourglassGrid, refine: usize) -> Self {
        Self {
            m: (grid.n() - 1) * refine,
            half_length: grid.base().half_length(),
        }
    }

    pub fn size(&self) -> usize {
        self.m + 1
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_length / self.m as f64
    }

    /// Abscissae `s_k = (k - M) L / M`, `k = 0..=2M`: every point `(y ± z)/2`
    /// met on the grid. The point `(a - b) h_c / 2` has index `a - b + M`.
    pub fn coefficient_points(&self) -> Vec<f64> {
        let m = self.m as f64;
        (0..=2 * self.m)
            .map(|k| {
                if k == 0 {
                    -self.half_length
                } else if k == 2 * self.m {
                    self.half_length
                } else {
                    (k as f64 - m) * self.half_length / m
                }
            })
            .collect()
    }

    pub fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.size() * self.size()]
    }


    /// In-place cumulative trapezoid along each row (`∫₀` in the second index).
    pub fn cumulative_rows(&self, exec: Execution, data: &mut [f64]) {
        let n = self.size();
        let half = 0.5 * self.step();
        par::for_each_row(exec, data, n, |a, row| {
            let len = n - a;
            let mut acc = 0.0;
            let mut prev = row[0];
            row[0] = 0.0;
            for v in row.iter_mut().take(len).skip(1) {
                let cur = *v;
                acc += half * (prev + cur);
                prev = cur;
                *v = acc;
            }
        });
    }

    /// `dst[b][a] = src[a][b]` over the valid triangle.
    pub fn transpose(&self, src: &[f64], dst: &mut [f64]) {
        let n = self.size();
        for a in 0..n {
            for b in 0..n - a {
                dst[b * n + a] = src[a * n + b];
            }
        }
    }

    /// Copies a `𝒯₁` solution stored as `[a][b]` onto the `x ≥ 0` rows of
    /// `field`. `refine` is the ratio between this grid and the field's grid.
    pub fn write_t1(&self, data: &[f64], field: &mut KernelField, refine: usize) {
        let grid = *field.grid();
        let n = self.size();
        let c = grid.base().center();
        for i in c..grid.n() {
            for j in grid.row_range(i) {
                let (a, b) = grid.to_characteristic(i, j);
                let (a, b) = (a as usize * refine, b as usize * refine);
                field.set(i, j, data[a * n + b]);
            }
        }
    }
}
