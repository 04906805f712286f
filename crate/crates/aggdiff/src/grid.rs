//! Uniform tensor-product grids on `[-L, L]^n` with midpoint quadrature
//! and second-order finite differences.
//!
//! Cells are closed boxes of side `h = 2L/N`; cell centers along each axis
//! sit at `x_i = -L + (i + 1/2) h`. Fields are flat `Vec<f64>` in row-major
//! order with axis 0 slowest. All differential operators are O(h^2):
//! centered stencils in the interior, one-sided second-order stencils at
//! the boundary.

use crate::error::{Error, Result};

/// Maximum supported dimension.
pub const MAX_DIM: usize = 3;

/// A uniform grid on `[-L, L]^n`, `n` in `{1, 2, 3}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    cells_per_axis: usize,
    spacing: f64,
    axis_centers: Vec<f64>,
}

impl Grid {
    /// Builds a grid. `cells_per_axis` must be a power of two and at least 16
    /// (the FFT convolution path and the refinement self-checks rely on it);
    /// `half_width` must be positive and finite.
    pub fn new(dim: usize, half_width: f64, cells_per_axis: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} not in 1..={MAX_DIM}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width {half_width} must be positive and finite"
            )));
        }
        if cells_per_axis < 16 || !cells_per_axis.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "cells per axis {cells_per_axis} must be a power of two >= 16"
            )));
        }
        let spacing = 2.0 * half_width / cells_per_axis as f64;
        let axis_centers = (0..cells_per_axis)
            .map(|i| -half_width + (i as f64 + 0.5) * spacing)
            .collect();
        Ok(Self {
            dim,
            half_width,
            cells_per_axis,
            spacing,
            axis_centers,
        })
    }

    /// Spatial dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Domain half-width `L`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Cells per axis `N`.
    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    /// Cell side `h = 2L/N`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of cells `N^n`.
    pub fn total_cells(&self) -> usize {
        self.cells_per_axis.pow(self.dim as u32)
    }

    /// Cell volume `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Cell centers along one axis (all axes are identical).
    pub fn axis_centers(&self) -> &[f64] {
        &self.axis_centers
    }

    /// Row-major stride of `axis` (axis 0 slowest).
    pub fn stride(&self, axis: usize) -> usize {
        self.cells_per_axis.pow((self.dim - 1 - axis) as u32)
    }

    /// Per-axis index of a flat cell index along `axis`.
    #[inline]
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.stride(axis)) % self.cells_per_axis
    }

    /// Center coordinates of a flat cell index (only the first `n` entries
    /// are meaningful).
    #[inline]
    pub fn center(&self, flat: usize) -> [f64; MAX_DIM] {
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = self.axis_centers[self.axis_index(flat, axis)];
        }
        x
    }

    /// `|x|^2` at the center of a flat cell index.
    #[inline]
    pub fn radius_sq(&self, flat: usize) -> f64 {
        let x = self.center(flat);
        x[..self.dim].iter().map(|v| v * v).sum()
    }

    /// Checks that `field` has one value per cell.
    pub fn check_field(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.total_cells() {
            return Err(Error::FieldShape {
                expected: self.total_cells(),
                found: field.len(),
            });
        }
        Ok(())
    }

    /// Midpoint quadrature `h^n * sum(f)`, with Neumaier-compensated
    /// summation so that long solver runs can hold mass drift near
    /// round-off even on multi-million-cell grids.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        self.cell_volume() * compensated_sum(field)
    }

    /// Quadrature of `f * g` (used for the many bilinear functionals).
    pub fn integrate_product(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), g.len());
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (a, b) in f.iter().zip(g) {
            let v = a * b;
            let t = sum + v;
            comp += if sum.abs() >= v.abs() {
                (sum - t) + v
            } else {
                (v - t) + sum
            };
            sum = t;
        }
        self.cell_volume() * (sum + comp)
    }

    /// Gradient: one field per axis, centered differences in the interior,
    /// second-order one-sided stencils at the boundary.
    pub fn gradient(&self, field: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_field(field)?;
        let mut out = Vec::with_capacity(self.dim);
        for axis in 0..self.dim {
            out.push(self.derivative(field, axis));
        }
        Ok(out)
    }

    /// First derivative along one axis (same stencils as [`Self::gradient`]).
    pub fn derivative(&self, field: &[f64], axis: usize) -> Vec<f64> {
        let n = self.cells_per_axis;
        let s = self.stride(axis);
        let inv2h = 1.0 / (2.0 * self.spacing);
        let mut d = vec![0.0; field.len()];
        for (flat, slot) in d.iter_mut().enumerate() {
            let i = self.axis_index(flat, axis);
            *slot = if i == 0 {
                (-3.0 * field[flat] + 4.0 * field[flat + s] - field[flat + 2 * s]) * inv2h
            } else if i == n - 1 {
                (3.0 * field[flat] - 4.0 * field[flat - s] + field[flat - 2 * s]) * inv2h
            } else {
                (field[flat + s] - field[flat - s]) * inv2h
            };
        }
        d
    }

    /// Laplacian: sum of per-axis second differences, one-sided
    /// second-order stencils at the boundary.
    pub fn laplacian(&self, field: &[f64]) -> Result<Vec<f64>> {
        self.check_field(field)?;
        let n = self.cells_per_axis;
        let inv_h2 = 1.0 / (self.spacing * self.spacing);
        let mut out = vec![0.0; field.len()];
        for axis in 0..self.dim {
            let s = self.stride(axis);
            for (flat, slot) in out.iter_mut().enumerate() {
                let i = self.axis_index(flat, axis);
                *slot += inv_h2
                    * if i == 0 {
                        2.0 * field[flat] - 5.0 * field[flat + s] + 4.0 * field[flat + 2 * s]
                            - field[flat + 3 * s]
                    } else if i == n - 1 {
                        2.0 * field[flat] - 5.0 * field[flat - s] + 4.0 * field[flat - 2 * s]
                            - field[flat - 3 * s]
                    } else {
                        field[flat + s] - 2.0 * field[flat] + field[flat - s]
                    };
            }
        }
        Ok(out)
    }

    /// Maximum absolute field value over boundary cells (any axis index 0
    /// or N-1). Used by the solver's truncation guard and the spectral
    /// boundary-decay check.
    pub fn boundary_max_abs(&self, field: &[f64]) -> f64 {
        let n = self.cells_per_axis;
        let mut max = 0.0f64;
        for (flat, v) in field.iter().enumerate() {
            for axis in 0..self.dim {
                let i = self.axis_index(flat, axis);
                if i == 0 || i == n - 1 {
                    max = max.max(v.abs());
                    break;
                }
            }
        }
        max
    }
}

/// Neumaier-compensated sum of a slice.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}
