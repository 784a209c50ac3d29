//! Uniform one-dimensional sample grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `len` equally spaced samples from `start` to `end`, both included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub end: f64,
    pub len: usize,
}

impl UniformGrid {
    pub fn new(start: f64, end: f64, len: usize) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::NonFinite("grid bounds"));
        }
        if len < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {len}"
            )));
        }
        if start >= end {
            return Err(Error::InvalidGrid(format!(
                "grid must be ascending: start {start} >= end {end}"
            )));
        }
        Ok(Self { start, end, len })
    }

    /// Grid on `[-half, half]`.
    pub fn symmetric(half: f64, len: usize) -> Result<Self> {
        Self::new(-half, half, len)
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.len - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.len {
            self.end
        } else {
            self.start + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.point(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.start && x <= self.end
    }

    /// True when the grid is mirror symmetric about zero, so that
    /// `point(len - 1 - i) == -point(i)`.
    pub fn is_symmetric(&self) -> bool {
        self.start == -self.end
    }

    /// Index of the sample closest to `x`, if `x` coincides with a sample
    /// to within `tol` grid steps.
    pub fn index_of(&self, x: f64, tol: f64) -> Option<usize> {
        let u = (x - self.start) / self.step();
        let i = u.round();
        if i < 0.0 || i > (self.len - 1) as f64 || (u - i).abs() > tol {
            return None;
        }
        Some(i as usize)
    }

    /// Trapezoid weights `h * (1/2, 1, ..., 1, 1/2)`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.step();
        let mut w = vec![h; self.len];
        w[0] = 0.5 * h;
        w[self.len - 1] = 0.5 * h;
        w
    }

    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len);
        let inner: f64 = values[1..self.len - 1].iter().sum();
        self.step() * (inner + 0.5 * (values[0] + values[self.len - 1]))
    }
}
