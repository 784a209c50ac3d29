use serde::{Deserialize, Serialize};

use super::{MarginalFunction, MarginalSlice, TomographyParams, SLICE_NORMALIZATION_TOL};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Trapezoid mean and variance of a normalized slice.
pub fn moments(slice: &MarginalSlice) -> Result<Moments> {
    let g = &slice.x_grid;
    let norm = slice.integral();
    if !norm.is_finite() || (norm - 1.0).abs() > SLICE_NORMALIZATION_TOL {
        return Err(Error::NotNormalized { measured: norm });
    }
    let x = g.points();
    let first: Vec<f64> = x.iter().zip(&slice.values).map(|(x, w)| x * w).collect();
    let mean = g.trapezoid(&first) / norm;
    let second: Vec<f64> = x
        .iter()
        .zip(&slice.values)
        .map(|(x, w)| (x - mean) * (x - mean) * w)
        .collect();
    Ok(Moments {
        mean,
        variance: g.trapezoid(&second) / norm,
    })
}

/// `Var(q) Var(p)` from the slices `(1, 0, 0)` and `(0, 1, 0)`.
pub fn uncertainty_product(w: &impl MarginalFunction, x_grid: &UniformGrid) -> Result<f64> {
    let q = MarginalSlice::sample(w, TomographyParams::new(1.0, 0.0, 0.0), x_grid)?;
    let p = MarginalSlice::sample(w, TomographyParams::new(0.0, 1.0, 0.0), x_grid)?;
    Ok(moments(&q)?.variance * moments(&p)?.variance)
}
