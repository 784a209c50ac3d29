use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MarginalFunction, MarginalSlice, TomographyParams, SLICE_NORMALIZATION_TOL};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::interp::{cubic_stencil, Stencil};

/// Marginal sampled on a `(mu, nu)` grid at `delta = 0`, every slice sharing
/// one X grid. Values are stored slice-contiguous:
/// `values[(i * nu_len + j) * x_len + k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalField {
    pub mu_grid: UniformGrid,
    pub nu_grid: UniformGrid,
    pub x_grid: UniformGrid,
    pub values: Vec<f64>,
    /// Per-cell validity. The origin cell is always invalid (the slice is a
    /// delta function), as is any cell whose slice is narrower than the X
    /// grid can resolve.
    pub valid: Vec<bool>,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

impl MarginalField {
    /// Assemble a field from raw values, deriving the validity mask.
    pub fn from_values(
        mu_grid: UniformGrid,
        nu_grid: UniformGrid,
        x_grid: UniformGrid,
        values: Vec<f64>,
    ) -> Result<Self> {
        let n = mu_grid.len * nu_grid.len * x_grid.len;
        if values.len() != n {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{}x{} field",
                values.len(),
                mu_grid.len,
                nu_grid.len,
                x_grid.len
            )));
        }
        let mut field = Self {
            mu_grid,
            nu_grid,
            x_grid,
            values,
            valid: Vec::new(),
            diagnostics: Vec::new(),
        };
        let r_min = field.resolution_radius();
        field.valid = (0..mu_grid.len * nu_grid.len)
            .map(|c| {
                let r = field.cell_radius(c / nu_grid.len, c % nu_grid.len);
                r > 0.0 && r >= r_min
            })
            .collect();
        Ok(field)
    }

    /// Sample a marginal on the grid. Degenerate cells are filled with zeros.
    pub fn sample(
        w: &impl MarginalFunction,
        mu_grid: &UniformGrid,
        nu_grid: &UniformGrid,
        x_grid: &UniformGrid,
    ) -> Result<Self> {
        let cells = mu_grid.len * nu_grid.len;
        let values: Vec<f64> = (0..cells)
            .into_par_iter()
            .flat_map_iter(|c| {
                let params = TomographyParams::new(
                    mu_grid.point(c / nu_grid.len),
                    nu_grid.point(c % nu_grid.len),
                    0.0,
                );
                if params.radius() == 0.0 {
                    vec![0.0; x_grid.len]
                } else {
                    w.slice_values(&params, x_grid)
                }
            })
            .collect();
        let mut field = Self::from_values(*mu_grid, *nu_grid, *x_grid, values)?;
        let worst = field.worst_normalization_error();
        if worst > SLICE_NORMALIZATION_TOL {
            field.diagnostics.push(format!(
                "largest slice normalization error {worst:.3e}; X grid may not cover the support"
            ));
        }
        Ok(field)
    }

    pub fn cells(&self) -> usize {
        self.mu_grid.len * self.nu_grid.len
    }

    pub fn cell_params(&self, i: usize, j: usize) -> TomographyParams {
        TomographyParams::new(self.mu_grid.point(i), self.nu_grid.point(j), 0.0)
    }

    pub fn cell_radius(&self, i: usize, j: usize) -> f64 {
        self.mu_grid.point(i).hypot(self.nu_grid.point(j))
    }

    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.valid[i * self.nu_grid.len + j]
    }

    /// Smallest `sqrt(mu^2 + nu^2)` whose slices the X grid resolves: the
    /// ground-state slice there has a standard deviation of `1.4 dX`.
    pub fn resolution_radius(&self) -> f64 {
        2.0 * self.x_grid.step()
    }

    pub fn slice(&self, i: usize, j: usize) -> &[f64] {
        let n = self.x_grid.len;
        let c = i * self.nu_grid.len + j;
        &self.values[c * n..(c + 1) * n]
    }

    /// Slice of cell `(i, j)` at shift `delta`, using `w(X, delta) = w(X - delta, 0)`:
    /// the values are unchanged and the X grid moves by `delta`.
    pub fn slice_at(&self, i: usize, j: usize, delta: f64) -> MarginalSlice {
        let g = self.x_grid;
        MarginalSlice {
            params: TomographyParams::new(self.mu_grid.point(i), self.nu_grid.point(j), delta),
            x_grid: UniformGrid {
                start: g.start + delta,
                end: g.end + delta,
                len: g.len,
            },
            values: self.slice(i, j).to_vec(),
            diagnostics: Vec::new(),
        }
    }

    pub fn slice_integral(&self, i: usize, j: usize) -> f64 {
        self.x_grid.trapezoid(self.slice(i, j))
    }

    /// `max |∫ w dX - 1|` over valid cells.
    pub fn worst_normalization_error(&self) -> f64 {
        let n = self.nu_grid.len;
        (0..self.cells())
            .filter(|c| self.valid[*c])
            .map(|c| (self.slice_integral(c / n, c % n) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max |∫ w dX - ∫ w' dX|` over valid cells of `self`; `other` must share the grids.
    pub fn worst_integral_gap(&self, other: &MarginalField) -> Result<f64> {
        self.same_grid(other)?;
        let n = self.nu_grid.len;
        Ok((0..self.cells())
            .filter(|c| self.valid[*c])
            .map(|c| (self.slice_integral(c / n, c % n) - other.slice_integral(c / n, c % n)).abs())
            .fold(0.0, f64::max))
    }

    /// Minimum over valid cells.
    pub fn min_valid(&self) -> f64 {
        let n = self.x_grid.len;
        (0..self.cells())
            .filter(|c| self.valid[*c])
            .flat_map(|c| self.values[c * n..(c + 1) * n].iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// Check that `other` lives on exactly the same grids.
    pub fn same_grid(&self, other: &MarginalField) -> Result<()> {
        if self.mu_grid != other.mu_grid
            || self.nu_grid != other.nu_grid
            || self.x_grid != other.x_grid
        {
            return Err(Error::GridMismatch(
                "marginal fields on different grids".into(),
            ));
        }
        Ok(())
    }

    /// Region where tensor-cubic interpolation is accurate, if any.
    pub fn annulus(&self) -> Option<Annulus> {
        Annulus::for_field(self)
    }

    /// Tensor-cubic interpolation in `(mu, nu, X)` at `delta = 0`. `None`
    /// when `(mu, nu)` lies outside the grid; zero when only X does.
    pub fn interpolate(&self, x: f64, mu: f64, nu: f64) -> Option<f64> {
        let sm = cubic_stencil(&self.mu_grid, mu)?;
        let sn = cubic_stencil(&self.nu_grid, nu)?;
        let Some(sx) = cubic_stencil(&self.x_grid, x) else {
            return Some(0.0);
        };
        Some(self.apply_stencils(&sm, &sn, &sx))
    }

    pub(crate) fn apply_stencils(&self, sm: &Stencil, sn: &Stencil, sx: &Stencil) -> f64 {
        let (nn, nx) = (self.nu_grid.len, self.x_grid.len);
        let mut acc = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let wab = sm.weights[a] * sn.weights[b];
                if wab == 0.0 {
                    continue;
                }
                let base = ((sm.base + a) * nn + sn.base + b) * nx;
                acc += wab * sx.apply(&self.values[base..base + nx]);
            }
        }
        acc
    }
}

/// Annulus `inner <= sqrt(mu^2 + nu^2) <= outer` of a field's `(mu, nu)` box
/// where slices are resolved and the 4x4 interpolation stencil stays on the
/// grid. Points outside it are mapped in with the scaling identity
/// `w(X, mu, nu) = |λ| w(λX, λmu, λnu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
}

const STENCIL_MARGIN: f64 = 2.5;

impl Annulus {
    pub fn for_field(field: &MarginalField) -> Option<Self> {
        Self::with_inner(field, field.resolution_radius())
    }

    /// Annulus whose interpolation region starts at `resolved` (plus the
    /// stencil margin).
    pub fn with_inner(field: &MarginalField, resolved: f64) -> Option<Self> {
        let h = field.mu_grid.step().max(field.nu_grid.step());
        let half = [
            -field.mu_grid.start,
            field.mu_grid.end,
            -field.nu_grid.start,
            field.nu_grid.end,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
        let inner = resolved + STENCIL_MARGIN * h;
        let outer = half - STENCIL_MARGIN * h;
        (inner < outer).then_some(Self { inner, outer })
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.inner && r <= self.outer
    }

    /// Scale factor mapping radius `r > 0` into the annulus.
    pub fn scale_for(&self, r: f64) -> f64 {
        r.clamp(self.inner, self.outer) / r
    }
}

/// A field evaluates as a marginal by interpolation, rescaling any
/// `(mu, nu)` outside its annulus. Degenerate directions evaluate to zero.
impl MarginalFunction for MarginalField {
    fn marginal(&self, x: f64, params: &TomographyParams) -> f64 {
        let y = x - params.delta;
        let r = params.radius();
        if r == 0.0 {
            return 0.0;
        }
        match self.annulus() {
            Some(annulus) => {
                let lambda = annulus.scale_for(r);
                lambda
                    * self
                        .interpolate(lambda * y, lambda * params.mu, lambda * params.nu)
                        .unwrap_or(0.0)
            }
            None => self.interpolate(y, params.mu, params.nu).unwrap_or(0.0),
        }
    }
}
