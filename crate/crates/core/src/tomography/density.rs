//! Position-representation density matrix from the marginal.
//!
//! Taking `<q| . |q'>` of the kernel reconstruction, the translation
//! `exp(-i s nu p)` forces `nu = (q - q')/s` and the shift integral is
//! absorbed by `w(X, delta) = w(X - delta, 0)`, leaving
//!
//! ```text
//! ρ(q, q') = |s|/(2π) ∫ dmu e^{-i s mu (q+q')/2} ∫ dY w(Y, mu, (q-q')/s, 0) e^{i s Y}
//! ```
//!
//! which is independent of `s`. The inner integral is evaluated on the
//! unit-direction slice (`Y = r Z`) so it stays smooth through `mu = nu = 0`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{characteristic_from_field, MarginalField, MarginalFunction, TomographyParams};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;

pub const HERMITICITY_TOL: f64 = 1e-6;
pub const TRACE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    /// Free kernel parameter `s`, nonzero.
    pub s: f64,
    /// `mu` integration runs over `[-mu_range, mu_range]`.
    pub mu_range: f64,
    /// Unit-direction slices are integrated over `[-y_range, y_range]`.
    pub y_range: f64,
    pub mu_samples: usize,
    pub y_samples: usize,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            s: 1.0,
            mu_range: 12.0,
            y_range: 10.0,
            mu_samples: 241,
            y_samples: 401,
        }
    }
}

impl ReconstructionConfig {
    pub fn with_s(s: f64) -> Self {
        Self {
            s,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() || self.s == 0.0 {
            return Err(Error::Config(format!(
                "kernel parameter s must be finite and nonzero, got {}",
                self.s
            )));
        }
        if self.mu_range <= 0.0 || self.y_range <= 0.0 || self.mu_samples < 2 || self.y_samples < 2
        {
            return Err(Error::Config(
                "integration ranges and sample counts must be positive".into(),
            ));
        }
        Ok(())
    }

    fn mu_grid(&self) -> Result<UniformGrid> {
        UniformGrid::symmetric(self.mu_range, self.mu_samples)
    }

    fn y_grid(&self) -> Result<UniformGrid> {
        UniformGrid::symmetric(self.y_range, self.y_samples)
    }
}

/// Density matrix samples `ρ(q_i, q_j)`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixGrid {
    pub q_grid: UniformGrid,
    pub values: Vec<Complex64>,
    pub config: ReconstructionConfig,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

impl DensityMatrixGrid {
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.q_grid.len + j]
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.q_grid.len;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                m = m.max((self.at(i, j) - self.at(j, i).conj()).norm());
            }
        }
        m
    }

    /// Trapezoid `∫ ρ(q, q) dq`.
    pub fn trace(&self) -> f64 {
        let diag: Vec<f64> = (0..self.q_grid.len).map(|i| self.at(i, i).re).collect();
        self.q_grid.trapezoid(&diag)
    }

    /// Trapezoid `∫∫ |ρ(q, q')|^2 dq dq'`.
    pub fn purity(&self) -> f64 {
        let w = self.q_grid.trapezoid_weights();
        let n = self.q_grid.len;
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                sum += w[i] * w[j] * self.at(i, j).norm_sqr();
            }
        }
        sum
    }

    /// Eigenvalues of the quadrature-weighted, Hermitian part
    /// `sqrt(w_i) ρ_ij sqrt(w_j)`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.q_grid.len;
        let sw: Vec<f64> = self
            .q_grid
            .trapezoid_weights()
            .into_iter()
            .map(f64::sqrt)
            .collect();
        let m = DMatrix::from_fn(n, n, |i, j| {
            0.5 * (self.at(i, j) + self.at(j, i).conj()) * (sw[i] * sw[j])
        });
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(f64::NAN)
    }

    fn annotate(&mut self) {
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOL {
            self.diagnostics.push(format!(
                "hermiticity error {herm:.3e}; integration range too small?"
            ));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            self.diagnostics.push(format!(
                "trace {tr:.6} differs from 1; integration range too small?"
            ));
        }
    }
}

/// Signed differences `d` of a uniform grid, `q_i - q_j = d Δq`, as an index
/// offset into a table of length `2n - 1`.
fn diff_index(i: usize, j: usize, n: usize) -> usize {
    i + n - 1 - j
}

/// Assemble `ρ(q_i, q_j) = Σ_m weight_m I[m][i-j] e^{-i a_m (q_i + q_j)/2} / (2π)`.
fn assemble(
    q_grid: &UniformGrid,
    a_nodes: &[f64],
    a_weights: &[f64],
    table: &[Complex64],
) -> Vec<Complex64> {
    let n = q_grid.len;
    let nd = 2 * n - 1;
    let q = q_grid.points();
    (0..n * n)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c / n, c % n);
            let x = 0.5 * (q[i] + q[j]);
            let d = diff_index(i, j, n);
            let sum: Complex64 = a_nodes
                .iter()
                .zip(a_weights)
                .enumerate()
                .map(|(m, (&a, &h))| table[m * nd + d] * Complex64::from_polar(h, -a * x))
                .sum();
            sum / (2.0 * PI)
        })
        .collect()
}

/// Density matrix from a marginal evaluator.
pub fn density_matrix_from_marginal(
    w: &impl MarginalFunction,
    q_grid: &UniformGrid,
    config: &ReconstructionConfig,
) -> Result<DensityMatrixGrid> {
    config.validate()?;
    let s = config.s;
    let mu_grid = config.mu_grid()?;
    let y_grid = config.y_grid()?;
    let y = y_grid.points();
    let wy = y_grid.trapezoid_weights();
    let n = q_grid.len;
    let nd = 2 * n - 1;
    let dq = q_grid.step();

    // table[m][d] = ∫ w(Y, mu_m, nu_d, 0) e^{isY} dY with nu_d = (d - n + 1) Δq / s.
    let table: Vec<Complex64> = (0..mu_grid.len * nd)
        .into_par_iter()
        .map(|c| {
            let mu = mu_grid.point(c / nd);
            let nu = (c % nd) as f64 - (n - 1) as f64;
            let nu = nu * dq / s;
            let r = mu.hypot(nu);
            if r == 0.0 {
                return Complex64::new(1.0, 0.0);
            }
            let unit = TomographyParams::new(mu / r, nu / r, 0.0);
            w.slice_values(&unit, &y_grid)
                .iter()
                .zip(&y)
                .zip(&wy)
                .map(|((&v, &z), &h)| Complex64::from_polar(h * v, s * r * z))
                .sum()
        })
        .collect();

    let a_nodes: Vec<f64> = mu_grid.points().into_iter().map(|m| s * m).collect();
    let a_weights: Vec<f64> = mu_grid
        .trapezoid_weights()
        .into_iter()
        .map(|h| s.abs() * h)
        .collect();
    let values = assemble(q_grid, &a_nodes, &a_weights, &table);
    let mut rho = DensityMatrixGrid {
        q_grid: *q_grid,
        values,
        config: *config,
        diagnostics: Vec::new(),
    };
    rho.annotate();
    Ok(rho)
}

/// Density matrix from a sampled field.
///
/// The `mu` integral runs over the field's own grid and every `q - q'` must
/// be a `nu` sample, so `q_grid`'s spacing has to be a multiple of the field's
/// `nu` spacing. On a fixed field the `s` dependence cancels identically.
pub fn density_matrix_from_field(
    field: &MarginalField,
    q_grid: &UniformGrid,
    config: &ReconstructionConfig,
) -> Result<DensityMatrixGrid> {
    config.validate()?;
    let chi = characteristic_from_field(field)?;
    let n = q_grid.len;
    let nd = 2 * n - 1;
    let dq = q_grid.step();
    let mut nu_index = Vec::with_capacity(nd);
    for d in 0..nd {
        let b = (d as f64 - (n - 1) as f64) * dq;
        let j = field.nu_grid.index_of(b, 1e-6).ok_or_else(|| {
            Error::GridMismatch(format!(
                "q - q' = {b} is not a nu sample of the field; q spacing must be a multiple of {}",
                field.nu_grid.step()
            ))
        })?;
        nu_index.push(j);
    }
    let na = field.mu_grid.len;
    let nb = field.nu_grid.len;
    let mut table = vec![Complex64::new(0.0, 0.0); na * nd];
    for m in 0..na {
        for (d, &j) in nu_index.iter().enumerate() {
            table[m * nd + d] = chi.values[m * nb + j];
        }
    }
    let values = assemble(
        q_grid,
        &field.mu_grid.points(),
        &field.mu_grid.trapezoid_weights(),
        &table,
    );
    let mut rho = DensityMatrixGrid {
        q_grid: *q_grid,
        values,
        config: *config,
        diagnostics: chi.diagnostics,
    };
    rho.annotate();
    Ok(rho)
}

/// Default position grid `[-6, 6]` with 61 samples.
pub fn default_q_grid() -> UniformGrid {
    UniformGrid {
        start: -6.0,
        end: 6.0,
        len: 61,
    }
}
