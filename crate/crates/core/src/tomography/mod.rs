//! Maps between Wigner functions, quadrature marginals, characteristic
//! functions and density matrices.
//!
//! The marginal of the quadrature `X = mu q + nu p + delta` is the line
//! integral of the Wigner function over `mu q + nu p = X - delta`,
//!
//! ```text
//! w(X, mu, nu, delta) = 1/(2π r) ∫ W(q(l), p(l)) dl,   r = sqrt(mu^2 + nu^2),
//! ```
//!
//! with `l` the arclength along the line. It satisfies the shift identity
//! `w(X, mu, nu, delta) = w(X - delta, mu, nu, 0)` and the scaling identity
//! `w(λX, λmu, λnu, λdelta) = w(X, mu, nu, delta) / |λ|`.

mod characteristic;
mod density;
mod field;
mod moments;

pub use characteristic::{
    characteristic_from_field, characteristic_from_marginal, default_chi_grid, default_unit_grid,
    wigner_from_characteristic, CharacteristicGrid,
};
pub use density::{
    default_q_grid, density_matrix_from_field, density_matrix_from_marginal, DensityMatrixGrid,
    ReconstructionConfig,
};
pub use field::{Annulus, MarginalField};
pub use moments::{moments, uncertainty_product, Moments};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;

/// Parameters `(mu, nu, delta)` of the measured quadrature `mu q + nu p + delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TomographyParams {
    pub mu: f64,
    pub nu: f64,
    pub delta: f64,
}

impl TomographyParams {
    pub fn new(mu: f64, nu: f64, delta: f64) -> Self {
        Self { mu, nu, delta }
    }

    /// Rotated quadrature of optical homodyne tomography.
    pub fn rotated(phi: f64) -> Self {
        Self::new(phi.cos(), phi.sin(), 0.0)
    }

    pub fn radius(&self) -> f64 {
        self.mu.hypot(self.nu)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || !self.nu.is_finite() || !self.delta.is_finite() {
            return Err(Error::NonFinite("tomography parameters"));
        }
        if self.mu == 0.0 && self.nu == 0.0 {
            return Err(Error::DegenerateDirection);
        }
        Ok(())
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self::new(lambda * self.mu, lambda * self.nu, lambda * self.delta)
    }
}

/// Anything that can be evaluated as a Wigner function `W(q, p)`.
pub trait WignerFunction: Sync {
    fn wigner(&self, q: f64, p: f64) -> f64;
}

impl<F: Fn(f64, f64) -> f64 + Sync> WignerFunction for F {
    fn wigner(&self, q: f64, p: f64) -> f64 {
        self(q, p)
    }
}

/// Anything that can be evaluated as a marginal `w(X, mu, nu, delta)`.
pub trait MarginalFunction: Sync {
    fn marginal(&self, x: f64, params: &TomographyParams) -> f64;

    fn slice_values(&self, params: &TomographyParams, grid: &UniformGrid) -> Vec<f64> {
        (0..grid.len)
            .map(|k| self.marginal(grid.point(k), params))
            .collect()
    }
}

impl<M: MarginalFunction + ?Sized> MarginalFunction for &M {
    fn marginal(&self, x: f64, params: &TomographyParams) -> f64 {
        (**self).marginal(x, params)
    }
}

/// Trapezoid rule along the line of integration, in phase-space arclength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineQuadrature {
    pub half_length: f64,
    pub step: f64,
}

impl Default for LineQuadrature {
    /// Covers any line through the default `[-6, 6]^2` phase-space box.
    fn default() -> Self {
        Self {
            half_length: 9.0,
            step: 0.01,
        }
    }
}

impl LineQuadrature {
    /// Coarser step for bulk pipelines; still far inside the trapezoid
    /// rule's exponential-convergence regime for the catalog states.
    pub fn coarse() -> Self {
        Self {
            half_length: 9.0,
            step: 0.05,
        }
    }

    fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let n = (self.half_length / self.step).round() as usize;
        let h = self.half_length / n as f64;
        let l: Vec<f64> = (0..=2 * n).map(|i| (i as f64 - n as f64) * h).collect();
        let mut w = vec![h; l.len()];
        w[0] *= 0.5;
        w[2 * n] *= 0.5;
        (l, w)
    }
}

/// Marginal obtained by integrating a Wigner function along lines.
pub struct RadonMarginal<W> {
    pub wigner: W,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl<W: WignerFunction> RadonMarginal<W> {
    pub fn new(wigner: W, line: LineQuadrature) -> Self {
        let (nodes, weights) = line.nodes();
        Self {
            wigner,
            nodes,
            weights,
        }
    }
}

impl<W: WignerFunction> MarginalFunction for RadonMarginal<W> {
    fn marginal(&self, x: f64, params: &TomographyParams) -> f64 {
        let (mu, nu) = (params.mu, params.nu);
        let r = params.radius();
        if r == 0.0 {
            return 0.0;
        }
        let s = (x - params.delta) / (r * r);
        let (q0, p0) = (s * mu, s * nu);
        let (tq, tp) = (-nu / r, mu / r);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&l, &w)| w * self.wigner.wigner(q0 + l * tq, p0 + l * tp))
            .sum();
        sum / (2.0 * PI * r)
    }
}

/// Tolerance on `|∫ w dX - 1|` below which a slice is considered normalized.
pub const SLICE_NORMALIZATION_TOL: f64 = 1e-4;
/// Quadrature noise floor for marginal values.
pub const SLICE_POSITIVITY_FLOOR: f64 = -1e-9;

/// Samples of `w(X)` at fixed `(mu, nu, delta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSlice {
    pub params: TomographyParams,
    pub x_grid: UniformGrid,
    pub values: Vec<f64>,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

impl MarginalSlice {
    pub fn sample(
        w: &impl MarginalFunction,
        params: TomographyParams,
        x_grid: &UniformGrid,
    ) -> Result<Self> {
        params.validate()?;
        let values = w.slice_values(&params, x_grid);
        let mut slice = Self {
            params,
            x_grid: *x_grid,
            values,
            diagnostics: Vec::new(),
        };
        slice.annotate();
        Ok(slice)
    }

    pub fn integral(&self) -> f64 {
        self.x_grid.trapezoid(&self.values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn annotate(&mut self) {
        let norm = self.integral();
        if (norm - 1.0).abs() > SLICE_NORMALIZATION_TOL {
            self.diagnostics.push(format!(
                "normalization {norm:.8} differs from 1 (grid or line extent too small?)"
            ));
        }
        let min = self.min();
        if min < SLICE_POSITIVITY_FLOOR {
            self.diagnostics
                .push(format!("negative value {min:e} below quadrature floor"));
        }
    }
}

/// Default X grid `[-10, 10]` with 1024 samples.
pub fn default_x_grid() -> UniformGrid {
    UniformGrid {
        start: -10.0,
        end: 10.0,
        len: 1024,
    }
}

/// Line-integral transform of a Wigner function to one quadrature slice.
pub fn radon_marginal(
    wigner: &impl WignerFunction,
    params: TomographyParams,
    x_grid: &UniformGrid,
    line: &LineQuadrature,
) -> Result<MarginalSlice> {
    params.validate()?;
    MarginalSlice::sample(
        &RadonMarginal::new(|q, p| wigner.wigner(q, p), *line),
        params,
        x_grid,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{DynamicsKind, StateSpec};

    #[test]
    fn ground_radon_matches_closed_form() {
        let s = StateSpec::ground();
        let params = TomographyParams::new(1.0, 0.0, 0.0);
        let g = default_x_grid();
        let slice = radon_marginal(
            &s.wigner_at(0.0, DynamicsKind::Static),
            params,
            &g,
            &LineQuadrature::default(),
        )
        .unwrap();
        let exact =
            MarginalSlice::sample(&s.marginal_at(0.0, DynamicsKind::Static), params, &g).unwrap();
        let err = slice
            .values
            .iter()
            .zip(&exact.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-6, "{err}");
        assert!(slice.diagnostics.is_empty());
    }

    #[test]
    fn degenerate_direction_is_rejected() {
        let s = StateSpec::ground().wigner_at(0.0, DynamicsKind::Static);
        let r = radon_marginal(
            &s,
            TomographyParams::new(0.0, 0.0, 0.0),
            &default_x_grid(),
            &LineQuadrature::default(),
        );
        assert_eq!(r.unwrap_err(), Error::DegenerateDirection);
    }

    #[test]
    fn short_line_is_flagged() {
        let s = StateSpec::ground().wigner_at(0.0, DynamicsKind::Static);
        let line = LineQuadrature {
            half_length: 0.5,
            step: 0.01,
        };
        let slice = radon_marginal(
            &s,
            TomographyParams::new(1.0, 0.0, 0.0),
            &default_x_grid(),
            &line,
        )
        .unwrap();
        assert!(!slice.diagnostics.is_empty());
    }

    #[test]
    fn odd_cat_marginal_is_nonnegative() {
        let s = StateSpec::odd_cat(2f64.sqrt(), 0.0).unwrap();
        let w = s.wigner_at(0.0, DynamicsKind::Static);
        let slice = radon_marginal(
            &w,
            TomographyParams::new(1.0, 0.0, 0.0),
            &default_x_grid(),
            &LineQuadrature::default(),
        )
        .unwrap();
        assert!(slice.min() >= -1e-9);
        assert!(slice.diagnostics.is_empty(), "{:?}", slice.diagnostics);
    }

    #[test]
    fn grid_backed_wigner_agrees_with_evaluator() {
        let s = StateSpec::excited_first();
        let g = crate::state::default_phase_grid();
        let field =
            crate::state::sample_wigner_field(&s, &g, &g, 0.0, DynamicsKind::Static).unwrap();
        let x = UniformGrid::symmetric(5.0, 101).unwrap();
        let p = TomographyParams::rotated(0.4);
        let a = radon_marginal(&field, p, &x, &LineQuadrature::default()).unwrap();
        let b = MarginalSlice::sample(&s.marginal_at(0.0, DynamicsKind::Static), p, &x).unwrap();
        let err = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        // Bilinear interpolation on a 0.05 grid.
        assert!(err < 2e-3, "{err}");
    }
}
