//! Marginal -> characteristic function -> Wigner function.
//!
//! The X-Fourier transform of a slice is the characteristic function of the
//! Wigner function along a ray:
//!
//! ```text
//! χ(a, b) = ∫ w(X, a, b, 0) e^{iX} dX = 1/(2π) ∫∫ W(q, p) e^{i(aq + bp)} dq dp,
//! W(q, p) = 1/(2π) ∫∫ χ(a, b) e^{-i(aq + bp)} da db.
//! ```
//!
//! By the scaling identity the transform at `(a, b) = k (cos θ, sin θ)` only
//! needs the unit-direction slice: `χ = ∫ w(Z, cos θ, sin θ, 0) e^{ikZ} dZ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MarginalField, MarginalFunction, TomographyParams};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::state::WignerField;

/// Threshold on `|χ|` at the outer boundary below which the transform counts
/// as decayed.
pub const CHI_DECAY_TOL: f64 = 1e-8;
/// Largest imaginary part of a reconstructed Wigner function that is dropped
/// silently.
pub const IMAG_RESIDUE_TOL: f64 = 1e-6;
/// Largest slice normalization error accepted by the field route.
pub const FIELD_SLICE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicGrid {
    pub a_grid: UniformGrid,
    pub b_grid: UniformGrid,
    /// Row-major in `a`.
    pub values: Vec<Complex64>,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

impl CharacteristicGrid {
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.b_grid.len + j]
    }

    /// Largest `|χ|` on the outer rows and columns.
    pub fn boundary_max(&self) -> f64 {
        let (na, nb) = (self.a_grid.len, self.b_grid.len);
        let mut m: f64 = 0.0;
        for i in 0..na {
            for j in 0..nb {
                if i == 0 || j == 0 || i + 1 == na || j + 1 == nb {
                    m = m.max(self.at(i, j).norm());
                }
            }
        }
        m
    }

    /// `max |χ(-a, -b) - conj χ(a, b)|`; requires symmetric grids.
    pub fn conjugate_symmetry_error(&self) -> Option<f64> {
        if !self.a_grid.is_symmetric() || !self.b_grid.is_symmetric() {
            return None;
        }
        let (na, nb) = (self.a_grid.len, self.b_grid.len);
        let mut m: f64 = 0.0;
        for i in 0..na {
            for j in 0..nb {
                let d = self.at(na - 1 - i, nb - 1 - j) - self.at(i, j).conj();
                m = m.max(d.norm());
            }
        }
        Some(m)
    }

    fn annotate(&mut self) {
        let edge = self.boundary_max();
        if edge > CHI_DECAY_TOL {
            self.diagnostics.push(format!(
                "characteristic function not decayed at boundary (|χ| = {edge:.2e}); expect ringing"
            ));
        }
    }
}

/// `[-12, 12]^2` with spacing 0.5: decays below `1e-8` for the catalog
/// states and keeps periodic images of `[-6, 6]^2` apart.
pub fn default_chi_grid() -> UniformGrid {
    UniformGrid {
        start: -12.0,
        end: 12.0,
        len: 49,
    }
}

/// Unit-direction slice grid `[-10, 10]`, spacing 0.05.
pub fn default_unit_grid() -> UniformGrid {
    UniformGrid {
        start: -10.0,
        end: 10.0,
        len: 401,
    }
}

/// Fill a grid cell by cell, computing only one of each mirror pair
/// `(i, j) <-> (-a, -b)` when both grids are symmetric.
fn fill_hermitian(
    a_grid: &UniformGrid,
    b_grid: &UniformGrid,
    cell: impl Fn(usize, usize) -> Complex64 + Sync,
) -> Vec<Complex64> {
    let (na, nb) = (a_grid.len, b_grid.len);
    let n = na * nb;
    let mirror = |c: usize| (na - 1 - c / nb) * nb + (nb - 1 - c % nb);
    let symmetric = a_grid.is_symmetric() && b_grid.is_symmetric();
    let computed: Vec<Option<Complex64>> = (0..n)
        .into_par_iter()
        .map(|c| (!symmetric || c <= mirror(c)).then(|| cell(c / nb, c % nb)))
        .collect();
    (0..n)
        .map(|c| {
            computed[c].unwrap_or_else(|| computed[mirror(c)].expect("mirror computed").conj())
        })
        .collect()
}

/// Characteristic function on `a_grid x b_grid` from a marginal evaluator,
/// integrating unit-direction slices over `unit_grid`.
pub fn characteristic_from_marginal(
    w: &impl MarginalFunction,
    a_grid: &UniformGrid,
    b_grid: &UniformGrid,
    unit_grid: &UniformGrid,
) -> Result<CharacteristicGrid> {
    let z = unit_grid.points();
    let wz = unit_grid.trapezoid_weights();
    let values = fill_hermitian(a_grid, b_grid, |i, j| {
        let (a, b) = (a_grid.point(i), b_grid.point(j));
        let k = a.hypot(b);
        if k == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let unit = TomographyParams::new(a / k, b / k, 0.0);
        let slice = w.slice_values(&unit, unit_grid);
        slice
            .iter()
            .zip(&z)
            .zip(&wz)
            .map(|((&v, &zk), &h)| Complex64::from_polar(h * v, k * zk))
            .sum()
    });
    let mut chi = CharacteristicGrid {
        a_grid: *a_grid,
        b_grid: *b_grid,
        values,
        diagnostics: Vec::new(),
    };
    chi.annotate();
    Ok(chi)
}

/// Characteristic function on the field's own `(mu, nu)` grid.
///
/// Valid cells are Fourier transformed slice by slice; the origin takes its
/// limit value 1, and any other unresolved cell is replaced by the mean of
/// its valid neighbours.
pub fn characteristic_from_field(field: &MarginalField) -> Result<CharacteristicGrid> {
    let (na, nb) = (field.mu_grid.len, field.nu_grid.len);
    let x = field.x_grid.points();
    let wx = field.x_grid.trapezoid_weights();
    let phase: Vec<Complex64> = x
        .iter()
        .zip(&wx)
        .map(|(&xk, &h)| Complex64::from_polar(h, xk))
        .collect();

    for c in 0..na * nb {
        if field.valid[c] {
            let norm = field.slice_integral(c / nb, c % nb);
            if (norm - 1.0).abs() > FIELD_SLICE_TOL {
                return Err(Error::NotNormalized { measured: norm });
            }
        }
    }

    let mut values: Vec<Complex64> = (0..na * nb)
        .into_par_iter()
        .map(|c| {
            if !field.valid[c] {
                return Complex64::new(f64::NAN, 0.0);
            }
            field
                .slice(c / nb, c % nb)
                .iter()
                .zip(&phase)
                .map(|(&v, &e)| e * v)
                .sum()
        })
        .collect();

    let mut diagnostics = Vec::new();
    let mut patched = 0usize;
    for c in 0..na * nb {
        if field.valid[c] {
            continue;
        }
        let (i, j) = (c / nb, c % nb);
        if field.cell_radius(i, j) == 0.0 {
            values[c] = Complex64::new(1.0, 0.0);
            continue;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut count = 0;
        for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
            let (ii, jj) = (i as i64 + di, j as i64 + dj);
            if ii < 0 || jj < 0 || ii >= na as i64 || jj >= nb as i64 {
                continue;
            }
            let n = ii as usize * nb + jj as usize;
            if field.valid[n] {
                sum += values[n];
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::InvalidGrid(format!(
                "cell ({i}, {j}) is unresolved and has no resolved neighbours"
            )));
        }
        values[c] = sum / count as f64;
        patched += 1;
    }
    if patched > 0 {
        diagnostics.push(format!("{patched} unresolved cells filled from neighbours"));
    }
    let mut chi = CharacteristicGrid {
        a_grid: field.mu_grid,
        b_grid: field.nu_grid,
        values,
        diagnostics,
    };
    chi.annotate();
    Ok(chi)
}

/// Discrete inverse transform `W = 1/(2π) Σ χ e^{-i(aq + bp)} Δa Δb`.
pub fn wigner_from_characteristic(
    chi: &CharacteristicGrid,
    q_grid: &UniformGrid,
    p_grid: &UniformGrid,
) -> Result<WignerField> {
    // The discrete sum is periodic with period 2π/Δ in each variable.
    for (g, conj, name) in [(q_grid, &chi.a_grid, "q"), (p_grid, &chi.b_grid, "p")] {
        let reach = g.start.abs().max(g.end.abs());
        let limit = PI / conj.step();
        if reach > limit {
            return Err(Error::Aliasing(format!(
                "{name} grid reaches {reach}, beyond the unaliased range ±{limit:.4}"
            )));
        }
    }
    let (na, nb) = (chi.a_grid.len, chi.b_grid.len);
    let kernel = |g: &UniformGrid, conj: &UniformGrid| -> Vec<Complex64> {
        let w = conj.trapezoid_weights();
        let mut m = Vec::with_capacity(g.len * conj.len);
        for x in g.points() {
            for (i, &wi) in w.iter().enumerate() {
                m.push(Complex64::from_polar(wi, -conj.point(i) * x));
            }
        }
        m
    };
    let eq = kernel(q_grid, &chi.a_grid);
    let ep = kernel(p_grid, &chi.b_grid);

    // tmp[m][j] = Σ_i eq[m][i] χ[i][j]
    let tmp: Vec<Complex64> = (0..q_grid.len)
        .into_par_iter()
        .flat_map_iter(|m| {
            let row = &eq[m * na..(m + 1) * na];
            (0..nb).map(move |j| {
                (0..na)
                    .map(|i| row[i] * chi.values[i * nb + j])
                    .sum::<Complex64>()
            })
        })
        .collect();
    let full: Vec<Complex64> = (0..q_grid.len)
        .into_par_iter()
        .flat_map_iter(|m| {
            let row = &tmp[m * nb..(m + 1) * nb];
            let ep = &ep;
            (0..p_grid.len).map(move |n| {
                let col = &ep[n * nb..(n + 1) * nb];
                row.iter().zip(col).map(|(a, b)| a * b).sum::<Complex64>() / (2.0 * PI)
            })
        })
        .collect();

    let imag = full.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let mut field = WignerField::new(*q_grid, *p_grid, full.iter().map(|z| z.re).collect())?;
    field.diagnostics.extend(chi.diagnostics.iter().cloned());
    if imag > IMAG_RESIDUE_TOL {
        field.diagnostics.push(format!(
            "imaginary residue {imag:.3e} exceeds {IMAG_RESIDUE_TOL:e}; discarded"
        ));
    } else {
        field
            .diagnostics
            .push(format!("imaginary residue {imag:.3e} discarded"));
    }
    Ok(field)
}
