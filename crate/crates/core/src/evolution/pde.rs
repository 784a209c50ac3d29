//! Grid integration of the first-order marginal transport equation.
//!
//! For `deg V <= 2` every transport velocity is linear in `(mu, nu)`, so the
//! solution keeps the scaling form `w(X, mu, nu) = U(X / r, θ) / r` with
//! `(mu, nu) = r (cos θ, sin θ)`. The solver therefore evolves `U(z, θ)`, the
//! slices on the unit circle, on a periodic θ grid times a z grid; the
//! Cartesian field is read once at the start and written at each snapshot.
//! Resolution follows the Cartesian grid: `8 (n - 1)` angles for an
//! `n x n` box and half the X spacing for z (the flows focus slices in both).
//! The z range covers the initial slices widened by the largest stretch the
//! flow applies up to the last requested time.
//!
//! A cell's slice at time `t` is a rescaled initial slice from the radius its
//! direction had at `t = 0`. Cells traced back to below the resolution radius
//! hold slices the X grid cannot represent and are marked invalid.
//!
//! On the unit circle the equation `∂_t w = v_X ∂_X w + v_mu ∂_mu w + v_nu ∂_nu w`
//! becomes
//!
//! ```text
//! ∂_t U = (v_X - z v_r) ∂_z U + v_θ ∂_θ U - v_r U,
//! v_r = v_mu cos θ + v_nu sin θ,   v_θ = v_nu cos θ - v_mu sin θ.
//! ```

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reduce::{PdeCoefficients, Velocity};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::interp::{lagrange_weights, quintic_stencil};
use crate::tomography::{
    MarginalField, MarginalFunction, TomographyParams, SLICE_NORMALIZATION_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Semi-Lagrangian transport with six-point interpolation and RK4 foot points.
    SemiLagrangian,
    /// First-order upwind differences with forward Euler; CFL-limited.
    Upwind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    /// Largest accepted CFL number for the upwind scheme.
    #[serde(default = "default_cfl_limit")]
    pub cfl_limit: f64,
}

fn default_cfl_limit() -> f64 {
    0.9
}

impl SolverConfig {
    pub fn new(dt: f64, t_final: f64, scheme: Scheme) -> Self {
        Self {
            dt,
            t_final,
            scheme,
            cfl_limit: default_cfl_limit(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::Config(format!(
                "final time must be non-negative, got {}",
                self.t_final
            )));
        }
        if !(self.cfl_limit.is_finite() && self.cfl_limit > 0.0) {
            return Err(Error::Config("CFL limit must be positive".into()));
        }
        Ok(())
    }
}

/// Integrate from `t = 0` to `config.t_final`.
pub fn evolve_pde(
    initial: &MarginalField,
    coeffs: &PdeCoefficients,
    config: &SolverConfig,
) -> Result<MarginalField> {
    let mut out = evolve_pde_snapshots(initial, coeffs, config, &[config.t_final])?;
    Ok(out.pop().expect("one snapshot requested"))
}

/// Integrate once, returning the field at each of the ascending `times`
/// (`config.t_final` is ignored). Each interval is split into equal steps no
/// longer than `config.dt`.
pub fn evolve_pde_snapshots(
    initial: &MarginalField,
    coeffs: &PdeCoefficients,
    config: &SolverConfig,
    times: &[f64],
) -> Result<Vec<MarginalField>> {
    config.validate()?;
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config(
            "snapshot times must be finite, non-negative and ascending".into(),
        ));
    }
    let velocity = coeffs.velocity()?;
    for (axis, terms) in [
        ("X", &velocity.x),
        ("mu", &velocity.mu),
        ("nu", &velocity.nu),
    ] {
        if terms.iter().any(|&(_, a, b)| a + b != 1) {
            return Err(Error::UnsupportedEquation(format!(
                "{axis} velocity is not linear in (mu, nu); the scaling form does not hold"
            )));
        }
    }
    if initial.annulus().is_none() {
        return Err(Error::InvalidGrid(
            "(mu, nu) box too small for a resolved interpolation annulus".into(),
        ));
    }

    let t_max = times.last().copied().unwrap_or(0.0);
    let n_probe = ANGLES_PER_BOUNDARY_CELL * (initial.mu_grid.len.max(initial.nu_grid.len) - 1);
    let stretch = max_stretch(&velocity, t_max, config.dt, n_probe);
    let mut state = UnitSlices::from_field(initial, stretch);
    let mut t_now = 0.0;
    let mut snapshots = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - t_now;
        let steps = (span / config.dt - 1e-9).ceil().max(0.0) as usize;
        if steps > 0 {
            let dt = span / steps as f64;
            let stepper = Stepper::new(&state, &velocity, dt, config)?;
            for _ in 0..steps {
                state.values = stepper.step(&state);
            }
        }
        t_now = t;
        let mut snap = state.to_field(initial)?;
        let traced = mask_untraceable(&mut snap, &velocity, t, config.dt);
        if traced > 0 {
            snap.diagnostics.push(format!(
                "t = {t}: {traced} cells trace back below the resolution radius and are marked invalid"
            ));
        }
        let worst = snap.worst_normalization_error();
        if worst > SLICE_NORMALIZATION_TOL {
            snap.diagnostics.push(format!(
                "t = {t}: largest slice normalization error {worst:.3e} (outflow through the X boundary?)"
            ));
        }
        snapshots.push(snap);
    }
    Ok(snapshots)
}

/// Invalidate cells whose direction, followed back to `t = 0`, had a radius
/// below the resolution radius. Returns the number of cells newly invalid.
fn mask_untraceable(field: &mut MarginalField, velocity: &Velocity, t: f64, dt: f64) -> usize {
    let r_min = field.resolution_radius();
    let steps = (t / dt - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return 0;
    }
    let h = t / steps as f64;
    let nn = field.nu_grid.len;
    let mut count = 0;
    for c in 0..field.cells() {
        if !field.valid[c] {
            continue;
        }
        let (mut mu, mut nu) = (field.mu_grid.point(c / nn), field.nu_grid.point(c % nn));
        for _ in 0..steps {
            let (_, m, n) = rk4_foot(velocity, mu, nu, h);
            (mu, nu) = (m, n);
        }
        if mu.hypot(nu) < r_min {
            field.valid[c] = false;
            count += 1;
        }
    }
    count
}

/// `U(z_k, θ_j)` stored row-major in θ.
#[derive(Debug, Clone)]
struct UnitSlices {
    n_theta: usize,
    z_grid: UniformGrid,
    values: Vec<f64>,
}

/// Periodic six-point stencil on `θ_j = 2π j / n`.
#[derive(Debug, Clone, Copy)]
struct PeriodicStencil {
    index: [usize; 6],
    weights: [f64; 6],
}

fn periodic_stencil(n: usize, theta: f64) -> PeriodicStencil {
    let u = theta.rem_euclid(2.0 * PI) / (2.0 * PI / n as f64);
    let base = u.floor() as isize - 2;
    let weights = lagrange_weights::<6>(u - base as f64);
    let index = [0, 1, 2, 3, 4, 5].map(|m| (base + m as isize).rem_euclid(n as isize) as usize);
    PeriodicStencil { index, weights }
}

impl UnitSlices {
    fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    /// Unit slices read from `field`, on a z grid wide enough for slices
    /// widened by `stretch` and twice as fine as the X grid.
    fn from_field(field: &MarginalField, stretch: f64) -> Self {
        let n_theta = ANGLES_PER_BOUNDARY_CELL * (field.mu_grid.len.max(field.nu_grid.len) - 1);
        let x = field.x_grid;
        // Reading the unit circle goes through the field's annulus, where
        // the X grid covers z up to X / λ.
        let lambda = field.annulus().map_or(1.0, |a| a.scale_for(1.0));
        let (start, end) = (stretch * x.start / lambda, stretch * x.end / lambda);
        let len = ((end - start) / x.step() * Z_REFINEMENT).ceil() as usize + 1;
        let z_grid = UniformGrid { start, end, len };
        let mut values = vec![0.0; n_theta * z_grid.len];
        values
            .par_chunks_mut(z_grid.len)
            .enumerate()
            .for_each(|(j, row)| {
                let theta = 2.0 * PI * j as f64 / n_theta as f64;
                let params = TomographyParams::new(theta.cos(), theta.sin(), 0.0);
                for (k, v) in row.iter_mut().enumerate() {
                    *v = field.marginal(z_grid.point(k), &params);
                }
            });
        Self {
            n_theta,
            z_grid,
            values,
        }
    }

    fn row(&self, j: usize) -> &[f64] {
        let nz = self.z_grid.len;
        &self.values[j * nz..(j + 1) * nz]
    }

    /// `Σ_m w_m U(·, θ_{j_m})` over the stencil's rows.
    fn blend(&self, ts: &PeriodicStencil) -> Vec<f64> {
        let mut out = vec![0.0; self.z_grid.len];
        for (&j, &w) in ts.index.iter().zip(&ts.weights) {
            for (o, &u) in out.iter_mut().zip(self.row(j)) {
                *o += w * u;
            }
        }
        out
    }

    /// Cartesian field on `template`'s grids, `w = U(X / r, θ) / r`, with
    /// six-point interpolation in both θ and z; negative samples are set to zero.
    fn to_field(&self, template: &MarginalField) -> Result<MarginalField> {
        let (nn, nx) = (template.nu_grid.len, template.x_grid.len);
        let n = self.n_theta;
        let mut values = vec![0.0; template.cells() * nx];
        values.par_chunks_mut(nx).enumerate().for_each(|(c, out)| {
            let (mu, nu) = (
                template.mu_grid.point(c / nn),
                template.nu_grid.point(c % nn),
            );
            let r = mu.hypot(nu);
            if r == 0.0 {
                return;
            }
            let blended = self.blend(&periodic_stencil(n, nu.atan2(mu)));
            for (k, v) in out.iter_mut().enumerate() {
                if let Some((zb, wz)) = quintic_stencil(&self.z_grid, template.x_grid.point(k) / r)
                {
                    let sum: f64 = (0..6).map(|l| wz[l] * blended[zb + l]).sum();
                    *v = sum / r;
                }
            }
        });
        // Six-point interpolation across the exact zeros of interference
        // fringes undershoots by up to a few 1e-6; the marginal is a density,
        // so those values are clipped and the largest one reported.
        let undershoot = values.iter().copied().fold(0.0, f64::min);
        let clipped = values.iter().filter(|v| **v < 0.0).count();
        values.iter_mut().for_each(|v| *v = v.max(0.0));
        let mut field = MarginalField::from_values(
            template.mu_grid,
            template.nu_grid,
            template.x_grid,
            values,
        )?;
        if undershoot < -CLIP_REPORT_LEVEL {
            field.diagnostics.push(format!(
                "{clipped} negative samples clipped to zero, largest {undershoot:.3e}"
            ));
        }
        Ok(field)
    }
}

/// Clipped undershoots beyond this size are reported in the diagnostics.
const CLIP_REPORT_LEVEL: f64 = 1e-9;

/// Angular samples per boundary cell of the `(mu, nu)` box.
const ANGLES_PER_BOUNDARY_CELL: usize = 8;
/// z samples per X sample.
const Z_REFINEMENT: f64 = 2.0;

/// Largest radius reached by unit directions traced back along the flow over
/// `[0, t]`: unit slices widen by at most this factor.
fn max_stretch(velocity: &Velocity, t: f64, dt: f64, n_theta: usize) -> f64 {
    let steps = (t / dt - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return 1.0;
    }
    let h = t / steps as f64;
    (0..n_theta)
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / n_theta as f64;
            let (mut mu, mut nu) = (theta.cos(), theta.sin());
            let mut worst: f64 = 1.0;
            for _ in 0..steps {
                let (_, m, n) = rk4_foot(velocity, mu, nu, h);
                (mu, nu) = (m, n);
                worst = worst.max(mu.hypot(nu));
            }
            worst
        })
        .fold(1.0, f64::max)
}

/// Start index and weights of a six-point z stencil.
type ZStencil = Option<(usize, [f64; 6])>;

enum Stepper {
    /// Per angle: θ stencil of the foot point and its radius, then one z
    /// stencil per sample (`None` when the foot leaves the z grid).
    SemiLagrangian {
        rows: Vec<(PeriodicStencil, f64, Vec<ZStencil>)>,
    },
    /// Per angle: `dt * (v_X, v_r, v_θ)` on the unit circle.
    Upwind { rates: Vec<(f64, f64, f64)> },
}

fn rk4_foot(v: &Velocity, mu: f64, nu: f64, dt: f64) -> (f64, f64, f64) {
    let k1 = v.at(mu, nu);
    let k2 = v.at(mu + 0.5 * dt * k1.1, nu + 0.5 * dt * k1.2);
    let k3 = v.at(mu + 0.5 * dt * k2.1, nu + 0.5 * dt * k2.2);
    let k4 = v.at(mu + dt * k3.1, nu + dt * k3.2);
    let avg = |a: f64, b: f64, c: f64, d: f64| dt * (a + 2.0 * b + 2.0 * c + d) / 6.0;
    (
        avg(k1.0, k2.0, k3.0, k4.0),
        mu + avg(k1.1, k2.1, k3.1, k4.1),
        nu + avg(k1.2, k2.2, k3.2, k4.2),
    )
}

impl Stepper {
    fn new(
        state: &UnitSlices,
        velocity: &Velocity,
        dt: f64,
        config: &SolverConfig,
    ) -> Result<Self> {
        let z = state.z_grid;
        match config.scheme {
            Scheme::SemiLagrangian => {
                let mut rows = Vec::with_capacity(state.n_theta);
                for j in 0..state.n_theta {
                    let theta = state.theta(j);
                    // w_new(z, unit(θ)) = w_old(z + shift, foot) = U_old((z + shift) / r_f, θ_f) / r_f
                    let (shift, mf, nf) = rk4_foot(velocity, theta.cos(), theta.sin(), dt);
                    let rf = mf.hypot(nf);
                    if rf.is_nan() || rf <= 0.0 {
                        return Err(Error::Config(
                            "time step carries a direction through the origin".into(),
                        ));
                    }
                    let stencils = (0..z.len)
                        .map(|k| quintic_stencil(&z, (z.point(k) + shift) / rf))
                        .collect();
                    rows.push((periodic_stencil(state.n_theta, nf.atan2(mf)), rf, stencils));
                }
                Ok(Stepper::SemiLagrangian { rows })
            }
            Scheme::Upwind => {
                let (hz, ht) = (z.step(), 2.0 * PI / state.n_theta as f64);
                let zmax = z.start.abs().max(z.end.abs());
                let mut cfl: f64 = 0.0;
                let rates = (0..state.n_theta)
                    .map(|j| {
                        let theta = state.theta(j);
                        let (c, s) = (theta.cos(), theta.sin());
                        let (vx, vm, vn) = velocity.at(c, s);
                        let vr = vm * c + vn * s;
                        let vt = vn * c - vm * s;
                        cfl = cfl.max(
                            dt * ((vx.abs() + zmax * vr.abs()) / hz + vt.abs() / ht + vr.abs()),
                        );
                        (dt * vx, dt * vr, dt * vt)
                    })
                    .collect();
                if cfl > config.cfl_limit {
                    return Err(Error::Cfl {
                        cfl,
                        limit: config.cfl_limit,
                    });
                }
                Ok(Stepper::Upwind { rates })
            }
        }
    }

    fn step(&self, state: &UnitSlices) -> Vec<f64> {
        let nz = state.z_grid.len;
        let mut next = vec![0.0; state.values.len()];
        match self {
            Stepper::SemiLagrangian { rows } => {
                next.par_chunks_mut(nz).zip(rows.par_iter()).for_each(
                    |(out, (ts, rf, stencils))| {
                        // The θ stencil is shared by the whole row: blend the six
                        // source rows once, then interpolate in z.
                        let blended = state.blend(ts);
                        for (v, zs) in out.iter_mut().zip(stencils) {
                            if let Some((zb, wz)) = zs {
                                let sum: f64 = (0..6).map(|l| wz[l] * blended[zb + l]).sum();
                                *v = sum / rf;
                            }
                        }
                    },
                );
            }
            Stepper::Upwind { rates } => {
                let n = state.n_theta;
                let (hz, ht) = (state.z_grid.step(), 2.0 * PI / n as f64);
                next.par_chunks_mut(nz).enumerate().for_each(|(j, out)| {
                    let (ax, ar, at) = rates[j];
                    let row = state.row(j);
                    let ahead = state.row((j + 1) % n);
                    let behind = state.row((j + n - 1) % n);
                    for k in 0..nz {
                        let u = row[k];
                        let az = ax - state.z_grid.point(k) * ar;
                        let dz = if az > 0.0 {
                            row.get(k + 1).copied().unwrap_or(0.0) - u
                        } else if k > 0 {
                            u - row[k - 1]
                        } else {
                            u
                        };
                        let dtheta = if at > 0.0 {
                            ahead[k] - u
                        } else {
                            u - behind[k]
                        };
                        out[k] = u + az * dz / hz + at * dtheta / ht - ar * u;
                    }
                });
            }
        }
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{reduce_equation, PotentialSpec};
    use crate::state::{DynamicsKind, StateSpec};

    fn field(state: &StateSpec, n: usize, nx: usize) -> MarginalField {
        let mu = UniformGrid::symmetric(1.0, n).unwrap();
        let x = UniformGrid::symmetric(7.0, nx).unwrap();
        MarginalField::sample(&state.marginal_at(0.0, DynamicsKind::Static), &mu, &mu, &x).unwrap()
    }

    fn max_error(got: &MarginalField, state: &StateSpec, t: f64, dyn_kind: DynamicsKind) -> f64 {
        let exact = MarginalField::sample(
            &state.marginal_at(t, dyn_kind),
            &got.mu_grid,
            &got.nu_grid,
            &got.x_grid,
        )
        .unwrap();
        got.values
            .iter()
            .zip(&exact.values)
            .enumerate()
            .filter(|(n, _)| got.valid[n / got.x_grid.len])
            .map(|(_, (a, b))| (a - b).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn periodic_stencil_wraps() {
        let s = periodic_stencil(8, -1e-3);
        assert_eq!(s.index, [5, 6, 7, 0, 1, 2]);
        let s = periodic_stencil(8, 2.0 * PI * 3.0 / 8.0);
        assert_eq!(s.index, [1, 2, 3, 4, 5, 6]);
        assert!((s.weights[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_time_reproduces_field() {
        let state = StateSpec::coherent(0.5, 0.5);
        let f = field(&state, 33, 129);
        let eq = reduce_equation(&PotentialSpec::harmonic()).unwrap();
        let out = evolve_pde(
            &f,
            &eq,
            &SolverConfig::new(0.1, 0.0, Scheme::SemiLagrangian),
        )
        .unwrap();
        assert!(max_error(&out, &state, 0.0, DynamicsKind::Static) < 1e-2);
    }

    #[test]
    fn semi_lagrangian_harmonic_short_time() {
        let state = StateSpec::coherent(1.0, 0.0);
        let f = field(&state, 33, 257);
        let eq = reduce_equation(&PotentialSpec::harmonic()).unwrap();
        let out = evolve_pde(
            &f,
            &eq,
            &SolverConfig::new(0.05, 0.5, Scheme::SemiLagrangian),
        )
        .unwrap();
        let err = max_error(&out, &state, 0.5, DynamicsKind::Harmonic);
        assert!(err < 5e-3, "error {err}");
    }

    #[test]
    fn upwind_rejects_large_steps() {
        let f = field(&StateSpec::ground(), 33, 129);
        let eq = reduce_equation(&PotentialSpec::harmonic()).unwrap();
        let r = evolve_pde(&f, &eq, &SolverConfig::new(0.5, 1.0, Scheme::Upwind));
        assert!(matches!(r, Err(Error::Cfl { .. })));
    }

    #[test]
    fn upwind_free_short_time() {
        let state = StateSpec::ground();
        let f = field(&state, 33, 129);
        let eq = reduce_equation(&PotentialSpec::free()).unwrap();
        let out = evolve_pde(&f, &eq, &SolverConfig::new(0.005, 0.2, Scheme::Upwind)).unwrap();
        let err = max_error(&out, &state, 0.2, DynamicsKind::Free);
        assert!(err < 0.1, "error {err}");
    }

    #[test]
    fn rejects_nonlinear_velocity() {
        let f = field(&StateSpec::ground(), 33, 129);
        let eq = PdeCoefficients {
            terms: vec![crate::evolution::PdeTerm {
                coeff: 1.0,
                mu_pow: 2,
                nu_pow: 0,
                d_x: 0,
                d_mu: 0,
                d_nu: 1,
            }],
        };
        let r = evolve_pde(
            &f,
            &eq,
            &SolverConfig::new(0.1, 1.0, Scheme::SemiLagrangian),
        );
        assert!(matches!(r, Err(Error::UnsupportedEquation(_))));
    }
}
