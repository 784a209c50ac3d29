//! Closed-form catalog of oscillator states.
//!
//! Ground, first excited, coherent and odd ("female") cat states, with
//! Wigner functions and quadrature marginals in closed form. Time dependence
//! under free or harmonic motion is generated by the classical flow of the
//! Wigner arguments and the Heisenberg flow of the marginal parameters
//! (exact for Hamiltonians of at most quadratic degree).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::PhaseFlow;
use crate::grid::UniformGrid;
use crate::tomography::{MarginalFunction, TomographyParams, WignerFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateKind {
    Ground,
    ExcitedFirst,
    Coherent,
    OddCat,
}

/// One catalog state. `q0`, `p0` are the displacement of a coherent state or
/// of the coherent components of the cat, `alpha = (q0 + i p0) / sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub kind: StateKind,
    pub q0: f64,
    pub p0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DynamicsKind {
    Static,
    Free,
    Harmonic,
}

impl DynamicsKind {
    /// Phase flow for the dynamics, `None` for `Static`.
    pub fn flow(self) -> Option<PhaseFlow> {
        match self {
            DynamicsKind::Static => None,
            DynamicsKind::Free => Some(PhaseFlow::free()),
            DynamicsKind::Harmonic => Some(PhaseFlow::harmonic()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }
}

/// Normalization `N-` of the odd cat state `N-(|alpha> - |-alpha>)`:
/// `N-^2 = exp(|alpha|^2) / (4 sinh |alpha|^2)` with `|alpha|^2 = (q0^2 + p0^2)/2`.
pub fn cat_normalization(q0: f64, p0: f64) -> Result<f64> {
    if !q0.is_finite() || !p0.is_finite() {
        return Err(Error::NonFinite("cat displacement"));
    }
    let x = 0.5 * (q0 * q0 + p0 * p0);
    if x <= 0.0 {
        return Err(Error::InvalidState(
            "odd cat normalization diverges at zero displacement".into(),
        ));
    }
    // exp(x) / (4 sinh x) == 1 / (2 (1 - exp(-2x))), stable for large x.
    Ok((0.5 / -(-2.0 * x).exp_m1()).sqrt())
}

impl StateSpec {
    pub fn ground() -> Self {
        Self {
            kind: StateKind::Ground,
            q0: 0.0,
            p0: 0.0,
        }
    }

    pub fn excited_first() -> Self {
        Self {
            kind: StateKind::ExcitedFirst,
            q0: 0.0,
            p0: 0.0,
        }
    }

    pub fn coherent(q0: f64, p0: f64) -> Self {
        Self {
            kind: StateKind::Coherent,
            q0,
            p0,
        }
    }

    pub fn odd_cat(q0: f64, p0: f64) -> Result<Self> {
        let s = Self {
            kind: StateKind::OddCat,
            q0,
            p0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.q0.is_finite() || !self.p0.is_finite() {
            return Err(Error::NonFinite("state displacement"));
        }
        if self.kind == StateKind::OddCat && self.q0 == 0.0 && self.p0 == 0.0 {
            return Err(Error::InvalidState(
                "odd cat state requires q0^2 + p0^2 > 0".into(),
            ));
        }
        Ok(())
    }

    /// Wigner function at `t = 0`. Assumes a validated state.
    pub fn wigner0(&self, q: f64, p: f64) -> f64 {
        match self.kind {
            StateKind::Ground => 2.0 * (-q * q - p * p).exp(),
            StateKind::ExcitedFirst => {
                let r2 = q * q + p * p;
                -2.0 * (1.0 - 2.0 * r2) * (-r2).exp()
            }
            StateKind::Coherent => {
                let (dq, dp) = (q - self.q0, p - self.p0);
                2.0 * (-dq * dq - dp * dp).exp()
            }
            StateKind::OddCat => {
                let (q0, p0) = (self.q0, self.p0);
                let n2 = cat_normalization(q0, p0).map(|n| n * n).unwrap_or(f64::NAN);
                let plus = (-(q - q0).powi(2) - (p - p0).powi(2)).exp();
                let minus = (-(q + q0).powi(2) - (p + p0).powi(2)).exp();
                let fringe = 2.0 * (-q * q - p * p).exp() * (2.0 * (q * p0 - p * q0)).cos();
                2.0 * n2 * (plus + minus - fringe)
            }
        }
    }

    /// Marginal `w(X, mu, nu, delta)` at `t = 0`. Assumes `mu^2 + nu^2 > 0`.
    pub fn marginal0(&self, x: f64, mu: f64, nu: f64, delta: f64) -> f64 {
        let r2 = mu * mu + nu * nu;
        let y = x - delta;
        let gauss = |c: f64| (-(y - c) * (y - c) / r2).exp() / (PI * r2).sqrt();
        match self.kind {
            StateKind::Ground => gauss(0.0),
            StateKind::Coherent => gauss(mu * self.q0 + nu * self.p0),
            StateKind::ExcitedFirst => {
                2.0 / PI.sqrt() * r2.powf(-1.5) * y * y * (-y * y / r2).exp()
            }
            StateKind::OddCat => {
                let (q0, p0) = (self.q0, self.p0);
                let n2 = cat_normalization(q0, p0).map(|n| n * n).unwrap_or(f64::NAN);
                let m = mu * q0 + nu * p0;
                let b = mu * p0 - nu * q0;
                let fringe = 2.0 * (-(y * y + m * m) / r2).exp() / (PI * r2).sqrt()
                    * (2.0 * b * y / r2).cos();
                n2 * (gauss(m) + gauss(-m) - fringe)
            }
        }
    }

    /// Wigner evaluator at fixed time.
    pub fn wigner_at(&self, t: f64, dyn_kind: DynamicsKind) -> StateWigner {
        StateWigner {
            state: *self,
            t,
            flow: dyn_kind.flow(),
        }
    }

    /// Marginal evaluator at fixed time.
    pub fn marginal_at(&self, t: f64, dyn_kind: DynamicsKind) -> StateMarginal {
        StateMarginal {
            state: *self,
            t,
            flow: dyn_kind.flow(),
        }
    }
}

/// `W(q, p, t)` of a catalog state.
#[derive(Debug, Clone, Copy)]
pub struct StateWigner {
    pub state: StateSpec,
    pub t: f64,
    pub flow: Option<PhaseFlow>,
}

impl WignerFunction for StateWigner {
    fn wigner(&self, q: f64, p: f64) -> f64 {
        match self.flow {
            None => self.state.wigner0(q, p),
            Some(flow) => {
                let (q0, p0) = flow.advance(q, p, -self.t);
                self.state.wigner0(q0, p0)
            }
        }
    }
}

/// `w(X, mu, nu, delta, t)` of a catalog state.
#[derive(Debug, Clone, Copy)]
pub struct StateMarginal {
    pub state: StateSpec,
    pub t: f64,
    pub flow: Option<PhaseFlow>,
}

impl MarginalFunction for StateMarginal {
    fn marginal(&self, x: f64, params: &TomographyParams) -> f64 {
        match self.flow {
            None => self.state.marginal0(x, params.mu, params.nu, params.delta),
            Some(flow) => {
                let (mu, nu, shift) = flow.heisenberg(params.mu, params.nu, self.t);
                self.state.marginal0(x - shift, mu, nu, params.delta)
            }
        }
    }
}

pub fn wigner_eval(
    state: &StateSpec,
    point: PhasePoint,
    t: f64,
    dyn_kind: DynamicsKind,
) -> Result<f64> {
    state.validate()?;
    if !point.q.is_finite() || !point.p.is_finite() || !t.is_finite() {
        return Err(Error::NonFinite("phase point or time"));
    }
    Ok(state.wigner_at(t, dyn_kind).wigner(point.q, point.p))
}

pub fn marginal_eval(
    state: &StateSpec,
    params: &TomographyParams,
    x: f64,
    t: f64,
    dyn_kind: DynamicsKind,
) -> Result<f64> {
    state.validate()?;
    params.validate()?;
    if !x.is_finite() || !t.is_finite() {
        return Err(Error::NonFinite("X or time"));
    }
    Ok(state.marginal_at(t, dyn_kind).marginal(x, params))
}

/// Real samples of `W(q, p)` on a rectangular grid, row-major in `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerField {
    pub q_grid: UniformGrid,
    pub p_grid: UniformGrid,
    pub values: Vec<f64>,
    /// Non-fatal findings recorded while the field was produced.
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

impl WignerField {
    pub fn new(q_grid: UniformGrid, p_grid: UniformGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != q_grid.len * p_grid.len {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                q_grid.len,
                p_grid.len
            )));
        }
        Ok(Self {
            q_grid,
            p_grid,
            values,
            diagnostics: Vec::new(),
        })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p_grid.len + j]
    }

    /// Trapezoid estimate of `∫∫ W dq dp / (2π)`.
    pub fn normalization(&self) -> f64 {
        let wq = self.q_grid.trapezoid_weights();
        let wp = self.p_grid.trapezoid_weights();
        let mut sum = 0.0;
        for (i, a) in wq.iter().enumerate() {
            for (j, b) in wp.iter().enumerate() {
                sum += a * b * self.at(i, j);
            }
        }
        sum / (2.0 * PI)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl WignerFunction for WignerField {
    fn wigner(&self, q: f64, p: f64) -> f64 {
        crate::interp::bilinear(&self.q_grid, &self.p_grid, &self.values, q, p)
    }
}

/// Default phase-space grid `[-6, 6]^2`, 241 x 241.
pub fn default_phase_grid() -> UniformGrid {
    UniformGrid {
        start: -6.0,
        end: 6.0,
        len: 241,
    }
}

pub const MIN_FIELD_POINTS: usize = 16;
const FIELD_NORMALIZATION_TOL: f64 = 1e-3;

pub fn sample_wigner_field(
    state: &StateSpec,
    q_grid: &UniformGrid,
    p_grid: &UniformGrid,
    t: f64,
    dyn_kind: DynamicsKind,
) -> Result<WignerField> {
    state.validate()?;
    for g in [q_grid, p_grid] {
        if g.len < MIN_FIELD_POINTS {
            return Err(Error::InvalidGrid(format!(
                "phase-space grids need at least {MIN_FIELD_POINTS} points, got {}",
                g.len
            )));
        }
    }
    let w = state.wigner_at(t, dyn_kind);
    let ps = p_grid.points();
    let values = q_grid
        .points()
        .into_iter()
        .flat_map(|q| ps.iter().map(move |&p| (q, p)))
        .map(|(q, p)| w.wigner(q, p))
        .collect();
    let mut field = WignerField::new(*q_grid, *p_grid, values)?;
    let norm = field.normalization();
    if (norm - 1.0).abs() > FIELD_NORMALIZATION_TOL {
        field.diagnostics.push(format!(
            "normalization {norm:.6} differs from 1; grid may not contain the support"
        ));
    }
    Ok(field)
}
