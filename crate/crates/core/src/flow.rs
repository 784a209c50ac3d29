//! Exact classical flow for `H = p^2/2 + c1*q + c2*q^2`.
//!
//! For Hamiltonians of at most quadratic degree the Wigner function moves
//! along the classical phase-space flow, and the quadrature marginal moves
//! along the dual (Heisenberg) flow of its parameters `(mu, nu)`. Both are
//! written in terms of the functions
//!
//! ```text
//! C(t) = cos(w t),  S(t) = sin(w t) / w,  G(t) = ∫_0^t S = (1 - C) / k,   k = w^2 = 2 c2
//! ```
//!
//! continued analytically to `k <= 0` (free motion, inverted oscillator).

/// Phase-space flow of `q' = p, p' = -c1 - 2 c2 q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFlow {
    /// Linear force constant `k = 2 c2`.
    pub stiffness: f64,
    /// Constant force term `c1` (the force is `-c1 - k q`).
    pub tilt: f64,
}

/// `q(t) = C q + S p - c1 G`, `p(t) = -k S q + C p - c1 S`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Propagator {
    c: f64,
    s: f64,
    g: f64,
}

impl PhaseFlow {
    pub fn new(c1: f64, c2: f64) -> Self {
        Self {
            stiffness: 2.0 * c2,
            tilt: c1,
        }
    }

    pub fn free() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn harmonic() -> Self {
        Self::new(0.0, 0.5)
    }

    fn propagator(&self, t: f64) -> Propagator {
        let k = self.stiffness;
        if k.abs() * t * t < 1e-8 {
            // Series to second order in k keeps G accurate as k -> 0.
            let t2 = t * t;
            return Propagator {
                c: 1.0 - k * t2 / 2.0 + k * k * t2 * t2 / 24.0,
                s: t * (1.0 - k * t2 / 6.0 + k * k * t2 * t2 / 120.0),
                g: t2 / 2.0 * (1.0 - k * t2 / 12.0 + k * k * t2 * t2 / 360.0),
            };
        }
        let (c, s) = if k > 0.0 {
            let w = k.sqrt();
            ((w * t).cos(), (w * t).sin() / w)
        } else {
            let w = (-k).sqrt();
            ((w * t).cosh(), (w * t).sinh() / w)
        };
        Propagator {
            c,
            s,
            g: (1.0 - c) / k,
        }
    }

    /// Classical trajectory point at time `t` starting from `(q, p)`.
    pub fn advance(&self, q: f64, p: f64, t: f64) -> (f64, f64) {
        let Propagator { c, s, g } = self.propagator(t);
        let k = self.stiffness;
        (
            c * q + s * p - self.tilt * g,
            -k * s * q + c * p - self.tilt * s,
        )
    }

    /// Heisenberg-evolved quadrature: `mu q(t) + nu p(t) = mu' q + nu' p + shift`.
    ///
    /// Returns `(mu', nu', shift)`. The evolved marginal is
    /// `w(X, mu, nu, delta, t) = w0(X - shift, mu', nu', delta)`.
    pub fn heisenberg(&self, mu: f64, nu: f64, t: f64) -> (f64, f64, f64) {
        let Propagator { c, s, g } = self.propagator(t);
        let k = self.stiffness;
        (
            mu * c - nu * k * s,
            mu * s + nu * c,
            -self.tilt * (mu * g + nu * s),
        )
    }
}
