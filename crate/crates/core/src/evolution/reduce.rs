//! Symbolic reduction of the marginal evolution equation.
//!
//! The equation of motion of the density operator becomes, on the marginal,
//!
//! ```text
//! ∂_t w = -i [T(p+) - T(p-)] w + i [V(q+) - V(q-)] w,     T(p) = p^2/2,
//! q± = D^{-1} ∂_mu ± (i/2) nu D,   p± = D^{-1} ∂_nu ± (i/2) mu D,   D = ∂_delta,
//! ```
//!
//! with `D^{-1}` an integral operator. Expanding the brackets in normal order
//! (multiplications left of derivatives) and substituting `D = -∂_X` (from
//! `w(X, delta) = w(X - delta, 0)`) yields a differential operator exactly
//! when no negative power of `D` survives, which is the case for
//! `deg V <= 2`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::PhaseFlow;

/// Polynomial potential `V(q) = Σ c_n q^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub coefficients: Vec<f64>,
}

impl PotentialSpec {
    /// Any polynomial; the degree restriction is enforced by the consumers.
    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("potential coefficients"));
        }
        Ok(Self { coefficients })
    }

    pub fn quadratic(c0: f64, c1: f64, c2: f64) -> Result<Self> {
        Self::polynomial(vec![c0, c1, c2])
    }

    pub fn free() -> Self {
        Self {
            coefficients: vec![0.0, 0.0, 0.0],
        }
    }

    pub fn harmonic() -> Self {
        Self {
            coefficients: vec![0.0, 0.0, 0.5],
        }
    }

    pub fn linear(c1: f64) -> Self {
        Self {
            coefficients: vec![0.0, c1, 0.0],
        }
    }

    pub fn coefficient(&self, n: usize) -> f64 {
        self.coefficients.get(n).copied().unwrap_or(0.0)
    }

    /// Degree of the polynomial (0 for the zero potential).
    pub fn degree(&self) -> usize {
        self.coefficients
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }

    /// Exact phase flow; only for `deg V <= 2`.
    pub fn flow(&self) -> Result<PhaseFlow> {
        let degree = self.degree();
        if degree > 2 {
            return Err(Error::UnsupportedPotential { degree });
        }
        Ok(PhaseFlow::new(self.coefficient(1), self.coefficient(2)))
    }
}

impl std::str::FromStr for PotentialSpec {
    type Err = Error;

    /// Comma-separated coefficients `c0,c1,c2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let coefficients = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad potential coefficient {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::polynomial(coefficients)
    }
}

/// `coeff * mu^mu_pow * nu^nu_pow * ∂_X^d_x ∂_mu^d_mu ∂_nu^d_nu`, derivatives
/// acting on `w` first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeTerm {
    pub coeff: f64,
    pub mu_pow: u32,
    pub nu_pow: u32,
    pub d_x: u32,
    pub d_mu: u32,
    pub d_nu: u32,
}

impl PdeTerm {
    pub fn order(&self) -> u32 {
        self.d_x + self.d_mu + self.d_nu
    }
}

/// Right-hand side of `∂_t w = Σ terms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeCoefficients {
    pub terms: Vec<PdeTerm>,
}

/// First-order transport field `∂_t w = v · ∇w` over `(X, mu, nu)`, each
/// component a polynomial in `(mu, nu)` given as `(coeff, mu_pow, nu_pow)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Velocity {
    pub x: Vec<(f64, u32, u32)>,
    pub mu: Vec<(f64, u32, u32)>,
    pub nu: Vec<(f64, u32, u32)>,
}

fn eval_poly(p: &[(f64, u32, u32)], mu: f64, nu: f64) -> f64 {
    p.iter()
        .map(|&(c, a, b)| c * mu.powi(a as i32) * nu.powi(b as i32))
        .sum()
}

impl Velocity {
    /// `(v_X, v_mu, v_nu)` at `(mu, nu)`.
    pub fn at(&self, mu: f64, nu: f64) -> (f64, f64, f64) {
        (
            eval_poly(&self.x, mu, nu),
            eval_poly(&self.mu, mu, nu),
            eval_poly(&self.nu, mu, nu),
        )
    }
}

impl PdeCoefficients {
    pub fn velocity(&self) -> Result<Velocity> {
        let mut v = Velocity::default();
        for t in &self.terms {
            let entry = (t.coeff, t.mu_pow, t.nu_pow);
            match (t.d_x, t.d_mu, t.d_nu) {
                (1, 0, 0) => v.x.push(entry),
                (0, 1, 0) => v.mu.push(entry),
                (0, 0, 1) => v.nu.push(entry),
                _ => {
                    return Err(Error::UnsupportedEquation(format!(
                        "term {t:?} is not a first-order transport term"
                    )))
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Display for PdeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.coeff < 0.0 { '-' } else { '+' };
        write!(f, "{sign}{}", self.coeff.abs())?;
        for (name, p) in [("mu", self.mu_pow), ("nu", self.nu_pow)] {
            match p {
                0 => {}
                1 => write!(f, " {name}")?,
                _ => write!(f, " {name}^{p}")?,
            }
        }
        for (name, d) in [("X", self.d_x), ("mu", self.d_mu), ("nu", self.d_nu)] {
            match d {
                0 => {}
                1 => write!(f, " d_{name}")?,
                _ => write!(f, " d_{name}^{d}")?,
            }
        }
        write!(f, " w")
    }
}

impl fmt::Display for PdeCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d_t w =")?;
        if self.terms.is_empty() {
            return write!(f, " 0");
        }
        for t in &self.terms {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

/// Normal-ordered monomial `c mu^a nu^b ∂_mu^m ∂_nu^n D^e`, `e` possibly
/// negative (inverse shift derivative).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Monomial {
    c: Complex64,
    mu: u32,
    nu: u32,
    d_mu: u32,
    d_nu: u32,
    d_delta: i32,
}

impl Monomial {
    fn key(&self) -> (u32, u32, u32, u32, i32) {
        (self.mu, self.nu, self.d_mu, self.d_nu, self.d_delta)
    }
}

type Operator = Vec<Monomial>;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64)
}

fn add_into(acc: &mut Operator, m: Monomial) {
    if m.c == Complex64::new(0.0, 0.0) {
        return;
    }
    if let Some(e) = acc.iter_mut().find(|e| e.key() == m.key()) {
        e.c += m.c;
    } else {
        acc.push(m);
    }
}

/// Product in normal order: `∂^m x^a = Σ_k C(m,k) a!/(a-k)! x^{a-k} ∂^{m-k}`.
fn multiply(lhs: &Operator, rhs: &Operator) -> Operator {
    let mut out = Operator::new();
    for l in lhs {
        for r in rhs {
            for k in 0..=l.d_mu.min(r.mu) {
                for j in 0..=l.d_nu.min(r.nu) {
                    let factor = binomial(l.d_mu, k)
                        * falling(r.mu, k)
                        * binomial(l.d_nu, j)
                        * falling(r.nu, j);
                    add_into(
                        &mut out,
                        Monomial {
                            c: l.c * r.c * factor,
                            mu: l.mu + r.mu - k,
                            nu: l.nu + r.nu - j,
                            d_mu: l.d_mu - k + r.d_mu,
                            d_nu: l.d_nu - j + r.d_nu,
                            d_delta: l.d_delta + r.d_delta,
                        },
                    );
                }
            }
        }
    }
    out.retain(|m| m.c != Complex64::new(0.0, 0.0));
    out
}

fn scale(op: &Operator, c: Complex64) -> Operator {
    op.iter()
        .map(|m| Monomial { c: m.c * c, ..*m })
        .filter(|m| m.c != Complex64::new(0.0, 0.0))
        .collect()
}

fn identity() -> Operator {
    vec![Monomial {
        c: Complex64::new(1.0, 0.0),
        mu: 0,
        nu: 0,
        d_mu: 0,
        d_nu: 0,
        d_delta: 0,
    }]
}

/// `Σ c_n op^n`.
fn polynomial_of(coeffs: &[f64], op: &Operator) -> Operator {
    let mut out = Operator::new();
    let mut power = identity();
    for (n, &c) in coeffs.iter().enumerate() {
        if n > 0 {
            power = multiply(&power, op);
        }
        for m in scale(&power, Complex64::new(c, 0.0)) {
            add_into(&mut out, m);
        }
    }
    out
}

/// `D^{-1} ∂_y ± (i/2) x D` for the conjugate pair `(x, ∂_y)`.
fn shifted_quadrature(on_mu: bool, sign: f64) -> Operator {
    let half_i = Complex64::new(0.0, 0.5 * sign);
    let one = Complex64::new(1.0, 0.0);
    if on_mu {
        // q±: derivative in mu, multiplication by nu.
        vec![
            Monomial {
                c: one,
                mu: 0,
                nu: 0,
                d_mu: 1,
                d_nu: 0,
                d_delta: -1,
            },
            Monomial {
                c: half_i,
                mu: 0,
                nu: 1,
                d_mu: 0,
                d_nu: 0,
                d_delta: 1,
            },
        ]
    } else {
        // p±: derivative in nu, multiplication by mu.
        vec![
            Monomial {
                c: one,
                mu: 0,
                nu: 0,
                d_mu: 0,
                d_nu: 1,
                d_delta: -1,
            },
            Monomial {
                c: half_i,
                mu: 1,
                nu: 0,
                d_mu: 0,
                d_nu: 0,
                d_delta: 1,
            },
        ]
    }
}

fn bracket(coeffs: &[f64], on_mu: bool, prefactor: Complex64) -> Operator {
    let plus = polynomial_of(coeffs, &shifted_quadrature(on_mu, 1.0));
    let minus = polynomial_of(coeffs, &shifted_quadrature(on_mu, -1.0));
    let mut diff = plus;
    for m in scale(&minus, Complex64::new(-1.0, 0.0)) {
        add_into(&mut diff, m);
    }
    diff.retain(|m| m.c != Complex64::new(0.0, 0.0));
    scale(&diff, prefactor)
}

/// Reduce the marginal evolution equation for `H = p^2/2 + V(q)` to explicit
/// differential terms.
pub fn reduce_equation(potential: &PotentialSpec) -> Result<PdeCoefficients> {
    let kinetic = bracket(&[0.0, 0.0, 0.5], false, Complex64::new(0.0, -1.0));
    let potential_part = bracket(&potential.coefficients, true, Complex64::new(0.0, 1.0));
    let mut total = kinetic;
    for m in potential_part {
        add_into(&mut total, m);
    }
    total.retain(|m| m.c != Complex64::new(0.0, 0.0));

    let mut terms = Vec::with_capacity(total.len());
    for m in total {
        if m.d_delta < 0 {
            return Err(Error::UnsupportedPotential {
                degree: potential.degree(),
            });
        }
        if m.c.im != 0.0 {
            return Err(Error::UnsupportedEquation(format!(
                "non-real coefficient {} in reduced equation",
                m.c
            )));
        }
        // D^e = (-∂_X)^e
        let sign = if m.d_delta % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(PdeTerm {
            coeff: sign * m.c.re,
            mu_pow: m.mu,
            nu_pow: m.nu,
            d_x: m.d_delta as u32,
            d_mu: m.d_mu,
            d_nu: m.d_nu,
        });
    }
    Ok(PdeCoefficients { terms })
}
