//! Oracles shared by the integration tests.
//!
//! States are built independently of the closed forms: as Fock-basis
//! expansions evaluated through Hermite functions, with Wigner functions and
//! density matrices obtained by direct quadrature of the wavefunction.

#![allow(dead_code)]

use num_complex::Complex64;
use symtomo::{StateKind, StateSpec};

/// Fock amplitudes `c_n` of a catalog state, truncated at `n_max`.
pub fn fock_amplitudes(state: &StateSpec, n_max: usize) -> Vec<Complex64> {
    let coherent = |alpha: Complex64| -> Vec<Complex64> {
        let mut c = Vec::with_capacity(n_max + 1);
        let mut term = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        c.push(term);
        for n in 1..=n_max {
            term = term * alpha / (n as f64).sqrt();
            c.push(term);
        }
        c
    };
    let alpha = Complex64::new(state.q0, state.p0) / 2f64.sqrt();
    match state.kind {
        StateKind::Ground => unit(0, n_max),
        StateKind::ExcitedFirst => unit(1, n_max),
        StateKind::Coherent => coherent(alpha),
        StateKind::OddCat => {
            let plus = coherent(alpha);
            let minus = coherent(-alpha);
            let raw: Vec<Complex64> = plus.iter().zip(&minus).map(|(a, b)| a - b).collect();
            let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            raw.into_iter().map(|z| z / norm).collect()
        }
    }
}

fn unit(k: usize, n_max: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); n_max + 1];
    c[k] = Complex64::new(1.0, 0.0);
    c
}

/// Hermite functions `psi_0 .. psi_n_max` at `x`.
pub fn hermite_functions(x: f64, n_max: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(n_max + 1);
    psi.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n_max >= 1 {
        psi.push(2f64.sqrt() * x * psi[0]);
    }
    for n in 1..n_max {
        let next = (2.0 / (n + 1) as f64).sqrt() * x * psi[n]
            - (n as f64 / (n + 1) as f64).sqrt() * psi[n - 1];
        psi.push(next);
    }
    psi
}

/// Wavefunction of the rotated quadrature `q cos φ + p sin φ`:
/// `Σ c_n e^{-i n φ} psi_n(x)`.
pub fn wavefunction(c: &[Complex64], x: f64, phi: f64) -> Complex64 {
    hermite_functions(x, c.len() - 1)
        .iter()
        .zip(c)
        .enumerate()
        .map(|(n, (&h, &cn))| cn * Complex64::from_polar(h, -(n as f64) * phi))
        .sum()
}

/// `W(q, p) = 2 ∫ psi*(q + y) psi(q - y) e^{2ipy} dy` (normalized to 2π).
pub fn fock_wigner(c: &[Complex64], q: f64, p: f64) -> f64 {
    let h = 0.01;
    let n = 1200;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in -n..=n {
        let y = k as f64 * h;
        let a = wavefunction(c, q + y, 0.0).conj();
        let b = wavefunction(c, q - y, 0.0);
        sum += a * b * Complex64::from_polar(1.0, 2.0 * p * y);
    }
    2.0 * sum.re * h
}

/// `w(X, mu, nu, 0)` from the rotated-quadrature wavefunction and the scaling identity.
pub fn fock_marginal(c: &[Complex64], x: f64, mu: f64, nu: f64) -> f64 {
    let r = mu.hypot(nu);
    let phi = nu.atan2(mu);
    wavefunction(c, x / r, phi).norm_sqr() / r
}

/// The four catalog states used throughout the suites.
pub fn catalog() -> Vec<StateSpec> {
    vec![
        StateSpec::ground(),
        StateSpec::excited_first(),
        StateSpec::coherent(1.0, -0.5),
        StateSpec::odd_cat(2f64.sqrt(), 0.0).unwrap(),
    ]
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
