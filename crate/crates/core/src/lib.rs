//! Symplectic tomography engine.
//!
//! A quantum state of one degree of freedom can be described by the
//! probability density `w(X, mu, nu, delta)` of the shifted, squeezed and
//! rotated quadrature `X = mu*q + nu*p + delta`. This crate provides
//!
//! - closed-form Wigner functions and marginals for a small catalog of
//!   oscillator states ([`state`]),
//! - the maps between Wigner functions, marginals, characteristic functions
//!   and position-space density matrices ([`tomography`]),
//! - the transport equation obeyed by the marginal for Hamiltonians
//!   `p^2/2 + V(q)` with `deg V <= 2`, solved both exactly along
//!   characteristics and on a grid ([`evolution`]),
//! - reusable numerical checks ([`verify`]).
//!
//! Units: `hbar = m = omega = 1`. Wigner functions are normalized so that
//! `∫∫ W dq dp / (2π) = 1`.

#![forbid(unsafe_code)]

pub mod error;
pub mod evolution;
pub mod flow;
pub mod grid;
pub mod interp;
pub mod state;
pub mod tomography;
pub mod verify;

pub use error::{Error, Result};
pub use grid::UniformGrid;
pub use state::{DynamicsKind, PhasePoint, StateKind, StateSpec, WignerField};
pub use tomography::{MarginalFunction, TomographyParams, WignerFunction};
