//! Time evolution of the quadrature marginal.
//!
//! For `H = p^2/2 + V(q)` the marginal obeys a transport equation in
//! `(X, mu, nu)`. [`reduce_equation`] derives it symbolically for polynomial
//! potentials, [`evolve_characteristics`] solves it exactly for
//! `deg V <= 2`, and [`evolve_pde`] integrates it on a grid.

mod characteristics;
mod pde;
mod reduce;

pub use characteristics::{
    evolve_characteristics, evolve_wigner, evolve_wigner_reference, EvolvedMarginal, EvolvedWigner,
};
pub use pde::{evolve_pde, evolve_pde_snapshots, Scheme, SolverConfig};
pub use reduce::{reduce_equation, PdeCoefficients, PdeTerm, PotentialSpec, Velocity};
