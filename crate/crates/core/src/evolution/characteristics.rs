//! Exact evolution along characteristics for at most quadratic potentials.

use crate::error::{Error, Result};
use crate::flow::PhaseFlow;
use crate::state::{DynamicsKind, StateSpec, StateWigner};
use crate::tomography::{MarginalFunction, TomographyParams, WignerFunction};

use super::reduce::PotentialSpec;

/// `w(X, mu, nu, delta, t) = w0(X - shift, mu', nu', delta)` with the
/// Heisenberg-evolved direction.
#[derive(Debug, Clone)]
pub struct EvolvedMarginal<M> {
    pub initial: M,
    pub flow: PhaseFlow,
    pub t: f64,
}

impl<M: MarginalFunction> MarginalFunction for EvolvedMarginal<M> {
    fn marginal(&self, x: f64, params: &TomographyParams) -> f64 {
        let (mu, nu, shift) = self.flow.heisenberg(params.mu, params.nu, self.t);
        self.initial
            .marginal(x - shift, &TomographyParams::new(mu, nu, params.delta))
    }
}

pub fn evolve_characteristics<M: MarginalFunction>(
    initial: M,
    potential: &PotentialSpec,
    t: f64,
) -> Result<EvolvedMarginal<M>> {
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    Ok(EvolvedMarginal {
        initial,
        flow: potential.flow()?,
        t,
    })
}

/// `W(q, p, t) = W0(phi_{-t}(q, p))` (Liouville transport, exact for
/// quadratic Hamiltonians).
#[derive(Debug, Clone)]
pub struct EvolvedWigner<W> {
    pub initial: W,
    pub flow: PhaseFlow,
    pub t: f64,
}

impl<W: WignerFunction> WignerFunction for EvolvedWigner<W> {
    fn wigner(&self, q: f64, p: f64) -> f64 {
        let (q0, p0) = self.flow.advance(q, p, -self.t);
        self.initial.wigner(q0, p0)
    }
}

pub fn evolve_wigner<W: WignerFunction>(
    initial: W,
    potential: &PotentialSpec,
    t: f64,
) -> Result<EvolvedWigner<W>> {
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    Ok(EvolvedWigner {
        initial,
        flow: potential.flow()?,
        t,
    })
}

/// Reference Wigner function of a catalog state under free or harmonic motion.
pub fn evolve_wigner_reference(
    state: &StateSpec,
    dyn_kind: DynamicsKind,
    t: f64,
) -> Result<StateWigner> {
    state.validate()?;
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    if dyn_kind == DynamicsKind::Static {
        return Err(Error::Config(
            "reference evolution needs free or harmonic dynamics".into(),
        ));
    }
    Ok(state.wigner_at(t, dyn_kind))
}
